import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.sparse import csr_matrix

from drivendicke import _kernels_py
from drivendicke._backend import kernels as active_kernels
from drivendicke._integrate import (
    COEFF_CONST,
    COEFF_DRIVE,
    COEFF_LORENTZ,
    LinearTerms,
    TermCoeff,
    solve_rk45,
)

rng = np.random.default_rng(3)


def random_stable_matrix(dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return csr_matrix(a - 2.0 * dim * np.eye(dim))


class TestTermCoeff:
    def test_const(self):
        assert TermCoeff(COEFF_CONST, amp=2.5).value(1.23) == 2.5

    def test_lorentz(self):
        c = TermCoeff(COEFF_LORENTZ, amp=1.5, xi=0.9, omega=2.0, phi=0.3)
        t = 0.77
        want = 1.5 * math.sqrt(1 - 0.81 * math.sin(2 * t + 0.3) ** 2)
        assert c.value(t) == pytest.approx(want, rel=1e-15)

    def test_drive(self):
        c = TermCoeff(COEFF_DRIVE, amp=0.4, xi=0.5, omega=1.7, phi=0.1,
                      kappa=0.8)
        t = 2.2
        lor = math.sqrt(1 - 0.25 * math.sin(1.7 * t + 0.1) ** 2)
        want = 0.4 * lor * math.sin(0.8 * math.cos(1.7 * t + 0.1))
        assert c.value(t) == pytest.approx(want, rel=1e-15)


class TestSolver:
    def test_matches_scipy_constant(self):
        dim = 12
        mat = random_stable_matrix(dim)
        y0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        t = np.linspace(0.0, 1.5, 31)
        terms = LinearTerms([(TermCoeff(COEFF_CONST, amp=1.0), mat)])
        res = solve_rk45(terms, y0, t, rtol=1e-11, atol=1e-13,
                         snapshot_idx=[len(t) - 1])
        ref = solve_ivp(lambda tt, y: mat.dot(y), (0, t[-1]), y0,
                        t_eval=t, rtol=1e-11, atol=1e-13)
        assert np.max(np.abs(res.snapshots[len(t) - 1] - ref.y[:, -1])) < 1e-8

    def test_matches_scipy_time_dependent(self):
        dim = 6
        m1 = random_stable_matrix(dim)
        m2 = csr_matrix(rng.normal(size=(dim, dim)) * 0.5 + 0j)
        coeff = TermCoeff(COEFF_LORENTZ, amp=1.0, xi=0.8, omega=3.0)
        terms = LinearTerms([(TermCoeff(COEFF_CONST, amp=1.0), m1),
                             (coeff, m2)])
        y0 = rng.normal(size=dim) + 0j
        t = np.linspace(0.0, 2.0, 21)
        res = solve_rk45(terms, y0, t, rtol=1e-11, atol=1e-13,
                         snapshot_idx=[len(t) - 1])
        ref = solve_ivp(
            lambda tt, y: m1.dot(y) + coeff.value(tt) * m2.dot(y),
            (0, t[-1]), y0, t_eval=t, rtol=1e-12, atol=1e-14)
        assert np.max(np.abs(res.snapshots[len(t) - 1] - ref.y[:, -1])) < 1e-8

    def test_span_and_dense_modes_agree(self):
        dim = 8
        mat = random_stable_matrix(dim)
        y0 = rng.normal(size=dim) + 0j
        t = np.linspace(0.0, 1.0, 11)
        obs = csr_matrix(np.eye(dim, dtype=complex))
        out = {}
        for mode in ("span", "dense"):
            terms = LinearTerms([(TermCoeff(COEFF_CONST, amp=1.0), mat)])
            out[mode] = solve_rk45(terms, y0, t, rtol=1e-10, atol=1e-12,
                                   obs=obs, mode=mode).obs
        assert np.max(np.abs(out["span"] - out["dense"])) < 1e-7

    def test_observable_rows(self):
        dim = 5
        mat = csr_matrix(np.zeros((dim, dim), dtype=complex))
        y0 = np.arange(1.0, dim + 1.0) + 0j
        t = np.linspace(0.0, 1.0, 5)
        obs = csr_matrix(np.array([[1, 0, 0, 0, 0],
                                   [0, 0, 0, 0, 2]], dtype=complex))
        res = solve_rk45(LinearTerms([(TermCoeff(COEFF_CONST, amp=1.0), mat)]),
                         y0, t, obs=obs)
        assert np.allclose(res.obs[0], 1.0)
        assert np.allclose(res.obs[1], 10.0)

    def test_on_eval_abort(self):
        dim = 3
        mat = csr_matrix(np.eye(dim, dtype=complex))   # exponential growth
        y0 = np.ones(dim, dtype=complex)
        t = np.linspace(0.0, 5.0, 21)
        obs = csr_matrix(np.eye(dim, dtype=complex))

        def on_eval(i, tt, col):
            if col[0].real > 5.0:
                raise RuntimeError("guard fired")

        with pytest.raises(RuntimeError, match="guard fired"):
            solve_rk45(LinearTerms([(TermCoeff(COEFF_CONST, amp=1.0), mat)]),
                       y0, t, obs=obs, on_eval=on_eval)

    def test_grid_validation(self):
        mat = csr_matrix(np.eye(2, dtype=complex))
        terms = LinearTerms([(TermCoeff(COEFF_CONST, amp=1.0), mat)])
        with pytest.raises(ValueError):
            solve_rk45(terms, np.ones(2, dtype=complex), [0.0, 0.0, 1.0])


class TestBackendParity:
    def test_span_stepper_matches_fallback(self):
        dim = 10
        mat = random_stable_matrix(dim)
        coeffs = [TermCoeff(COEFF_CONST, amp=1.0),
                  TermCoeff(COEFF_LORENTZ, amp=0.3, xi=0.7, omega=2.0)]
        mats = [mat, csr_matrix(rng.normal(size=(dim, dim)) * 0.2 + 0j)]
        kinds = np.array([c.kind for c in coeffs], dtype=np.int32)
        pars = np.array([[c.amp, c.xi, c.omega, c.phi, c.kappa]
                         for c in coeffs])
        datas = [np.ascontiguousarray(m.data.astype(complex)) for m in mats]
        idxs = [np.ascontiguousarray(m.indices.astype(np.int32)) for m in mats]
        ptrs = [np.ascontiguousarray(m.indptr.astype(np.int32)) for m in mats]
        y0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        results = []
        for impl in (active_kernels, _kernels_py):
            y = y0.copy()
            k = np.empty((7, dim), dtype=complex)
            ytmp = np.empty(dim, dtype=complex)
            ynew = np.empty(dim, dtype=complex)
            impl.rk45_span(kinds, pars, datas, idxs, ptrs, 0.0, 0.8, 1e-4,
                           1e-10, 1e-12, math.inf, y, k, ytmp, ynew, False)
            results.append(y.copy())
        assert np.max(np.abs(results[0] - results[1])) < 1e-12

    def test_matvec_kernels_agree(self):
        dim = 40
        mat = random_stable_matrix(dim)
        data = np.ascontiguousarray(mat.data.astype(complex))
        idx = np.ascontiguousarray(mat.indices.astype(np.int32))
        ptr = np.ascontiguousarray(mat.indptr.astype(np.int32))
        x = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        out_a = np.empty(dim, dtype=complex)
        out_b = np.empty(dim, dtype=complex)
        active_kernels.csr_matvec(data, idx, ptr, x, out_a)
        _kernels_py.csr_matvec(data, idx, ptr, x, out_b)
        assert np.max(np.abs(out_a - out_b)) < 1e-13
        assert np.max(np.abs(out_a - mat.dot(x))) < 1e-13

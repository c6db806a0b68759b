import math

import numpy as np
import pytest
import scipy.special as sps

from drivendicke.dynamics import LindbladSpec, evolve
from drivendicke.errors import GridCoverageError, UndefinedFanoError
from drivendicke.observables import (
    burst_summary,
    fano,
    log_negativity,
    photon_number,
    reduced_cavity,
    scaling_fit,
    wigner,
    wigner_at,
    wigner_radial_profile,
)

rng = np.random.default_rng(8)


def coherent_state(alpha, dim):
    ns = np.arange(dim)
    vec = np.exp(-abs(alpha) ** 2 / 2) * alpha ** ns / np.sqrt(
        sps.factorial(ns))
    return np.outer(vec, vec.conj())


def thermal_state(nbar, dim):
    pops = (nbar / (1 + nbar)) ** np.arange(dim) / (1 + nbar)
    pops = pops / pops.sum()
    return np.diag(pops).astype(complex)


def fock_state(n, dim):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def wigner_oracle(rho, alphas):
    """Independent Fock-basis evaluation via scipy's Laguerre polynomials."""
    a = np.asarray(alphas, dtype=complex)
    dim = rho.shape[0]
    out = np.zeros(a.shape, dtype=complex)
    for m in range(dim):
        for n in range(dim):
            mm, nn = max(m, n), min(m, n)
            base = ((2 / math.pi) * np.exp(-2 * np.abs(a) ** 2)
                    * (-1) ** nn
                    * math.sqrt(sps.factorial(nn) / sps.factorial(mm))
                    * (2 * np.conj(a)) ** (mm - nn)
                    * sps.genlaguerre(nn, mm - nn)(4 * np.abs(a) ** 2))
            out += rho[m, n] * (base if m >= n else np.conj(base))
    return out.real


class TestPhotonStatistics:
    def test_fock_fano_zero(self):
        assert fano(fock_state(3, 8)) == pytest.approx(0.0, abs=1e-12)

    def test_coherent_fano_one(self):
        assert fano(coherent_state(1.3 + 0.4j, 30)) == pytest.approx(
            1.0, abs=1e-9)

    def test_thermal_fano(self):
        # geometric distribution oracle: variance nbar^2 + nbar
        nbar = 2.5
        dim = 200
        pops = (nbar / (1 + nbar)) ** np.arange(dim) / (1 + nbar)
        pops = pops / pops.sum()
        ns = np.arange(dim)
        mean = float(np.sum(ns * pops))
        var = float(np.sum(ns ** 2 * pops)) - mean ** 2
        want = var / mean
        assert want == pytest.approx(nbar + 1, rel=1e-6)
        assert fano(thermal_state(nbar, dim)) == pytest.approx(want, rel=1e-12)

    def test_vacuum_fano_undefined(self):
        with pytest.raises(UndefinedFanoError):
            fano(fock_state(0, 4))

    def test_reduced_state_consistency(self):
        t = np.linspace(0.0, 100.0, 101)
        tr = evolve(LindbladSpec.rwa(3, 10, 0.01, 0.02, 0.02), None, t,
                    snapshot_times=(100.0,))
        state = tr.snapshots[100]
        assert photon_number(state) == pytest.approx(
            photon_number(reduced_cavity(state)), abs=1e-10)


class TestWigner:
    def test_vacuum_gaussian(self):
        pts = (rng.normal(size=16) + 1j * rng.normal(size=16))
        w = wigner_at(fock_state(0, 12), pts)
        ref = (2 / math.pi) * np.exp(-2 * np.abs(pts) ** 2)
        assert np.max(np.abs(w - ref)) < 1e-12

    def test_fock_one_negativity(self):
        assert wigner_at(fock_state(1, 6), np.array([0.0 + 0.0j]))[0] == \
            pytest.approx(-2 / math.pi, rel=1e-12)

    def test_coherent_state_displaced_gaussian(self):
        alpha0 = 1.3 + 0.4j
        rho = coherent_state(alpha0, 30)
        pts = np.array([alpha0, 0.0, 0.5 - 0.2j])
        w = wigner_at(rho, pts)
        ref = (2 / math.pi) * np.exp(-2 * np.abs(pts - alpha0) ** 2)
        assert np.max(np.abs(w - ref)) < 1e-9

    def test_general_state_against_laguerre_oracle(self):
        dim = 7
        x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = x @ x.conj().T
        rho = rho / np.trace(rho)
        pts = 0.8 * (rng.normal(size=9) + 1j * rng.normal(size=9))
        assert np.max(np.abs(wigner_at(rho, pts)
                             - wigner_oracle(rho, pts))) < 1e-10

    def test_grid_normalization(self):
        g = wigner(coherent_state(0.8, 25), extent=6.0, points=101)
        assert abs(g.normalization - 1.0) < 1e-3

    def test_grid_too_small(self):
        with pytest.raises(GridCoverageError):
            wigner(coherent_state(3.0, 40), extent=2.0, points=41)

    def test_radial_profile_of_ring(self):
        # phase-averaged coherent state: ring peaked at |alpha|
        dim = 40
        r0 = 2.0
        pops = np.exp(-r0 ** 2) * r0 ** (2 * np.arange(dim)) / sps.factorial(
            np.arange(dim))
        rho = np.diag(pops / pops.sum()).astype(complex)
        radii, prof, aniso = wigner_radial_profile(rho, r_max=4.0)
        assert abs(radii[np.argmax(prof)] - r0) < 0.15
        assert aniso < 1e-12


class TestLogNegativity:
    def test_product_state_zero(self):
        rho = np.kron(np.diag([0.7, 0.3]), np.diag([0.2, 0.8])).astype(complex)
        assert log_negativity(rho, n_levels=2) == pytest.approx(0.0, abs=1e-12)

    def test_bell_pair_one(self):
        psi = np.zeros(4, dtype=complex)
        psi[0] = psi[3] = 1 / math.sqrt(2)
        rho = np.outer(psi, psi.conj())
        assert log_negativity(rho, n_levels=2) == pytest.approx(1.0, rel=1e-12)

    def test_initial_state_zero(self):
        t = np.linspace(0.0, 1.0, 3)
        tr = evolve(LindbladSpec.rwa(3, 6, 0.01, 0.02, 0.02), None, t,
                    snapshot_times=(0.0,))
        assert log_negativity(tr.snapshots[0]) == pytest.approx(0.0,
                                                                abs=1e-12)

    @pytest.mark.parametrize("n_sites", [2, 3])
    def test_block_paths_match_brute_force(self, n_sites):
        t = np.linspace(0.0, 120.0, 121)
        kw = dict(rtol=1e-11, atol=1e-13, snapshot_times=(40.0, 120.0))
        tr_b = evolve(LindbladSpec.rwa(n_sites, 12, 0.01, 0.02, 0.02),
                      None, t, **kw)
        tr_p = evolve(LindbladSpec.rwa(n_sites, 12, 0.01, 0.02, 0.02,
                                       product=True), None, t, **kw)
        for i in tr_b.snapshots:
            fast = log_negativity(tr_b.snapshots[i])
            bdm = tr_b.snapshots[i].to_block_density_matrix()
            dense = log_negativity(bdm, use_symmetry=False)
            brute = log_negativity(tr_p.snapshots[i], n_levels=13)
            assert fast == pytest.approx(dense, abs=1e-10)
            assert fast == pytest.approx(brute, abs=1e-9)


class TestBurstSummary:
    def test_synthetic_peak(self):
        t = np.linspace(0.0, 12.0, 2401)
        n = t * np.exp(1.0 - t) + 0.1
        b = burst_summary(t, n)
        assert b.conclusive
        assert b.t_d == pytest.approx(1.0, abs=1e-3)
        assert b.peak_value == pytest.approx(1.1, rel=1e-6)
        assert b.steady_value == pytest.approx(0.1, rel=5e-2)

    def test_monotone_saturation_has_no_peak(self):
        t = np.linspace(0.0, 60.0, 601)
        b = burst_summary(t, 1.0 - np.exp(-t / 3.0))
        assert b.peak_value is None and b.t_d is None
        assert b.steady_value == pytest.approx(1.0, rel=1e-3)

    def test_unsettled_trajectory_flagged(self):
        t = np.linspace(0.0, 3.0, 301)
        b = burst_summary(t, np.exp(t))     # still growing at the end
        assert not b.conclusive


class TestScalingFit:
    def test_exact_power_law(self):
        n = np.logspace(1, 3, 7)
        fit = scaling_fit(n, 3.0 * n ** 2, kind="power")
        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert fit.stderr == pytest.approx(0.0, abs=1e-9)

    def test_exact_linear(self):
        n = np.linspace(10.0, 200.0, 8)
        fit = scaling_fit(n, 0.7 * n, kind="linear")
        assert fit.slope == pytest.approx(0.7, rel=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            scaling_fit([1, 2, 3], [1, 2, 3])
        with pytest.raises(ValueError):
            scaling_fit([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])   # < one decade
        with pytest.raises(ValueError):
            scaling_fit([1, 5, 10, 50, 100], [1, 1, -1, 1, 1], kind="power")

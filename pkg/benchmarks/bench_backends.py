"""Compare the compiled kernels against the pure numpy/scipy fallback.

Times the two hot paths, a bare Liouvillian matvec and an end-to-end
integration span, on representative workloads:

  * the reduced permutation-symmetric generator at N = 15 (the large
    reference-run shape), and
  * the small laboratory-frame superoperator stepped across many fast
    drive periods (the stage-loop-bound regime).

Run:  python benchmarks/bench_backends.py
"""

import math
import os
import sys
import time

import numpy as np

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "src"))

from drivendicke import _kernels_py                      # noqa: E402
from drivendicke._integrate import LinearTerms, TermCoeff, COEFF_CONST  # noqa: E402
from drivendicke._liouvillian import ReducedLayout, liouvillian_rwa  # noqa: E402
from drivendicke import _bruteforce as bf                # noqa: E402
from drivendicke.params import PhysicalParams            # noqa: E402

try:
    from drivendicke import _kernels as compiled
except ImportError:
    compiled = None


def _prep_csr(mat):
    return (np.ascontiguousarray(mat.data.astype(complex)),
            np.ascontiguousarray(mat.indices.astype(np.int32)),
            np.ascontiguousarray(mat.indptr.astype(np.int32)))


def bench_matvec(impl, data, idx, ptr, x, repeats=200):
    out = np.empty_like(x)
    impl.csr_matvec(data, idx, ptr, x, out)      # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        impl.csr_matvec(data, idx, ptr, x, out)
    return (time.perf_counter() - t0) / repeats


def bench_span(impl, terms: LinearTerms, y0, t1, repeats=3):
    best = math.inf
    for _ in range(repeats):
        y = y0.copy()
        k = np.empty((7, len(y)), dtype=complex)
        ytmp = np.empty_like(y)
        ynew = np.empty_like(y)
        t0 = time.perf_counter()
        impl.rk45_span(terms.kinds, terms.pars, terms._data, terms._indices,
                       terms._indptr, 0.0, t1, 1e-3, 1e-8, 1e-10, math.inf,
                       y, k, ytmp, ynew, False)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    impls = [("python", _kernels_py)]
    if compiled is not None:
        impls.append(("compiled", compiled))
    else:
        print("compiled extension not available; showing fallback only")

    print("== reduced symmetric-block generator, N = 15, n_max = 45 ==")
    layout = ReducedLayout(15, 45)
    lmat = liouvillian_rwa(layout, 0.01, 0.02, 0.02)
    data, idx, ptr = _prep_csr(lmat)
    rng = np.random.default_rng(0)
    x = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    print(f"   dim = {layout.dim}, nnz = {lmat.nnz}")
    base = None
    for name, impl in impls:
        dt = bench_matvec(impl, data, idx, ptr, x)
        speed = "" if base is None else f"  ({base / dt:.2f}x)"
        base = base or dt
        print(f"   {name:>8}: matvec {dt * 1e3:8.3f} ms{speed}")

    terms = LinearTerms([(TermCoeff(COEFF_CONST, amp=1.0), lmat)])
    y0 = layout.to_vec(layout.new_state())
    base = None
    for name, impl in impls:
        dt = bench_span(impl, terms, y0, 40.0, repeats=2)
        speed = "" if base is None else f"  ({base / dt:.2f}x)"
        base = base or dt
        print(f"   {name:>8}: 40 s integration span {dt:8.3f} s{speed}")

    print("== laboratory-frame superoperator, N = 2, fast drive ==")
    p = PhysicalParams(omega_c=1.0, omega_d0=1.0, lambda0=2.0, Omega_m=2.0,
                       A=5e-4, N=2, gamma_c=0.0, gamma_d=0.0, n_max=6,
                       c_light=1.0)
    terms = LinearTerms(bf.hamiltonian_full_terms(p, superop=True))
    dim = terms.dim
    rho0 = np.zeros(dim, dtype=complex)
    rho0[0] = 1.0
    print(f"   superoperator dim = {dim}, {len(terms.terms)} drive terms")
    base = None
    for name, impl in impls:
        dt = bench_span(impl, terms, rho0, 200.0, repeats=2)
        speed = "" if base is None else f"  ({base / dt:.2f}x)"
        base = base or dt
        print(f"   {name:>8}: 200 s lab-frame span {dt:8.3f} s{speed}")


if __name__ == "__main__":
    main()

"""Diagnostics: photon statistics, Wigner function, entanglement, bursts.

Wigner convention: W is a function of the coherent amplitude alpha with
normalization integral W d(Re alpha) d(Im alpha) = 1, fixing the vacuum
peak at 2/pi. Values are built from the Fock-basis expansion with the
displaced-parity recurrences, which keep the Gaussian envelope inside every
intermediate (no overflow at large truncation).

Logarithmic negativity uses base-2 logarithm of the trace norm of the
partial transpose over the cavity. For the cavity | detector-ensemble cut
the transpose acts on the cavity factor only, so it respects both the
pseudospin blocks (with their multiplicities) and, for phase-symmetric
states, the n+m sub-blocks; both structures are exploited exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache as _lru_cache

import numpy as np

from ._liouvillian import ReducedStateView
from .errors import GridCoverageError, UndefinedFanoError
from .operators import BlockDensityMatrix

FANO_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# photon statistics
# ---------------------------------------------------------------------------

def reduced_cavity(state, n_levels: int | None = None) -> np.ndarray:
    """Cavity density matrix; for product states pass the cavity dimension."""
    if isinstance(state, (BlockDensityMatrix, ReducedStateView)):
        return state.reduced_cavity()
    rho = np.asarray(state)
    if n_levels is None:
        raise ValueError("n_levels required for product-space states")
    other = rho.shape[0] // n_levels
    return rho.reshape(n_levels, other, n_levels, other).trace(axis1=1, axis2=3)


def photon_number(state, n_levels: int | None = None) -> float:
    """<a^dag a> from any representation (full, block, or cavity-reduced)."""
    if isinstance(state, BlockDensityMatrix):
        return state.photon_number()
    if isinstance(state, ReducedStateView):
        rho_c = state.reduced_cavity()
    else:
        rho_c = state if n_levels is None else reduced_cavity(state, n_levels)
    ns = np.arange(rho_c.shape[0])
    return float(np.real(np.sum(ns * np.diag(rho_c))))


def fano(state, n_levels: int | None = None) -> float:
    """(<n^2> - <n>^2)/<n>; undefined at vacuum level."""
    if isinstance(state, (BlockDensityMatrix, ReducedStateView)):
        rho_c = state.reduced_cavity()
    else:
        rho_c = state if n_levels is None else reduced_cavity(state, n_levels)
    pops = np.real(np.diag(rho_c))
    ns = np.arange(len(pops))
    mean = float(np.sum(ns * pops))
    if mean <= FANO_FLOOR:
        raise UndefinedFanoError(f"<n> = {mean:.3g} too close to vacuum")
    var = float(np.sum(ns ** 2 * pops)) - mean ** 2
    return var / mean


# ---------------------------------------------------------------------------
# Wigner function
# ---------------------------------------------------------------------------

@dataclass
class WignerGrid:
    re: np.ndarray
    im: np.ndarray
    values: np.ndarray          # shape (len(im), len(re)), real
    normalization: float


def wigner_at(rho_c: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """W evaluated at arbitrary complex points (shape preserved)."""
    alphas = np.asarray(alphas, dtype=complex)
    a = alphas.ravel()
    m_dim = rho_c.shape[0]
    diag_only = np.allclose(rho_c, np.diag(np.diag(rho_c)), atol=0.0)
    base = (2.0 / math.pi) * np.exp(-2.0 * np.abs(a) ** 2)
    if diag_only:
        # radial Laguerre recurrence against the diagonal populations:
        # u_k = e^{-2r^2} L_k(4 r^2), W = (2/pi) sum_k p_k (-1)^k u_k
        pops = np.real(np.diag(rho_c))
        xarg = 4.0 * np.abs(a) ** 2
        u_prev = np.exp(-2.0 * np.abs(a) ** 2)
        w = pops[0] * u_prev
        if m_dim > 1:
            u = (1.0 - xarg) * u_prev
            w = w + pops[1] * (-1.0) * u
            for k in range(2, m_dim):
                u_next = ((2 * k - 1 - xarg) * u - (k - 1) * u_prev) / k
                u_prev, u = u, u_next
                w = w + pops[k] * ((-1.0) ** k) * u
        out = (2.0 / math.pi) * w
        return out.reshape(alphas.shape)
    # general state: per-diagonal Laguerre recurrences,
    # W_{|n+d><n|} = (2/pi) e^{-2r^2} (-1)^n sqrt(n!/(n+d)!) (2 conj a)^d L_n^d(4r^2)
    herm_defect = np.max(np.abs(rho_c - rho_c.conj().T))
    if herm_defect > 1e-9:
        raise ValueError("Wigner transform expects a Hermitian state")
    x = 4.0 * np.abs(a) ** 2
    env = np.exp(-2.0 * np.abs(a) ** 2)
    w = np.zeros(a.size)
    pw = np.ones(a.size, dtype=complex)       # (2 conj a)^d
    pref = np.ones(m_dim)                     # sqrt(n!/(n+d)!) over n
    for d in range(m_dim):
        if d > 0:
            pw = pw * (2.0 * np.conj(a))
            ns_up = np.arange(m_dim) + d
            pref = pref / np.sqrt(ns_up)
        u_prev = env
        u = None
        sign = 1.0
        for n in range(m_dim - d):
            if n == 0:
                u_n = u_prev
            elif n == 1:
                u = (1.0 + d - x) * env
                u_n = u
            else:
                u_next = ((2 * n - 1 + d - x) * u - (n - 1 + d) * u_prev) / n
                u_prev, u = u, u_next
                u_n = u
            coef = rho_c[n + d, n] * pref[n] * sign
            if d == 0:
                w = w + np.real(coef) * u_n
            else:
                w = w + 2.0 * np.real(coef * pw) * u_n
            sign = -sign
    w = (2.0 / math.pi) * w
    if not np.all(np.isfinite(w)):
        raise GridCoverageError("Wigner evaluation overflowed; shrink the grid "
                                "extent or the truncation")
    return np.asarray(w).reshape(alphas.shape)


def wigner(rho_c: np.ndarray, extent: float = 6.0, points: int = 101,
           check_coverage: bool = True) -> WignerGrid:
    """W on a square grid [-extent, extent]^2 of the alpha plane."""
    re = np.linspace(-extent, extent, points)
    im = np.linspace(-extent, extent, points)
    aa = re[None, :] + 1j * im[:, None]
    vals = wigner_at(rho_c, aa)
    d = re[1] - re[0]
    norm = float(np.sum(vals) * d * d)
    if check_coverage and abs(norm - 1.0) > 1e-3:
        raise GridCoverageError(
            f"discrete Wigner normalization {norm:.6f}; enlarge the grid"
        )
    return WignerGrid(re=re, im=im, values=np.real(vals), normalization=norm)


def wigner_radial_profile(rho_c: np.ndarray, r_max: float, n_r: int = 200,
                          n_theta: int = 16):
    """Angle-averaged W(r) (plus max angular spread) for ring diagnostics."""
    rs = np.linspace(0.0, r_max, n_r)
    thetas = np.linspace(0.0, 2 * math.pi, n_theta, endpoint=False)
    alphas = rs[:, None] * np.exp(1j * thetas)[None, :]
    vals = wigner_at(rho_c, alphas)
    return rs, vals.mean(axis=1), np.abs(vals - vals.mean(axis=1, keepdims=True)).max()


# ---------------------------------------------------------------------------
# logarithmic negativity
# ---------------------------------------------------------------------------

def _trace_norm_pt_block(block: np.ndarray, n_levels: int, s_dim: int) -> float:
    """Trace norm of the cavity partial transpose of one j-block."""
    b4 = block.reshape(n_levels, s_dim, n_levels, s_dim)
    pt = np.ascontiguousarray(b4.transpose(2, 1, 0, 3)).reshape(block.shape)
    pt = 0.5 * (pt + pt.conj().T)
    return float(np.sum(np.abs(np.linalg.eigvalsh(pt))))


@_lru_cache(maxsize=32)
def _charge_groups(n_levels: int, s_dim: int):
    """Flat index groups of equal n-k (validity) and the n+k gather maps."""
    ns = np.repeat(np.arange(n_levels), s_dim)
    ks = np.tile(np.arange(s_dim), n_levels)
    q = ns - ks
    q_groups = [np.flatnonzero(q == qq)
                for qq in range(-(s_dim - 1), n_levels)]
    pt_maps = []
    for p in range(0, n_levels - 1 + s_dim):
        kk = np.arange(max(0, p - n_levels + 1), min(s_dim - 1, p) + 1)
        if len(kk) == 0:
            continue
        rows = (p - kk[None, :]) * s_dim + kk[:, None]
        cols = (p - kk[:, None]) * s_dim + kk[None, :]
        pt_maps.append((rows, cols))
    return q_groups, pt_maps


def _trace_norm_pt_block_symmetric(block, n_levels, s_dim, rtol=1e-10):
    """Same, exploiting the n+k sub-block structure of the transposed state.

    Valid when the input is phase-charge diagonal (checked; falls back to
    the dense path otherwise).
    """
    q_groups, pt_maps = _charge_groups(n_levels, s_dim)
    total = float(np.sum(np.abs(block) ** 2))
    kept = sum(float(np.sum(np.abs(block[np.ix_(g, g)]) ** 2))
               for g in q_groups)
    if math.sqrt(max(total - kept, 0.0)) > rtol * max(math.sqrt(total), 1e-300):
        return _trace_norm_pt_block(block, n_levels, s_dim)
    tnorm = 0.0
    for rows, cols in pt_maps:
        mat = block[rows, cols]
        mat = 0.5 * (mat + mat.conj().T)
        tnorm += float(np.sum(np.abs(np.linalg.eigvalsh(mat))))
    return tnorm


def log_negativity(state, n_levels: int | None = None,
                   use_symmetry: bool = True) -> float:
    """E_N = log2 || rho^{T_cavity} ||_1 for the cavity | ensemble cut.

    Accepts a BlockDensityMatrix (multiplicity-exact), a reduced-layout
    state view, or a dense product-space matrix with ``n_levels`` cavity
    levels.
    """
    if isinstance(state, ReducedStateView):
        return max(math.log2(max(state.pt_trace_norm(), 1e-300)), 0.0)
    if isinstance(state, BlockDensityMatrix):
        nc = state.n_max + 1
        tnorm = 0.0
        for j, w, b in zip(state.js, state.weights, state.blocks):
            s = int(round(2 * j)) + 1
            if use_symmetry:
                tnorm += w * _trace_norm_pt_block_symmetric(b, nc, s)
            else:
                tnorm += w * _trace_norm_pt_block(b, nc, s)
        return max(math.log2(max(tnorm, 1e-300)), 0.0)
    rho = np.asarray(state)
    if n_levels is None:
        raise ValueError("n_levels required for product-space states")
    other = rho.shape[0] // n_levels
    return max(math.log2(max(
        _trace_norm_pt_block(rho, n_levels, other), 1e-300)), 0.0)


# ---------------------------------------------------------------------------
# burst extraction and scaling fits
# ---------------------------------------------------------------------------

@dataclass
class BurstSummary:
    steady_value: float
    conclusive: bool
    peak_value: float | None = None
    t_d: float | None = None
    alpha_fit: float | None = None

    def as_dict(self) -> dict:
        return {
            "steady_value": self.steady_value,
            "conclusive": self.conclusive,
            "peak_value": self.peak_value,
            "t_d": self.t_d,
            "alpha_fit": self.alpha_fit,
        }


def burst_summary(t, n, steady_window: float = 0.1, steady_var_tol: float = 0.01,
                  prominence: float = 1e-6) -> BurstSummary:
    """Locate the first photon burst and the long-time plateau.

    Steady value is the mean over the final ``steady_window`` fraction; the
    run is conclusive only if that window varies by under ``steady_var_tol``
    relative. The first discrete local maximum whose rise above the
    preceding minimum exceeds ``prominence`` of the global maximum is
    refined by a local quadratic fit; monotone saturating trajectories
    report no peak.
    """
    t = np.asarray(t, dtype=float)
    n = np.asarray(n, dtype=float)
    if len(t) < 5:
        raise ValueError("trajectory too short")
    i0 = int(len(t) * (1.0 - steady_window))
    window = n[i0:]
    steady = float(window.mean())
    spread = float(window.max() - window.min())
    conclusive = spread <= steady_var_tol * max(abs(steady), 1e-300)

    floor = prominence * max(n.max(), 1e-300)
    peak_value = None
    t_d = None
    run_min = n[0]
    for i in range(1, len(n) - 1):
        run_min = min(run_min, n[i - 1])
        if n[i] >= n[i - 1] and n[i] > n[i + 1] and (n[i] - run_min) > floor:
            # quadratic refinement through the three bracketing samples
            y0, y1, y2 = n[i - 1], n[i], n[i + 1]
            denom = (y0 - 2 * y1 + y2)
            if denom < 0.0:
                delta = 0.5 * (y0 - y2) / denom
                delta = float(np.clip(delta, -1.0, 1.0))
            else:
                delta = 0.0
            dt_l = t[i] - t[i - 1]
            dt_r = t[i + 1] - t[i]
            step = dt_r if delta > 0 else dt_l
            t_d = float(t[i] + delta * step)
            peak_value = float(y1 - 0.25 * (y0 - y2) * delta)
            break
    if peak_value is not None and peak_value <= steady * (1.0 + prominence):
        peak_value, t_d = None, None
    return BurstSummary(steady_value=steady, conclusive=conclusive,
                        peak_value=peak_value, t_d=t_d)


@dataclass
class FitResult:
    slope: float
    intercept: float
    stderr: float
    r_squared: float


def scaling_fit(x, y, kind: str = "power") -> FitResult:
    """Least-squares scaling law: 'power' fits log y vs log x (slope is the
    exponent), 'linear' fits y vs x; both need >= 5 points over a decade."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 5:
        raise ValueError("need at least 5 sweep points")
    if x.max() < 10.0 * x.min():
        raise ValueError("sweep must span at least one decade")
    if kind == "power":
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValueError("power-law fit needs positive data")
        xv, yv = np.log(x), np.log(y)
    elif kind == "linear":
        xv, yv = x, y
    else:
        raise ValueError("kind must be 'power' or 'linear'")
    a = np.vstack([xv, np.ones_like(xv)]).T
    coef, res, _, _ = np.linalg.lstsq(a, yv, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    yhat = a @ coef
    ss_res = float(np.sum((yv - yhat) ** 2))
    ss_tot = float(np.sum((yv - yv.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = len(xv) - 2
    if dof > 0 and ss_res > 0:
        sxx = float(np.sum((xv - xv.mean()) ** 2))
        stderr = math.sqrt(ss_res / dof / sxx)
    else:
        stderr = 0.0
    return FitResult(slope=slope, intercept=intercept, stderr=stderr,
                     r_squared=r2)

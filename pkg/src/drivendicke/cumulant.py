"""Five-moment description of the damped pair-creation dynamics.

State variables: n = <a^dag a>, x = <a sigma_1^->, s = <sigma_1^+ sigma_2^->,
z = <sigma_1^z>; <a^dag sigma_1^+> is conj(x) and is not stored. Closing the
hierarchy at vanishing fourth cumulants keeps products of second moments in
the equations; the coarser third-cumulant closure drops them and admits a
closed-form steady state.

The implemented right-hand side is the master-equation-consistent one,

    dn/dt = -gamma_c n + i N lam (x - conj x)
    dx/dt = -(gamma_c+gamma_d)/2 x - i lam [(N-1)s - n z - 2|x|^2 + (1-z)/2]
    ds/dt = -gamma_d s + i lam (conj x - x)(z + 2 s)
    dz/dt = -gamma_d (z+1) + 2 i lam (x - conj x),

whose stationary point reproduces the closed-form steady state below exactly
(the |x|^2 and 2s terms appear only under the fourth-cumulant closure).
Starting from vacuum (x) ground, x stays purely imaginary and photon
production is positive. Rates of this model span eight orders of magnitude
at realistic parameters, so integration uses LSODA with the analytic
Jacobian rather than an explicit scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DegenerateDenominatorError,
    DivergenceError,
    NonConvergenceError,
)

CLOSURE_THIRD = "third"
CLOSURE_FOURTH = "fourth"
DIVERGENCE_FACTOR = 1e12


@dataclass(frozen=True)
class MomentParams:
    N: float
    lam: float
    gamma_c: float
    gamma_d: float

    @property
    def n_crit(self) -> float:
        if self.lam == 0.0:
            return math.inf
        return self.gamma_c * self.gamma_d / (4.0 * self.lam ** 2)


@dataclass(frozen=True)
class MomentState:
    """n >= 0, z in [-1, 1], |s| <= 1; x complex (purely imaginary for the
    canonical vacuum (x) ground initial data)."""

    n: float = 0.0
    x: complex = 0.0 + 0.0j
    s: float = 0.0
    z: float = -1.0

    def as_vector(self) -> np.ndarray:
        return np.array([self.n, self.x.real, self.x.imag, self.s, self.z])

    @classmethod
    def from_vector(cls, y) -> "MomentState":
        return cls(n=float(y[0]), x=complex(y[1], y[2]), s=float(y[3]),
                   z=float(y[4]))

    def check_ranges(self, tol=1e-9):
        if self.n < -tol:
            raise ValueError(f"negative photon number {self.n}")
        if not -1 - tol <= self.z <= 1 + tol:
            raise ValueError(f"inversion out of range {self.z}")
        if abs(self.s) > 1 + tol:
            raise ValueError(f"cross correlation out of range {self.s}")


def _closure_flag(closure: str) -> float:
    if closure == CLOSURE_FOURTH:
        return 1.0
    if closure == CLOSURE_THIRD:
        return 0.0
    raise ValueError(f"closure must be '{CLOSURE_THIRD}' or '{CLOSURE_FOURTH}'")


def moment_rhs(m: MomentState, p: MomentParams, closure: str = CLOSURE_FOURTH
               ) -> MomentState:
    """Time derivative of the moment state under the chosen closure."""
    y = _rhs(0.0, m.as_vector(), p.N, p.lam, p.gamma_c, p.gamma_d,
             _closure_flag(closure))
    return MomentState.from_vector(y)


def _rhs(t, y, N, lam, gc, gd, c4):
    n, xr, xi, s, z = y
    half = 0.5 * (gc + gd)
    q = (N - 1.0) * s - n * z - 2.0 * c4 * (xr * xr + xi * xi) + 0.5 * (1.0 - z)
    return np.array([
        -gc * n - 2.0 * N * lam * xi,
        -half * xr,
        -half * xi - lam * q,
        -gd * s + 2.0 * lam * xi * (z + 2.0 * c4 * s),
        -gd * (z + 1.0) - 4.0 * lam * xi,
    ])


# Intensive form used for integration: u = n/N, v = x/sqrt(N), g = sqrt(N) lam.
# Keeps every variable O(1)-bounded for N up to ~1e21 so a flat absolute
# tolerance makes sense, while the spontaneous seed term (1-z)/(2N) stays
# resolved relative to u.

def _rhs_scaled(t, y, N, g, gc, gd, c4):
    u, vr, vi, s, z = y
    half = 0.5 * (gc + gd)
    q = ((1.0 - 1.0 / N) * s - u * z - 2.0 * c4 * (vr * vr + vi * vi)
         + 0.5 * (1.0 - z) / N)
    return np.array([
        -gc * u - 2.0 * g * vi,
        -half * vr,
        -half * vi - g * q,
        -gd * s + 2.0 * g * vi * (z + 2.0 * c4 * s),
        -gd * (z + 1.0) - 4.0 * g * vi,
    ])


def _jac_scaled(t, y, N, g, gc, gd, c4):
    u, vr, vi, s, z = y
    half = 0.5 * (gc + gd)
    return np.array([
        [-gc, 0.0, -2.0 * g, 0.0, 0.0],
        [0.0, -half, 0.0, 0.0, 0.0],
        [g * z, 4.0 * c4 * g * vr, -half + 4.0 * c4 * g * vi,
         -g * (1.0 - 1.0 / N), g * (u + 0.5 / N)],
        [0.0, 0.0, 2.0 * g * (z + 2.0 * c4 * s), -gd + 4.0 * c4 * g * vi,
         2.0 * g * vi],
        [0.0, 0.0, -4.0 * g, 0.0, -gd],
    ])


@dataclass
class MomentTrajectory:
    t: np.ndarray
    states: list
    diverged: bool = False

    @property
    def n(self) -> np.ndarray:
        return np.array([m.n for m in self.states])

    @property
    def z(self) -> np.ndarray:
        return np.array([m.z for m in self.states])

    @property
    def s(self) -> np.ndarray:
        return np.array([m.s for m in self.states])

    @property
    def x(self) -> np.ndarray:
        return np.array([m.x for m in self.states])


def integrate_moments(m0: MomentState, p: MomentParams, closure: str,
                      t_grid, rtol=1e-10, atol=1e-30, dense=False):
    """Integrate the moment system on ``t_grid``.

    Internally the intensive variables (n/N, x/sqrt(N), s, z) are
    integrated, so the default flat ``atol`` works across the full N range
    of the sweeps. Blow-up beyond DIVERGENCE_FACTOR * N photons raises
    DivergenceError (only the third closure above threshold can run away).
    With ``dense`` a callable interpolant rides along as ``traj.solution``,
    returning raw-unit vectors (burst-peak refinement uses it).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    c4 = _closure_flag(closure)
    root_n = math.sqrt(p.N)
    g = root_n * p.lam
    scale = np.array([p.N, root_n, root_n, 1.0, 1.0])
    y0 = m0.as_vector() / scale

    def blow_up(t, y, *args):
        return y[0] - DIVERGENCE_FACTOR

    blow_up.terminal = True
    sol = solve_ivp(
        _rhs_scaled, (t_grid[0], t_grid[-1]), y0, method="LSODA",
        t_eval=t_grid, rtol=rtol, atol=atol, jac=_jac_scaled,
        args=(p.N, g, p.gamma_c, p.gamma_d, c4),
        events=blow_up, dense_output=dense,
    )
    if sol.status == 1:
        raise DivergenceError(
            f"photon number exceeded {DIVERGENCE_FACTOR * p.N:.3g} at "
            f"t = {sol.t_events[0][0]:.6g}"
        )
    if not sol.success:
        raise RuntimeError(f"moment integration failed: {sol.message}")
    ys = sol.y * scale[:, None]
    states = [MomentState.from_vector(ys[:, i]) for i in range(ys.shape[1])]
    traj = MomentTrajectory(t=t_grid, states=states)
    if dense:
        traj.solution = lambda tt: sol.sol(tt) * (
            scale[:, None] if np.ndim(tt) else scale)
    return traj


def integrate_to_steady(p: MomentParams, closure: str,
                        m0: MomentState | None = None, rel_tol=1e-9,
                        t0=None, max_doublings=60):
    """March in doubling windows until n stops changing (relative rel_tol)."""
    m = m0 if m0 is not None else MomentState()
    slow = max(p.gamma_d, p.gamma_c * 1e-12, 1e-300)
    t_win = t0 if t0 is not None else 1.0 / slow
    prev = None
    for _ in range(max_doublings):
        traj = integrate_moments(m, p, closure, np.array([0.0, t_win, 2 * t_win]))
        m = traj.states[-1]
        rhs_now = moment_rhs(m, p, closure)
        scale = max(abs(m.n), 1e-300)
        settled = (abs(rhs_now.n) * t_win < rel_tol * scale
                   and prev is not None
                   and abs(m.n - prev) < rel_tol * scale)
        if settled:
            return m
        prev = m.n
        t_win *= 2.0
    raise NonConvergenceError("steady state not reached within doubling cap")


# ---------------------------------------------------------------------------
# steady states
# ---------------------------------------------------------------------------

def steady_state_third(N: float, gamma_c: float, gamma_d: float,
                       n_crit: float) -> float:
    """Closed-form long-time photon number of the third-cumulant closure.

    Algebraically this is

        n = N gd [(N - n_crit)(gc+gd) - 2 gc + sqrt(((N - n_crit)(gc+gd))^2
            + 4 gc ((N + n_crit)(gc+gd) - gc))] / (4 gc [N(gc+gd) - gc]),

    evaluated here through the equivalent quadratic P u^2 - K u - 2 = 0 in
    u = 2 gc n / (N gd), with P = (N(gc+gd) - gc)/gc and
    K = ((N - n_crit)(gc+gd) - 2 gc)/gc. The conjugate branch
    u = 4 / (sqrt(K^2 + 8P) - K) for K < 0 avoids the catastrophic
    cancellation the direct expression suffers deep below threshold (where
    8P/K^2 drops under double precision).
    """
    gsum = gamma_c + gamma_d
    den = N * gsum - gamma_c
    if den == 0.0 or gamma_c == 0.0:
        raise DegenerateDenominatorError("N (gamma_c+gamma_d) equals gamma_c")
    p_coef = den / gamma_c
    k_coef = ((N - n_crit) * gsum - 2.0 * gamma_c) / gamma_c
    root = math.sqrt(k_coef * k_coef + 8.0 * p_coef)
    if k_coef >= 0.0:
        u = (k_coef + root) / (2.0 * p_coef)
    else:
        u = 4.0 / (root - k_coef)
    return u * N * gamma_d / (2.0 * gamma_c)


def _stationary_from_v(v, p: MomentParams, c4: float):
    """(n, s, z) stationary values as functions of v = Im x."""
    n = -2.0 * p.N * p.lam * v / p.gamma_c
    z = -1.0 - 4.0 * p.lam * v / p.gamma_d
    s_den = p.gamma_d - 4.0 * c4 * p.lam * v
    s = 2.0 * p.lam * v * z / s_den
    return n, s, z


def steady_state_fourth(p: MomentParams, damping=0.5, max_iter=200,
                        tol=1e-12) -> float:
    """Long-time photon number of the fourth-cumulant closure.

    The stationary system reduces to one scalar equation in v = Im x after
    eliminating (n, s, z); solved by damped Newton seeded from the
    third-closure closed form. Residual is scaled by the largest stationary
    term so convergence is relative.
    """
    if p.lam == 0.0:
        return 0.0
    if p.gamma_c == 0.0 or p.gamma_d == 0.0:
        raise DegenerateDenominatorError("fourth-closure steady state needs "
                                         "both damping rates positive")
    c4 = 1.0
    n3 = steady_state_third(p.N, p.gamma_c, p.gamma_d, p.n_crit)
    v = -p.gamma_c * n3 / (2.0 * p.N * p.lam)

    def residual(v):
        n, s, z = _stationary_from_v(v, p, c4)
        q = (p.N - 1.0) * s - n * z - 2.0 * c4 * v * v + 0.5 * (1.0 - z)
        f = -0.5 * (p.gamma_c + p.gamma_d) * v - p.lam * q
        scale = max(abs(0.5 * (p.gamma_c + p.gamma_d) * v),
                    abs(p.lam * (p.N - 1.0) * s), abs(p.lam * n * z),
                    abs(p.lam) * 0.5 * abs(1.0 - z), abs(p.lam) * 0.5, 1e-300)
        return f, scale

    f, scale = residual(v)
    stall_tol = 1e-10
    for _ in range(max_iter):
        if abs(f) <= tol * scale:
            n, _, _ = _stationary_from_v(v, p, c4)
            return n
        h = abs(v) * 1e-7 + 1e-30
        f_plus, _ = residual(v + h)
        dfdv = (f_plus - f) / h
        if dfdv == 0.0:
            raise NonConvergenceError("singular Newton derivative")
        step = -f / dfdv
        # damped update: halve until the residual actually decreases
        lam_damp = 1.0
        for _ in range(60):
            f_new, scale_new = residual(v + lam_damp * step)
            if abs(f_new) < abs(f):
                break
            lam_damp *= damping
        else:
            # stalled at the rounding floor; accept if already converged
            if abs(f) <= stall_tol * scale:
                n, _, _ = _stationary_from_v(v, p, c4)
                return n
            raise NonConvergenceError("Newton damping failed to reduce residual")
        v = v + lam_damp * step
        f, scale = f_new, scale_new
    raise NonConvergenceError("Newton did not converge within the iteration cap")


def steady_state_fourth_state(p: MomentParams) -> MomentState:
    """Full stationary MomentState of the fourth closure."""
    n = steady_state_fourth(p)
    v = -p.gamma_c * n / (2.0 * p.N * p.lam) if p.lam else 0.0
    n_, s, z = _stationary_from_v(v, p, 1.0) if p.lam else (0.0, 0.0, -1.0)
    return MomentState(n=n, x=complex(0.0, v), s=s, z=z)

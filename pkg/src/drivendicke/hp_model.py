"""Bosonic (large-pseudospin) limit: a two-mode parametric amplifier.

Mapping the collective spin to a boson turns the resonant interaction into
sqrt(N) lam (a^dag b^dag + ab): a nondegenerate amplifier producing
cavity-detector photon pairs from vacuum. With vacuum initial data the
Gaussian state is fully described by n_a = <a^dag a>, n_b = <b^dag b> and
w = <ab>, whose equations of motion are linear,

    dn_a/dt = -gamma_c n_a - 2 g Im w
    dn_b/dt = -gamma_d n_b - 2 g Im w
    dw/dt   = -(gamma_c+gamma_d)/2 w - i g (n_a + n_b + 1),    g = sqrt(N) lam.

Being affine with constant coefficients they propagate exactly through a
matrix exponential, so there is no integrator error to budget for. The
steady state diverges at the parametric instability 4 N lam^2 =
gamma_c gamma_d; the closed form below is only meaningful under threshold
and requesting it at/above raises ParametricInstabilityError (above
threshold the bosonic reduction itself has broken down).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ParametricInstabilityError


@dataclass(frozen=True)
class GaussianState:
    """Second moments of the zero-mean two-mode state."""

    n_a: float = 0.0
    n_b: float = 0.0
    w: complex = 0.0 + 0.0j

    def __post_init__(self):
        if self.n_a < -1e-12 or self.n_b < -1e-12:
            raise ValueError("negative occupation")
        bound = (self.n_a + 1.0) * (self.n_b + 1.0)
        if abs(self.w) ** 2 > bound * (1 + 1e-9):
            raise ValueError("pair correlation violates physicality bound")


@dataclass
class GaussianTrajectory:
    t: np.ndarray
    states: list
    above_threshold: bool

    @property
    def n_a(self) -> np.ndarray:
        return np.array([g.n_a for g in self.states])

    @property
    def n_b(self) -> np.ndarray:
        return np.array([g.n_b for g in self.states])


def threshold_ratio(N: float, lam: float, gamma_c: float, gamma_d: float) -> float:
    """4 N lam^2 / (gamma_c gamma_d); instability at ratio >= 1."""
    den = gamma_c * gamma_d
    if den == 0.0:
        return math.inf if N * lam != 0.0 else 0.0
    return 4.0 * N * lam * lam / den


def hp_steady_state(N: float, lam: float, gamma_c: float, gamma_d: float) -> float:
    """Long-time cavity photon number 4 gamma_d N lam^2 /
    [(gamma_c+gamma_d)(gamma_c gamma_d - 4 N lam^2)], below threshold only."""
    if lam == 0.0:
        return 0.0
    four_nl2 = 4.0 * N * lam * lam
    if four_nl2 >= gamma_c * gamma_d:
        raise ParametricInstabilityError(
            f"4 N lam^2 = {four_nl2:.6g} >= gamma_c gamma_d = "
            f"{gamma_c * gamma_d:.6g}: bosonic approximation unstable"
        )
    return gamma_d * four_nl2 / ((gamma_c + gamma_d)
                                 * (gamma_c * gamma_d - four_nl2))


def hp_dynamics(g0: GaussianState, N: float, lam: float, gamma_c: float,
                gamma_d: float, t_grid) -> GaussianTrajectory:
    """Exact propagation of (n_a, n_b, Re w, Im w) on ``t_grid``.

    Above threshold the exponential growth is reported through the
    ``above_threshold`` flag, not raised: the trajectory itself stays
    well defined.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    g = math.sqrt(N) * lam
    half = 0.5 * (gamma_c + gamma_d)
    # augmented generator on (n_a, n_b, Re w, Im w, 1)
    m = np.array([
        [-gamma_c, 0.0, 0.0, -2.0 * g, 0.0],
        [0.0, -gamma_d, 0.0, -2.0 * g, 0.0],
        [0.0, 0.0, -half, 0.0, 0.0],
        [-g, -g, 0.0, -half, -g],
        [0.0, 0.0, 0.0, 0.0, 0.0],
    ])
    y = np.array([g0.n_a, g0.n_b, g0.w.real, g0.w.imag, 1.0])
    states = []
    uniform = len(t_grid) > 2 and np.allclose(np.diff(t_grid),
                                              t_grid[1] - t_grid[0],
                                              rtol=1e-12, atol=0.0)
    t_prev = t_grid[0]
    if t_prev != 0.0:
        y = expm(m * t_prev) @ np.array([g0.n_a, g0.n_b, g0.w.real,
                                         g0.w.imag, 1.0])
    step_prop = expm(m * (t_grid[1] - t_grid[0])) if uniform and len(t_grid) > 1 else None
    for i, t in enumerate(t_grid):
        if i > 0:
            prop = step_prop if step_prop is not None else expm(m * (t - t_prev))
            y = prop @ y
            t_prev = t
        states.append(GaussianState(n_a=max(y[0], 0.0), n_b=max(y[1], 0.0),
                                    w=complex(y[2], y[3])))
    return GaussianTrajectory(t=t_grid, states=states,
                              above_threshold=threshold_ratio(
                                  N, lam, gamma_c, gamma_d) >= 1.0)


def hp_convergence_time(N, lam, gamma_c, gamma_d, folds=20.0) -> float:
    """Heuristic time to reach the steady state within ~e^-folds."""
    gap = gamma_c * gamma_d - 4.0 * N * lam * lam
    if gap <= 0.0:
        raise ParametricInstabilityError("no steady state at/above threshold")
    return folds / gap * (gamma_c + gamma_d) / 2.0

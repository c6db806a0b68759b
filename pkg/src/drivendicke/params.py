"""Physical inputs and derived coupling coefficients.

All rates and frequencies are angular (rad/s); amplitudes in metres.
Quoted experimental "Hz" values for damping rates and couplings are treated
as rad/s throughout -- the critical detector number N_crit is a ratio of
rates and is unaffected by that convention.

The slow-motion average and second-harmonic coefficients of the reciprocal
Lorentz factor sqrt(1 - xi^2 sin^2(Omega_m t)) are evaluated from their
binomial double series, truncated when the last included term drops below
``tol`` relative to the running sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.constants import c as C_LIGHT
from scipy.constants import hbar as HBAR
from scipy.constants import k as K_B
from scipy.special import j0, j1

from .errors import CriticalNumberUndefinedError, SubluminalViolationError

_MAX_SERIES_TERMS = 2_000_000
_CONSISTENCY_RTOL = 1e-12


@dataclass(frozen=True)
class PhysicalParams:
    """Raw model inputs.

    Attributes
    ----------
    omega_c : float
        Cavity angular frequency (rad/s).
    omega_d0 : float
        Bare detector transition angular frequency in its rest frame (rad/s).
    lambda0 : float
        Bare detector-cavity coupling (rad/s).
    Omega_m : float
        Mechanical drive angular frequency (rad/s).
    A : float
        Oscillation amplitude (m).
    N : float
        Detector count. Kept as a real number: the moment solvers take
        N up to ~1e18, far beyond exact-integer bookkeeping needs. The
        Hilbert-space solvers require it to be an exact small integer.
    gamma_c, gamma_d : float
        Cavity / detector energy damping rates (rad/s).
    n_max : int
        Cavity Fock-space truncation (highest retained level).
    phases : tuple[float, ...] | None
        Per-detector oscillation phases (rad). None means all zero; nonzero
        phases are honoured only by the brute-force product-space solver.
    c_light : float
        Speed of light (m/s); overridable for model-unit test problems.
    Q_c, L : float | None
        Optional cavity quality factor and length; when given they must be
        consistent with gamma_c = omega_c/Q_c and omega_c = 2*pi*c/L.
    """

    omega_c: float
    omega_d0: float
    lambda0: float
    Omega_m: float
    A: float
    N: float = 1.0
    gamma_c: float = 0.0
    gamma_d: float = 0.0
    n_max: int = 4
    phases: tuple | None = None
    c_light: float = C_LIGHT
    Q_c: float | None = None
    L: float | None = None

    def __post_init__(self):
        if not (self.omega_c > 0 and self.omega_d0 > 0 and self.Omega_m > 0):
            raise ValueError("omega_c, omega_d0 and Omega_m must be positive")
        if self.gamma_c < 0 or self.gamma_d < 0:
            raise ValueError("damping rates must be non-negative")
        if self.A < 0:
            raise ValueError("oscillation amplitude must be non-negative")
        if self.N < 1:
            raise ValueError("detector count must be at least 1")
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if not self.xi < 1.0:
            raise SubluminalViolationError(
                f"Omega_m*A/c = {self.xi:.6g} >= 1: motion would be superluminal"
            )
        if self.phases is not None:
            object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
            if len(self.phases) != int(self.N):
                raise ValueError("phases must have length N")
        if self.Q_c is not None:
            expected = self.omega_c / self.Q_c
            if abs(self.gamma_c - expected) > _CONSISTENCY_RTOL * abs(expected):
                raise ValueError("gamma_c inconsistent with omega_c/Q_c")
        if self.L is not None:
            expected = 2.0 * math.pi * self.c_light / self.L
            if abs(self.omega_c - expected) > _CONSISTENCY_RTOL * abs(expected):
                raise ValueError("omega_c inconsistent with 2*pi*c/L")

    @property
    def xi(self) -> float:
        """Dimensionless peak velocity Omega_m*A/c."""
        return self.Omega_m * self.A / self.c_light

    def phase_of(self, i: int) -> float:
        """Oscillation phase of detector ``i`` (0-based); defaults to zero."""
        if self.phases is None:
            return 0.0
        return self.phases[i]


@dataclass(frozen=True)
class DerivedCouplings:
    """Coefficients of the resonant rotating-frame reduction.

    ``lambda_eff`` is the coupling of the effective pair-creation Hamiltonian
    lambda * (a^dag J^+ + a J^-); ``N_crit = gamma_c*gamma_d/(4 lambda^2)``
    separates the normal from the enhanced photon-production phase.
    """

    xi: float
    D0: float
    D2: float
    C1: float
    B: float
    omega_d: float
    lambda_eff: float
    N_crit: float = field(default=math.inf)
    N_crit_finite: bool = field(default=False)

    def require_n_crit(self) -> float:
        if not self.N_crit_finite:
            raise CriticalNumberUndefinedError(
                "N_crit is infinite: effective coupling is zero"
            )
        return self.N_crit

    def as_dict(self) -> dict:
        return {
            "xi": self.xi,
            "D0": self.D0,
            "D2": self.D2,
            "C1": self.C1,
            "B": self.B,
            "omega_d": self.omega_d,
            "lambda_eff": self.lambda_eff,
            "N_crit": self.N_crit if self.N_crit_finite else None,
            "N_crit_finite": self.N_crit_finite,
        }


def lorentz_factor_coefficients(xi: float, tol: float = 1e-12) -> tuple[float, float]:
    """Mean (D0) and second-harmonic (D2) coefficients of sqrt(1-xi^2 sin^2 u).

    Series terms are generated with the stable recurrence
    m_n = m_{n-1} (2n-1)/(2n) for m_n = binom(2n, n)/4^n, giving

        D0 = 1 - sum_{n>=1} m_n^2 xi^(2n) / (2n-1)
        D2 = 2 sum_{n>=1} m_n^2 (n/(n+1)) xi^(2n) / (2n-1)

    (no overflow for any n). Truncation: last included term smaller in
    magnitude than ``tol`` times the running sum, for both series.
    """
    if not 0.0 <= xi < 1.0:
        raise SubluminalViolationError(f"xi = {xi:.6g} outside [0, 1)")
    if not 0.0 < tol <= 1e-6:
        raise ValueError("tol must lie in (0, 1e-6]")
    if xi == 0.0:
        return 1.0, 0.0

    d0 = 1.0
    d2 = 0.0
    m = 1.0       # binom(2n, n) / 4^n
    xi_pow = 1.0  # xi^(2n)
    for n in range(1, _MAX_SERIES_TERMS + 1):
        m *= (2 * n - 1) / (2 * n)
        xi_pow *= xi * xi
        base = m * m * xi_pow / (2 * n - 1)
        t0 = -base
        t2 = 2.0 * base * n / (n + 1)
        d0 += t0
        d2 += t2
        if abs(t0) < tol * abs(d0) and t2 < tol * abs(d2):
            return d0, d2
    raise RuntimeError("Lorentz-factor series did not converge (xi too close to 1?)")


def derive_couplings(p: PhysicalParams, tol: float = 1e-12) -> DerivedCouplings:
    """Compute all rotating-frame coefficients from the physical inputs.

    Chain: xi -> (D0, D2) series -> C1 = 2 J1(omega_c*xi/Omega_m)
    -> B = omega_d0*D2/(2 Omega_m) -> renormalized omega_d = omega_d0*D0
    -> lambda = (lambda0*C1/2) [J0(B) - J1(B)] and
    N_crit = gamma_c*gamma_d/(4 lambda^2).
    """
    xi = p.xi
    if not xi < 1.0:
        raise SubluminalViolationError(f"xi = {xi:.6g} >= 1")
    d0, d2 = lorentz_factor_coefficients(xi, tol)
    c1 = 2.0 * j1(p.omega_c * xi / p.Omega_m)
    b = p.omega_d0 * d2 / (2.0 * p.Omega_m)
    omega_d = p.omega_d0 * d0
    lam = 0.5 * p.lambda0 * c1 * (j0(b) - j1(b))
    if lam != 0.0:
        n_crit = p.gamma_c * p.gamma_d / (4.0 * lam * lam)
        finite = True
    else:
        n_crit = math.inf
        finite = False
    return DerivedCouplings(
        xi=xi, D0=d0, D2=d2, C1=c1, B=b, omega_d=omega_d,
        lambda_eff=lam, N_crit=n_crit, N_crit_finite=finite,
    )


def critical_number(lambda_eff: float, gamma_c: float, gamma_d: float) -> float:
    """N_crit = gamma_c*gamma_d / (4 lambda^2)."""
    if lambda_eff == 0.0:
        raise CriticalNumberUndefinedError("lambda = 0 => N_crit infinite")
    return gamma_c * gamma_d / (4.0 * lambda_eff ** 2)


def unruh_temperature(a: float) -> float:
    """Thermal temperature (K) seen by a uniformly accelerating detector.

    T = hbar*a / (2*pi*c*k_B); vanishes at zero proper acceleration.
    """
    if a < 0:
        raise ValueError("proper acceleration must be non-negative")
    return HBAR * a / (2.0 * math.pi * C_LIGHT * K_B)

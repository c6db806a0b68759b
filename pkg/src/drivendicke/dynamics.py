"""Master-equation assembly and time evolution.

Three solvers share one adaptive RK 4(5) driver:

* ``full_td`` -- laboratory-frame time-dependent Hamiltonian on the small
  cavity (x) 2^N product space (N <= 4), drive sampled continuously;
* ``rwa_product`` -- resonant pair-creation Hamiltonian on the product
  space (brute-force oracle);
* ``rwa_block`` -- the same dynamics on permutation-symmetric blocks,
  optionally restricted to the phase-charge-diagonal sector (the canonical
  vacuum (x) all-ground runs live there), which is what makes N ~ 15-20
  with large photon numbers tractable.

Trace is monitored at every output point; population reaching the top
cavity level beyond 1e-6 aborts with TruncationError, photon-number
negativity beyond -1e-6 aborts with PositivityError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _bruteforce as bf
from ._integrate import COEFF_CONST, LinearTerms, TermCoeff, solve_rk45
from ._liouvillian import (
    FullBlockLayout,
    ReducedLayout,
    ReducedStateView,
    liouvillian_rwa,
    local_lowering_superop,
    make_layout,
    observable_row,
)
from .errors import PositivityError, TruncationError
from .operators import BlockDensityMatrix, build_dicke_ops, build_fock_ops, dicke_j_values
from .params import DerivedCouplings, PhysicalParams

TOP_POP_LIMIT = 1e-6
NEGATIVITY_LIMIT = -1e-6
TRACE_LIMIT = 1e-6

_BLOCK_OBS = ("n", "n2", "z", "s", "x", "trace", "top_pop")
_PRODUCT_OBS = _BLOCK_OBS + ("a", "aa", "a_jp")


@dataclass(frozen=True)
class LindbladSpec:
    """What to evolve: Hamiltonian flavour plus damping channels."""

    kind: str                      # "full_td" | "rwa_product" | "rwa_block"
    N: int
    n_max: int
    gamma_c: float
    gamma_d: float
    lambda_eff: float = 0.0
    physical: PhysicalParams | None = None
    transformed: bool = False      # co-rotating + raising dissipators variant
    resonance_satisfied: bool = True

    def __post_init__(self):
        if self.gamma_c < 0 or self.gamma_d < 0:
            raise ValueError("rates must be non-negative")
        if self.kind == "rwa_block" and self.transformed:
            raise ValueError("transformed variant implemented on the product space")
        if self.kind.startswith("rwa") and not self.resonance_satisfied:
            raise ValueError(
                "the resonant reduction is only valid with Omega_m = omega_c + omega_d"
            )

    @classmethod
    def rwa(cls, N, n_max, lambda_eff, gamma_c, gamma_d, *, product=False,
            transformed=False):
        return cls(kind="rwa_product" if product else "rwa_block",
                   N=int(N), n_max=n_max, gamma_c=gamma_c, gamma_d=gamma_d,
                   lambda_eff=lambda_eff, transformed=transformed)

    @classmethod
    def rwa_from_physical(cls, p: PhysicalParams, dc: DerivedCouplings, *,
                          product=False, resonance_rtol=1e-9):
        mismatch = abs(p.Omega_m - p.omega_c - dc.omega_d)
        if mismatch > resonance_rtol * p.Omega_m:
            raise ValueError(
                f"Omega_m off parametric resonance by {mismatch:.3g} rad/s"
            )
        return cls(kind="rwa_product" if product else "rwa_block",
                   N=int(p.N), n_max=p.n_max, gamma_c=p.gamma_c,
                   gamma_d=p.gamma_d, lambda_eff=dc.lambda_eff)

    @classmethod
    def full_td(cls, p: PhysicalParams):
        return cls(kind="full_td", N=int(p.N), n_max=p.n_max,
                   gamma_c=p.gamma_c, gamma_d=p.gamma_d, physical=p)


@dataclass
class TrajectoryRecord:
    """Observable time series plus optional tagged state snapshots."""

    t: np.ndarray
    data: dict
    snapshots: dict = field(default_factory=dict)   # index -> state object
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("time grid must be strictly increasing")

    def real(self, name) -> np.ndarray:
        return self.data[name].real

    @property
    def n(self) -> np.ndarray:
        return self.real("n")

    @property
    def fano(self) -> np.ndarray:
        """Photon Fano factor; NaN where the mean is at vacuum level."""
        n = self.real("n")
        n2 = self.real("n2")
        var = n2 - n * n
        with np.errstate(invalid="ignore", divide="ignore"):
            f = np.where(n > 1e-12, var / np.where(n > 1e-12, n, 1.0), np.nan)
        return f


# ---------------------------------------------------------------------------
# operator-level API
# ---------------------------------------------------------------------------

def hamiltonian_full(t: float, p: PhysicalParams) -> np.ndarray:
    """Laboratory-frame H(t)/hbar on the product space (Hermitian)."""
    return bf.hamiltonian_full_matrix(t, p)


def hamiltonian_rwa(lambda_eff: float, N: int, n_max: int) -> dict:
    """Resonant pair Hamiltonian per pseudospin block: {j: dense matrix}."""
    a, a_dag, _ = build_fock_ops(n_max)
    out = {}
    for j in dicke_j_values(N):
        jp, jm, _ = build_dicke_ops(j)
        out[j] = lambda_eff * (np.kron(a_dag, jp) + np.kron(a, jm))
    return out


class BlockSuperoperator:
    """Callable superoperator acting on BlockDensityMatrix objects."""

    def __init__(self, layout: FullBlockLayout, matrix):
        self.layout = layout
        self.matrix = matrix

    def __call__(self, bdm: BlockDensityMatrix) -> BlockDensityMatrix:
        vec = self.layout.to_vec(bdm)
        return self.layout.from_vec(self.matrix.dot(vec))


def local_dissipator_blocks(N: int, gamma_d: float, n_max: int) -> BlockSuperoperator:
    """gamma_d sum_i L[sigma_i^-] closed on the j-block structure."""
    layout = FullBlockLayout(N, n_max)
    return BlockSuperoperator(layout, local_lowering_superop(layout, gamma_d))


# ---------------------------------------------------------------------------
# evolution drivers
# ---------------------------------------------------------------------------

def _guard(observable_names):
    i_trace = observable_names.index("trace")
    i_top = observable_names.index("top_pop")
    i_n = observable_names.index("n")

    def on_eval(i, t, col):
        if col is None:
            return
        if abs(col[i_trace].real - 1.0) > TRACE_LIMIT:
            raise RuntimeError(
                f"trace drifted by {col[i_trace].real - 1.0:.3g} at t={t:.6g}; "
                "tighten integrator tolerances"
            )
        if col[i_top].real > TOP_POP_LIMIT:
            raise TruncationError(
                f"top Fock level population {col[i_top].real:.3g} at t={t:.6g}; "
                "increase n_max"
            )
        if col[i_n].real < NEGATIVITY_LIMIT:
            raise PositivityError(
                f"photon number {col[i_n].real:.3g} at t={t:.6g}; "
                "integrator tolerance too loose"
            )

    return on_eval


def _snapshot_indices(t_grid, snapshot_times):
    idx = []
    for ts in snapshot_times:
        idx.append(int(np.argmin(np.abs(np.asarray(t_grid) - ts))))
    return sorted(set(idx))


def evolve(spec: LindbladSpec, rho0, t_grid, *, rtol=1e-8, atol=1e-10,
           observables=None, snapshot_times=(), snapshot_stride=None,
           representation="auto", max_step=math.inf) -> TrajectoryRecord:
    """Integrate the master equation and sample observables on ``t_grid``.

    ``rho0 = None`` means the canonical cavity-vacuum, all-detectors-ground
    state. Block runs return BlockDensityMatrix snapshots, product runs
    dense matrices. ``snapshot_stride`` adds every stride-th grid point to
    the snapshot set (used for entanglement time series).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    snap_idx = _snapshot_indices(t_grid, snapshot_times)
    if snapshot_stride:
        snap_idx = sorted(set(snap_idx) | set(range(0, len(t_grid), snapshot_stride)))

    if spec.kind == "rwa_block":
        return _evolve_blocks(spec, rho0, t_grid, rtol, atol, snap_idx,
                              representation, max_step)
    if spec.kind in ("rwa_product", "full_td"):
        return _evolve_product(spec, rho0, t_grid, rtol, atol, snap_idx, max_step)
    raise ValueError(f"unknown spec kind '{spec.kind}'")


def _evolve_blocks(spec, rho0, t_grid, rtol, atol, snap_idx, representation,
                   max_step):
    if rho0 is None:
        rho0 = BlockDensityMatrix.vacuum_ground(spec.N, spec.n_max)
    if representation == "auto":
        probe = ReducedLayout(spec.N, spec.n_max)
        norm = math.sqrt(sum(float(np.sum(np.abs(b) ** 2)) for b in rho0.blocks))
        reduced = probe.off_sector_mass(rho0) <= 1e-12 * max(norm, 1e-300)
        layout = probe if reduced else FullBlockLayout(spec.N, spec.n_max)
    else:
        reduced = representation == "reduced"
        layout = make_layout(spec.N, spec.n_max, reduced)
        if reduced and layout.off_sector_mass(rho0) > 1e-9:
            raise ValueError("initial state not phase-charge diagonal")

    names = list(_BLOCK_OBS)
    if not reduced:
        names += ["a", "aa", "a_jp"]
    obs = [observable_row(layout, nm) for nm in names]
    from scipy.sparse import vstack

    result = solve_rk45(
        LinearTerms([(TermCoeff(COEFF_CONST, amp=1.0),
                      liouvillian_rwa(layout, spec.lambda_eff,
                                      spec.gamma_c, spec.gamma_d))]),
        layout.to_vec(rho0), t_grid, rtol=rtol, atol=atol,
        obs=vstack(obs), snapshot_idx=snap_idx, on_eval=_guard(names),
        max_step=max_step,
    )
    data = {nm: result.obs[i] for i, nm in enumerate(names)}
    if reduced:
        # structurally zero in the restricted sector
        for nm in ("a", "aa", "a_jp"):
            data[nm] = np.zeros(len(t_grid), dtype=complex)
        snapshots = {i: ReducedStateView(layout, v)
                     for i, v in result.snapshots.items()}
    else:
        snapshots = {i: layout.from_vec(v) for i, v in result.snapshots.items()}
    return TrajectoryRecord(
        t=t_grid, data=data, snapshots=snapshots,
        meta={"solver": "rwa_block", "representation":
              "reduced" if reduced else "full", "n_steps": result.n_steps,
              "n_rhs": result.n_rhs, "N": spec.N, "n_max": spec.n_max},
    )


def _evolve_product(spec, rho0, t_grid, rtol, atol, snap_idx, max_step):
    N, n_max = spec.N, spec.n_max
    dim = (n_max + 1) * 2 ** N
    if rho0 is None:
        rho0 = np.zeros((dim, dim), dtype=complex)
        if spec.transformed:
            # all detectors excited: TLS basis index with all bits set
            rho0[2 ** N - 1, 2 ** N - 1] = 1.0
        else:
            rho0[0, 0] = 1.0
    if rho0.shape != (dim, dim):
        raise ValueError("rho0 shape does not match N / n_max")

    if spec.kind == "rwa_product":
        terms = [(TermCoeff(COEFF_CONST, amp=1.0),
                  bf.rwa_liouvillian_product(N, n_max, spec.lambda_eff,
                                             spec.gamma_c, spec.gamma_d,
                                             spec.transformed))]
    else:
        p = spec.physical
        terms = bf.hamiltonian_full_terms(p, superop=True)
        if spec.gamma_c:
            ops = bf.product_ops(N, n_max)
            terms.append((TermCoeff(COEFF_CONST, amp=1.0),
                          bf.dissipator_superop(ops["a"], spec.gamma_c)))
        if spec.gamma_d:
            for i in range(1, N + 1):
                terms.append((TermCoeff(COEFF_CONST, amp=1.0),
                              bf.dissipator_superop(
                                  bf.lift_site_op(N, n_max, i, "m"),
                                  spec.gamma_d)))

    names = list(_PRODUCT_OBS)
    from scipy.sparse import vstack

    obs = vstack([bf.observable_row_product(N, n_max, nm) for nm in names])
    result = solve_rk45(LinearTerms(terms), rho0.reshape(-1), t_grid,
                        rtol=rtol, atol=atol, obs=obs, snapshot_idx=snap_idx,
                        on_eval=_guard(names), max_step=max_step)
    data = {nm: result.obs[i] for i, nm in enumerate(names)}
    snapshots = {i: v.reshape(dim, dim).copy() for i, v in result.snapshots.items()}
    return TrajectoryRecord(
        t=t_grid, data=data, snapshots=snapshots,
        meta={"solver": spec.kind, "n_steps": result.n_steps,
              "n_rhs": result.n_rhs, "N": N, "n_max": n_max},
    )

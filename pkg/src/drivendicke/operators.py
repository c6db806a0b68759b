"""Hilbert-space building blocks.

Covers the truncated cavity Fock operators, collective pseudospin ladder
operators, per-detector Pauli operators on the small product space used by
the brute-force solver, and the permutation-symmetric block representation
of the joint cavity (x) detector density matrix.

Block convention: the joint state of N exchange-symmetric detectors plus the
cavity decomposes as a direct sum over pseudospin sectors j with multiplicity
d_j; within each sector every degenerate copy carries an identical
(n_max+1)(2j+1)-dimensional block. Blocks here are stored *per copy*, so the
physical trace is sum_j d_j * tr(block_j). Basis ordering inside a block is
row-major cavity (x) spin with the spin index k = 0..2j ascending in
m = k - j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space


# ---------------------------------------------------------------------------
# elementary operators
# ---------------------------------------------------------------------------

def build_fock_ops(n_max: int):
    """Annihilation, creation and number operators on n_max+1 Fock levels."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    dim = n_max + 1
    a = np.zeros((dim, dim), dtype=complex)
    ns = np.arange(1, dim)
    a[ns - 1, ns] = np.sqrt(ns)
    a_dag = a.conj().T
    number_op = np.diag(np.arange(dim).astype(complex))
    return a, a_dag, number_op


def build_dicke_ops(j: float):
    """Collective ladder and inversion operators (J+, J-, Jz) for pseudospin j.

    Basis index k = 0..2j corresponds to m = k - j.
    """
    two_j = int(round(2 * j))
    if two_j < 0 or abs(2 * j - two_j) > 1e-12:
        raise ValueError("2j must be a non-negative integer")
    dim = two_j + 1
    m = np.arange(dim) - j
    jp = np.zeros((dim, dim), dtype=complex)
    if dim > 1:
        amp = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
        jp[np.arange(1, dim), np.arange(dim - 1)] = amp
    jm = jp.conj().T
    jz = np.diag(m.astype(complex))
    return jp, jm, jz


_SIGMA_P = np.array([[0, 0], [1, 0]], dtype=complex)   # |e><g| with basis (g, e)
_SIGMA_M = _SIGMA_P.conj().T
_SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)
_SIGMA_X = _SIGMA_P + _SIGMA_M

MAX_BRUTE_FORCE_N = 4


def build_pauli_ops(N: int, site: int):
    """(sigma^+_i, sigma^-_i, sigma^z_i) on the 2^N detector product space.

    ``site`` is 1-based. Restricted to N <= 4: this representation exists
    only to serve as the brute-force oracle.
    """
    if N > MAX_BRUTE_FORCE_N:
        raise ValueError(f"product-space operators limited to N <= {MAX_BRUTE_FORCE_N}")
    if not 1 <= site <= N:
        raise ValueError("site index out of range")
    ops = []
    for base in (_SIGMA_P, _SIGMA_M, _SIGMA_Z):
        mat = np.array([[1.0 + 0j]])
        for s in range(1, N + 1):
            mat = np.kron(mat, base if s == site else np.eye(2, dtype=complex))
        ops.append(mat)
    return tuple(ops)


def collective_spin_ops(N: int):
    """J+ = sum_i sigma^+_i etc. on the 2^N product space (oracle use)."""
    dim = 2 ** N
    jp = np.zeros((dim, dim), dtype=complex)
    jz = np.zeros((dim, dim), dtype=complex)
    for i in range(1, N + 1):
        sp, _, sz = build_pauli_ops(N, i)
        jp += sp
        jz += sz / 2.0
    return jp, jp.conj().T, jz


# ---------------------------------------------------------------------------
# pseudospin sector bookkeeping
# ---------------------------------------------------------------------------

def dicke_j_values(N: int) -> list:
    """Allowed pseudospin lengths N/2, N/2-1, ..., (N mod 2)/2, descending."""
    if N < 1:
        raise ValueError("N must be at least 1")
    js = []
    j = N / 2.0
    while j > -0.25:
        js.append(j)
        j -= 1.0
    return [j for j in js if j >= (N % 2) / 2.0 - 1e-9]


def degeneracy(N: int, j: float) -> float:
    """Multiplicity d_j = binom(N, N/2-j) (2j+1)/(N/2+j+1) of sector j."""
    k = N / 2.0 - j
    ki = int(round(k))
    if abs(k - ki) > 1e-9 or ki < 0:
        raise ValueError(f"invalid sector j={j} for N={N}")
    return math.comb(N, ki) * (2 * j + 1) / (N / 2.0 + j + 1)


# ---------------------------------------------------------------------------
# block density matrix
# ---------------------------------------------------------------------------

@dataclass
class BlockDensityMatrix:
    """Permutation-symmetric cavity (x) detector state in per-copy blocks."""

    N: int
    n_max: int
    js: tuple
    blocks: list          # complex arrays, one per j, dim (n_max+1)(2j+1)
    weights: tuple        # degeneracies d_j

    HERM_TOL = 1e-10
    TRACE_TOL = 1e-8
    PSD_TOL = -1e-8

    @classmethod
    def vacuum_ground(cls, N: int, n_max: int) -> "BlockDensityMatrix":
        """Cavity vacuum with every detector in its ground state."""
        js = tuple(dicke_j_values(N))
        blocks = []
        for j in js:
            dim = (n_max + 1) * (int(round(2 * j)) + 1)
            blocks.append(np.zeros((dim, dim), dtype=complex))
        # j = N/2 sector, n = 0, k = 0 (m = -j); d_{N/2} = 1
        blocks[0][0, 0] = 1.0
        weights = tuple(degeneracy(N, j) for j in js)
        return cls(N=N, n_max=n_max, js=js, blocks=blocks, weights=weights)

    def block_dim(self, idx: int) -> int:
        return (self.n_max + 1) * (int(round(2 * self.js[idx])) + 1)

    def trace(self) -> float:
        return float(sum(
            w * np.trace(b).real for w, b in zip(self.weights, self.blocks)
        ))

    def expect(self, cavity_op=None, spin_ops=None) -> complex:
        """<A_cav (x) B_spin(j)>; ``spin_ops`` maps each j to its matrix."""
        total = 0.0 + 0.0j
        nc = self.n_max + 1
        for j, w, b in zip(self.js, self.weights, self.blocks):
            s = int(round(2 * j)) + 1
            op_c = np.eye(nc, dtype=complex) if cavity_op is None else cavity_op
            op_s = np.eye(s, dtype=complex) if spin_ops is None else spin_ops(j)
            total += w * np.trace(np.kron(op_c, op_s) @ b)
        return total

    def photon_number(self) -> float:
        _, _, num = build_fock_ops(self.n_max)
        return self.expect(cavity_op=num).real

    def reduced_cavity(self) -> np.ndarray:
        """Trace out the detectors (multiplicity-weighted partial trace)."""
        nc = self.n_max + 1
        rho_c = np.zeros((nc, nc), dtype=complex)
        for j, w, b in zip(self.js, self.weights, self.blocks):
            s = int(round(2 * j)) + 1
            rho_c += w * b.reshape(nc, s, nc, s).trace(axis1=1, axis2=3)
        return rho_c

    def copy(self) -> "BlockDensityMatrix":
        return BlockDensityMatrix(
            N=self.N, n_max=self.n_max, js=self.js,
            blocks=[b.copy() for b in self.blocks], weights=self.weights,
        )

    def validate(self, herm_tol=None, trace_tol=None, psd_tol=None) -> None:
        """Raise if Hermiticity, unit trace or positivity is violated."""
        herm_tol = self.HERM_TOL if herm_tol is None else herm_tol
        trace_tol = self.TRACE_TOL if trace_tol is None else trace_tol
        psd_tol = self.PSD_TOL if psd_tol is None else psd_tol
        for j, b in zip(self.js, self.blocks):
            defect = np.max(np.abs(b - b.conj().T))
            if defect > herm_tol:
                raise ValueError(f"block j={j} not Hermitian (defect {defect:.3g})")
        tr = self.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace deviates from 1 by {tr - 1.0:.3g}")
        for j, b in zip(self.js, self.blocks):
            w = np.linalg.eigvalsh(0.5 * (b + b.conj().T))
            if w.min() < psd_tol:
                raise ValueError(f"block j={j} has eigenvalue {w.min():.3g}")


# ---------------------------------------------------------------------------
# product space <-> blocks (oracle bridge)
# ---------------------------------------------------------------------------

def _swap_matrix(N: int, i: int, k: int) -> np.ndarray:
    """Permutation operator exchanging detectors i and k (1-based) on 2^N."""
    dim = 2 ** N
    perm = np.zeros((dim, dim))
    for idx in range(dim):
        bits = [(idx >> (N - s)) & 1 for s in range(1, N + 1)]
        bits[i - 1], bits[k - 1] = bits[k - 1], bits[i - 1]
        jdx = 0
        for bit in bits:
            jdx = (jdx << 1) | bit
        perm[jdx, idx] = 1.0
    return perm


def symmetric_basis(N: int) -> dict:
    """Orthonormal |j, m, copy> basis of the 2^N detector space.

    Returns {j: array of shape (d_j, 2j+1, 2^N)} with rows U[alpha][k]
    the basis vector of sector copy alpha at m = k - j. Copies are built by
    repeated lowering from the highest-weight vectors, which keeps the copy
    labeling consistent across m (required for the block (x) identity
    structure of exchange-symmetric states).
    """
    if N > MAX_BRUTE_FORCE_N:
        raise ValueError(f"symmetric basis limited to N <= {MAX_BRUTE_FORCE_N}")
    jp, jm, jz = collective_spin_ops(N)
    dim = 2 ** N
    basis = {}
    for j in dicke_j_values(N):
        s = int(round(2 * j)) + 1
        d_j = int(round(degeneracy(N, j)))
        # highest-weight space: Jz eigenvalue j intersected with ker J+
        n_up = int(round(j + N / 2.0))
        sel = [idx for idx in range(dim) if bin(idx).count("1") == n_up]
        sub = np.zeros((dim, len(sel)))
        for col, idx in enumerate(sel):
            sub[idx, col] = 1.0
        ker = null_space(jp @ sub)        # coefficients within the m = j slice
        if ker.shape[1] != d_j:
            raise RuntimeError("highest-weight multiplicity mismatch")
        vecs = np.zeros((d_j, s, dim), dtype=complex)
        for alpha in range(d_j):
            v = sub @ ker[:, alpha]
            v = v / np.linalg.norm(v)
            vecs[alpha, s - 1] = v        # k = 2j  <->  m = +j
            for k in range(s - 2, -1, -1):
                v = jm @ vecs[alpha, k + 1]
                v = v / np.linalg.norm(v)
                vecs[alpha, k] = v
        basis[j] = vecs
    return basis


def check_permutation_symmetric(rho_full: np.ndarray, N: int, tol: float = 1e-9):
    """Raise unless swap conjugation leaves rho invariant within tol."""
    dim_tls = 2 ** N
    nc = rho_full.shape[0] // dim_tls
    for i in range(1, N):
        p = np.kron(np.eye(nc), _swap_matrix(N, i, i + 1))
        defect = np.max(np.abs(p @ rho_full @ p.T - rho_full))
        if defect > tol:
            raise ValueError(
                f"state not permutation symmetric (swap {i},{i+1} defect {defect:.3g})"
            )


def project_to_blocks(rho_full: np.ndarray, N: int, n_max: int,
                      check_tol: float = 1e-9) -> BlockDensityMatrix:
    """Map a permutation-symmetric product-space state to per-copy blocks.

    Exact for symmetric states: all permutation-invariant observables agree
    between the input and the block form. Copies are averaged, which also
    makes the map the symmetric-sector twirl for inputs within ``check_tol``
    of exact symmetry.
    """
    nc = n_max + 1
    if rho_full.shape != (nc * 2 ** N, nc * 2 ** N):
        raise ValueError("state shape does not match N / n_max")
    check_permutation_symmetric(rho_full, N, tol=check_tol)
    basis = symmetric_basis(N)
    rho4 = rho_full.reshape(nc, 2 ** N, nc, 2 ** N)
    js = tuple(dicke_j_values(N))
    blocks = []
    for j in js:
        vecs = basis[j]                    # (d_j, s, 2^N)
        d_j, s, _ = vecs.shape
        # <n, (j,k,a)| rho |p, (j,l,a)> averaged over copies a
        proj = np.einsum("ake,nepf,alf->nkpl", vecs.conj(), rho4, vecs) / d_j
        blocks.append(np.ascontiguousarray(proj.reshape(nc * s, nc * s)))
    weights = tuple(degeneracy(N, j) for j in js)
    bdm = BlockDensityMatrix(N=N, n_max=n_max, js=js, blocks=blocks, weights=weights)
    return bdm


def blocks_to_full(bdm: BlockDensityMatrix) -> np.ndarray:
    """Reconstruct the product-space state (test helper, N <= 4)."""
    basis = symmetric_basis(bdm.N)
    nc = bdm.n_max + 1
    dim = nc * 2 ** bdm.N
    rho = np.zeros((dim, dim), dtype=complex)
    for j, b in zip(bdm.js, bdm.blocks):
        vecs = basis[j]
        d_j, s, _ = vecs.shape
        b4 = b.reshape(nc, s, nc, s)
        for alpha in range(d_j):
            u = vecs[alpha]                # (s, 2^N)
            lift = np.einsum("nkml,ke,lf->nemf", b4, u, u.conj())
            rho += lift.reshape(dim, dim)
    return rho

"""Superoperators on the permutation-symmetric block representation.

Two vectorizations of the same dynamics:

* ``FullBlockLayout`` stores every element of every per-copy j-block
  (general initial states, used for small problems and cross-checks);
* ``ReducedLayout`` stores only elements with equal phase charge
  n - m on both indices. The master equation conserves that structure
  (the Hamiltonian commutes with a^dag a - J^z and every dissipator shifts
  both indices together), so states that start charge-diagonal -- the
  canonical vacuum (x) all-ground state in particular -- stay inside it.
  This shrinks the largest systems by one to two orders of magnitude.

The local lowering dissipator sum_i L[sigma_i^-] mixes pseudospin sectors.
Its m-diagonal transfer rates are taken from the permutational-invariance
method; off-diagonal (m != m') elements carry the geometric-mean amplitude
sqrt(g(m) g(m')), which is exact because sigma_i^- is a rank-1 spherical
tensor under collective rotations (the m-dependence of its symmetric-sector
matrix elements factorizes into Clebsch-Gordan amplitudes of fixed sign).
Rates are converted to the per-copy block convention via the multiplicity
ratio d_source/d_target on sector-changing transfers. The anticommutator
half of the dissipator is exactly -gamma_d/2 {N/2 + J^z, rho} because
sum_i sigma_i^+ sigma_i^- is collective.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from .operators import BlockDensityMatrix, degeneracy, dicke_j_values

_MAX_FULL_ELEMENTS = 4_000_000


def _ap(j, m):
    """<m+1|J+|m> amplitude, clipped at the ladder ends."""
    val = j * (j + 1) - m * (m + 1)
    return np.sqrt(np.maximum(val, 0.0))


def _g_same(N, j, m):
    if j == 0:
        return np.zeros_like(np.asarray(m, dtype=float))
    return (N / 2 + 1) * (j - m + 1) * (j + m) / (2 * j * (j + 1))


def _g_down(N, j, m):
    if j == 0:
        return np.zeros_like(np.asarray(m, dtype=float))
    return (j + m - 1) * (j + m) * (j + 1 + N / 2) / (2 * j * (2 * j + 1))


def _g_up(N, j, m):
    return (j - m + 1) * (j - m + 2) * (N / 2 - j) / (2 * (j + 1) * (2 * j + 1))


class _LayoutBase:
    """Shared bookkeeping for both vectorizations."""

    def __init__(self, N: int, n_max: int):
        self.N = N
        self.n_max = n_max
        self.js = tuple(dicke_j_values(N))
        self.S = tuple(int(round(2 * j)) + 1 for j in self.js)
        self.weights = tuple(degeneracy(N, j) for j in self.js)
        self.C = n_max + 1

    @property
    def n_blocks(self):
        return len(self.js)

    def new_state(self) -> BlockDensityMatrix:
        return BlockDensityMatrix.vacuum_ground(self.N, self.n_max)


class FullBlockLayout(_LayoutBase):
    """Every block element, row-major (n1,k1) x (n2,k2) per block."""

    def __init__(self, N, n_max):
        super().__init__(N, n_max)
        dims = [(self.C * s) ** 2 for s in self.S]
        self.block_offsets = np.concatenate([[0], np.cumsum(dims)])
        self.dim = int(self.block_offsets[-1])
        if self.dim > _MAX_FULL_ELEMENTS:
            raise ValueError(
                f"full block vectorization would need {self.dim} elements; "
                "use the reduced layout (canonical initial states) instead"
            )

    def element_index(self, b, n1, k1, n2, k2):
        """Vectorized index; -1 where out of range."""
        s = self.S[b]
        c = self.C
        n1, k1, n2, k2 = (np.asarray(x) for x in (n1, k1, n2, k2))
        ok = ((n1 >= 0) & (n1 < c) & (n2 >= 0) & (n2 < c)
              & (k1 >= 0) & (k1 < s) & (k2 >= 0) & (k2 < s))
        row = n1 * s + k1
        col = n2 * s + k2
        idx = self.block_offsets[b] + row * (c * s) + col
        return np.where(ok, idx, -1)

    def enumerate_elements(self, b):
        s = self.S[b]
        n1, k1, n2, k2 = np.meshgrid(
            np.arange(self.C), np.arange(s), np.arange(self.C), np.arange(s),
            indexing="ij",
        )
        return (x.ravel() for x in (n1, k1, n2, k2))

    def to_vec(self, bdm: BlockDensityMatrix) -> np.ndarray:
        return np.concatenate([b.ravel() for b in bdm.blocks])

    def from_vec(self, vec) -> BlockDensityMatrix:
        blocks = []
        for b in range(self.n_blocks):
            d = self.C * self.S[b]
            lo = self.block_offsets[b]
            blocks.append(np.array(vec[lo:lo + d * d].reshape(d, d)))
        return BlockDensityMatrix(N=self.N, n_max=self.n_max, js=self.js,
                                  blocks=blocks, weights=self.weights)


class ReducedLayout(_LayoutBase):
    """Only elements with n1 - k1 == n2 - k2 (phase-charge diagonal)."""

    def __init__(self, N, n_max):
        super().__init__(N, n_max)
        self._sec_lo = []       # per block: k_lo per sector
        self._sec_dim = []
        self._sec_off = []
        self.block_offsets = [0]
        self._rows = []         # per block: row index into the dense block
        self._cols = []
        for b, s in enumerate(self.S):
            qqs = np.arange(-(s - 1), self.C)     # qq = n - k
            k_lo = np.maximum(0, -qqs)
            k_hi = np.minimum(s - 1, self.C - 1 - qqs)
            dims = k_hi - k_lo + 1
            off = np.concatenate([[0], np.cumsum(dims * dims)])
            self._sec_lo.append(k_lo)
            self._sec_dim.append(dims)
            self._sec_off.append(off)
            self.block_offsets.append(self.block_offsets[-1] + int(off[-1]))
            rows = []
            cols = []
            for qq, lo, d in zip(qqs, k_lo, dims):
                k1 = np.repeat(np.arange(lo, lo + d), d)
                k2 = np.tile(np.arange(lo, lo + d), d)
                rows.append((qq + k1) * s + k1)
                cols.append((qq + k2) * s + k2)
            self._rows.append(np.concatenate(rows))
            self._cols.append(np.concatenate(cols))
        self.dim = self.block_offsets[-1]

    def element_index(self, b, n1, k1, n2, k2):
        s = self.S[b]
        n1, k1, n2, k2 = (np.asarray(x) for x in (n1, k1, n2, k2))
        qq = n1 - k1
        ok = ((qq == n2 - k2)
              & (n1 >= 0) & (n1 < self.C) & (n2 >= 0) & (n2 < self.C)
              & (k1 >= 0) & (k1 < s) & (k2 >= 0) & (k2 < s))
        qq_c = np.clip(qq, -(s - 1), self.C - 1)
        sec = qq_c + (s - 1)
        lo = self._sec_lo[b][sec]
        d = self._sec_dim[b][sec]
        idx = (self.block_offsets[b] + self._sec_off[b][sec]
               + (k1 - lo) * d + (k2 - lo))
        return np.where(ok, idx, -1)

    def enumerate_elements(self, b):
        s = self.S[b]
        rows = self._rows[b]
        cols = self._cols[b]
        n1, k1 = np.divmod(rows, s)
        n2, k2 = np.divmod(cols, s)
        return n1, k1, n2, k2

    def to_vec(self, bdm: BlockDensityMatrix) -> np.ndarray:
        return np.concatenate([
            bdm.blocks[b][self._rows[b], self._cols[b]]
            for b in range(self.n_blocks)
        ])

    def from_vec(self, vec) -> BlockDensityMatrix:
        blocks = []
        for b in range(self.n_blocks):
            d = self.C * self.S[b]
            blk = np.zeros((d, d), dtype=complex)
            lo = self.block_offsets[b]
            hi = self.block_offsets[b + 1]
            blk[self._rows[b], self._cols[b]] = vec[lo:hi]
            blocks.append(blk)
        return BlockDensityMatrix(N=self.N, n_max=self.n_max, js=self.js,
                                  blocks=blocks, weights=self.weights)

    def off_sector_mass(self, bdm: BlockDensityMatrix) -> float:
        """Frobenius mass of the state outside the stored sectors."""
        total = 0.0
        kept = 0.0
        for b in range(self.n_blocks):
            total += float(np.sum(np.abs(bdm.blocks[b]) ** 2))
            kept += float(np.sum(np.abs(
                bdm.blocks[b][self._rows[b], self._cols[b]]) ** 2))
        return np.sqrt(max(total - kept, 0.0))

    def pt_gather_maps(self, b: int):
        """Index maps into the vector for the cavity-transposed n+k blocks.

        For charge-diagonal states the partial transpose over the cavity is
        block diagonal in p = n + k; map entry [i, jj] is the vector index
        of element ((p - k_jj, k_i), (p - k_i, k_jj)).
        """
        if not hasattr(self, "_pt_maps"):
            self._pt_maps = [None] * self.n_blocks
        if self._pt_maps[b] is None:
            s = self.S[b]
            maps = []
            for p in range(0, self.C - 1 + s):
                kk = np.arange(max(0, p - self.C + 1), min(s - 1, p) + 1)
                if len(kk) == 0:
                    continue
                n1 = p - kk[None, :]
                k1 = kk[:, None] + 0 * kk[None, :]
                n2 = p - kk[:, None]
                k2 = kk[None, :] + 0 * kk[:, None]
                maps.append(self.element_index(b, n1, k1, n2, k2))
            self._pt_maps[b] = maps
        return self._pt_maps[b]

    def cavity_diag_indices(self, b: int):
        """Vector indices of ((n,k),(n,k)) elements, grouped as (n_idx, vidx)."""
        if not hasattr(self, "_cav_idx"):
            self._cav_idx = [None] * self.n_blocks
        if self._cav_idx[b] is None:
            s = self.S[b]
            n = np.repeat(np.arange(self.C), s)
            k = np.tile(np.arange(s), self.C)
            vidx = self.element_index(b, n, k, n, k)
            self._cav_idx[b] = (n, vidx)
        return self._cav_idx[b]


class ReducedStateView:
    """Lazy handle on a reduced-layout state vector.

    Avoids materializing dense blocks: photon statistics, the (diagonal)
    reduced cavity state and the partially transposed spectrum all come from
    index gathers on the vector.
    """

    def __init__(self, layout: ReducedLayout, vec: np.ndarray):
        self.layout = layout
        self.vec = vec
        self.N = layout.N
        self.n_max = layout.n_max

    def to_block_density_matrix(self) -> BlockDensityMatrix:
        return self.layout.from_vec(self.vec)

    def reduced_cavity(self) -> np.ndarray:
        lay = self.layout
        pops = np.zeros(lay.C)
        for b in range(lay.n_blocks):
            n, vidx = lay.cavity_diag_indices(b)
            np.add.at(pops, n, lay.weights[b] * self.vec[vidx].real)
        return np.diag(pops).astype(complex)

    def pt_trace_norm(self) -> float:
        lay = self.layout
        total = 0.0
        for b in range(lay.n_blocks):
            sub_total = 0.0
            for idx in lay.pt_gather_maps(b):
                mat = self.vec[idx]
                mat = 0.5 * (mat + mat.conj().T)
                sub_total += float(np.sum(np.abs(np.linalg.eigvalsh(mat))))
            total += lay.weights[b] * sub_total
        return total


def make_layout(N, n_max, reduced: bool):
    return ReducedLayout(N, n_max) if reduced else FullBlockLayout(N, n_max)


# ---------------------------------------------------------------------------
# superoperator assembly
# ---------------------------------------------------------------------------

class _Coo:
    def __init__(self):
        self.rows = []
        self.cols = []
        self.vals = []

    def add(self, rows, cols, vals):
        ok = (rows >= 0) & (cols >= 0) & (vals != 0.0)
        if np.any(ok):
            self.rows.append(rows[ok])
            self.cols.append(cols[ok])
            self.vals.append(np.asarray(vals, dtype=complex)[ok])

    def build(self, dim) -> csr_matrix:
        if not self.rows:
            return csr_matrix((dim, dim), dtype=complex)
        mat = coo_matrix(
            (np.concatenate(self.vals),
             (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(dim, dim),
        ).tocsr()
        mat.sum_duplicates()
        return mat


def hamiltonian_pair_superop(layout, lam: float) -> csr_matrix:
    """-i[H, .] for H = lam (a^dag J+ + a J-), block diagonal in j."""
    coo = _Coo()
    for b, j in enumerate(layout.js):
        n1, k1, n2, k2 = (np.asarray(x) for x in layout.enumerate_elements(b))
        src = layout.element_index(b, n1, k1, n2, k2)

        def hk(n, k):
            return lam * np.sqrt(n + 1.0) * _ap(j, k - j)

        # -i H rho: scatter to raised / lowered row index
        coo.add(layout.element_index(b, n1 + 1, k1 + 1, n2, k2), src,
                -1j * hk(n1, k1))
        coo.add(layout.element_index(b, n1 - 1, k1 - 1, n2, k2), src,
                -1j * hk(n1 - 1, k1 - 1))
        # +i rho H: scatter to shifted column index
        coo.add(layout.element_index(b, n1, k1, n2 + 1, k2 + 1), src,
                1j * hk(n2, k2))
        coo.add(layout.element_index(b, n1, k1, n2 - 1, k2 - 1), src,
                1j * hk(n2 - 1, k2 - 1))
    return coo.build(layout.dim)


def cavity_dissipator_superop(layout, gamma_c: float) -> csr_matrix:
    """gamma_c L[a] acting identically inside every block."""
    coo = _Coo()
    for b in range(layout.n_blocks):
        n1, k1, n2, k2 = (np.asarray(x) for x in layout.enumerate_elements(b))
        src = layout.element_index(b, n1, k1, n2, k2)
        coo.add(layout.element_index(b, n1 - 1, k1, n2 - 1, k2), src,
                gamma_c * np.sqrt(n1 * n2))
        coo.add(src, src, -gamma_c * (n1 + n2) / 2.0)
    return coo.build(layout.dim)


def local_lowering_superop(layout, gamma_d: float) -> csr_matrix:
    """gamma_d sum_i L[sigma_i^-] on per-copy blocks (sector mixing)."""
    N = layout.N
    coo = _Coo()
    block_of_j = {j: b for b, j in enumerate(layout.js)}
    for b, j in enumerate(layout.js):
        n1, k1, n2, k2 = (np.asarray(x) for x in layout.enumerate_elements(b))
        src = layout.element_index(b, n1, k1, n2, k2)
        m1 = k1 - j
        m2 = k2 - j
        # anticommutator half: sum_i sigma_i^+ sigma_i^- = N/2 + J^z
        coo.add(src, src, -gamma_d * (N + m1 + m2) / 2.0)
        # sandwich transfers, target m = source m - 1
        channels = []
        channels.append((j, k1 - 1, k2 - 1, _g_same(N, j, m1) * _g_same(N, j, m2)))
        if j - 1 in block_of_j:
            channels.append((j - 1, k1 - 2, k2 - 2,
                             _g_down(N, j, m1) * _g_down(N, j, m2)))
        if j + 1 in block_of_j:
            channels.append((j + 1, k1, k2,
                             _g_up(N, j, m1) * _g_up(N, j, m2)))
        for j_t, k1_t, k2_t, g2 in channels:
            bt = block_of_j[j_t]
            ratio = layout.weights[b] / layout.weights[bt]
            tgt = layout.element_index(bt, n1, k1_t, n2, k2_t)
            coo.add(tgt, src, gamma_d * ratio * np.sqrt(np.maximum(g2, 0.0)))
    return coo.build(layout.dim)


def liouvillian_rwa(layout, lam, gamma_c, gamma_d) -> csr_matrix:
    l = hamiltonian_pair_superop(layout, lam)
    if gamma_c:
        l = l + cavity_dissipator_superop(layout, gamma_c)
    if gamma_d:
        l = l + local_lowering_superop(layout, gamma_d)
    return csr_matrix(l)


# ---------------------------------------------------------------------------
# observable functionals (rows over the layout vector)
# ---------------------------------------------------------------------------

def _functional(layout, fill) -> csr_matrix:
    """Build one sparse row; ``fill(b, j, arrays) -> (idx, coeffs)``."""
    cols = []
    vals = []
    for b, j in enumerate(layout.js):
        n1, k1, n2, k2 = (np.asarray(x) for x in layout.enumerate_elements(b))
        out = fill(b, j, n1, k1, n2, k2)
        if out is None:
            continue
        idx, cf = out
        ok = (idx >= 0) & (cf != 0.0)
        cols.append(idx[ok])
        vals.append(np.asarray(cf, dtype=complex)[ok])
    if not cols:
        return csr_matrix((1, layout.dim), dtype=complex)
    return csr_matrix(
        (np.concatenate(vals),
         (np.zeros(sum(len(c) for c in cols), dtype=int), np.concatenate(cols))),
        shape=(1, layout.dim),
    )


def observable_row(layout, name: str) -> csr_matrix:
    """tr(O rho) as a row vector; names cover everything the solvers report.

    Diagonal-style observables (n, n2, z, jpjm, trace, top_pop) weight only
    element-diagonal entries; x = <a J->/N couples (n+1, k+1) x (n, k)
    entries; a, aa, a_jp live outside the charge-diagonal sector and are
    structurally zero rows on the reduced layout.
    """
    w = layout.weights

    def diag(coeff_fn):
        def fill(b, j, n1, k1, n2, k2):
            ok = (n1 == n2) & (k1 == k2)
            idx = layout.element_index(b, n1, k1, n2, k2)
            cf = np.where(ok, coeff_fn(b, j, n1, k1), 0.0) * w[b]
            return idx, cf
        return fill

    if name == "trace":
        return _functional(layout, diag(lambda b, j, n, k: np.ones_like(n, float)))
    if name == "n":
        return _functional(layout, diag(lambda b, j, n, k: n.astype(float)))
    if name == "n2":
        return _functional(layout, diag(lambda b, j, n, k: (n * n).astype(float)))
    if name == "top_pop":
        return _functional(layout, diag(
            lambda b, j, n, k: (n == layout.n_max).astype(float)))
    if name == "jz":
        return _functional(layout, diag(lambda b, j, n, k: k - j))
    if name == "z":      # <sigma_1^z> = 2 <J^z> / N
        return _functional(layout, diag(lambda b, j, n, k: 2.0 * (k - j) / layout.N))
    if name == "jpjm":
        return _functional(layout, diag(
            lambda b, j, n, k: j * (j + 1) - (k - j) * (k - j - 1)))
    if name == "s":      # <sigma_1^+ sigma_2^-> = (<J+J-> - N/2 - <Jz>)/(N(N-1))
        if layout.N < 2:
            return csr_matrix((1, layout.dim), dtype=complex)
        nn = layout.N

        def fill(b, j, n1, k1, n2, k2):
            ok = (n1 == n2) & (k1 == k2)
            m = k1 - j
            val = (j * (j + 1) - m * (m - 1) - nn / 2.0 - m) / (nn * (nn - 1.0))
            idx = layout.element_index(b, n1, k1, n2, k2)
            return idx, np.where(ok, val, 0.0) * w[b]
        return _functional(layout, fill)
    if name == "x":      # <a sigma_1^-> = <a J->/N ; element (n+1,k+1),(n,k)
        def fill(b, j, n1, k1, n2, k2):
            ok = (n1 == n2 + 1) & (k1 == k2 + 1)
            amp = np.sqrt(n2 + 1.0) * _ap(j, k1 - j - 1) / layout.N
            idx = layout.element_index(b, n1, k1, n2, k2)
            return idx, np.where(ok, amp, 0.0) * w[b]
        return _functional(layout, fill)
    if name == "a":      # <a>: element (n2+1, k2) x (n2, k2)
        def fill(b, j, n1, k1, n2, k2):
            ok = (n1 == n2 + 1) & (k1 == k2)
            idx = layout.element_index(b, n1, k1, n2, k2)
            return idx, np.where(ok, np.sqrt(n2 + 1.0), 0.0) * w[b]
        return _functional(layout, fill)
    if name == "aa":
        def fill(b, j, n1, k1, n2, k2):
            ok = (n1 == n2 + 2) & (k1 == k2)
            idx = layout.element_index(b, n1, k1, n2, k2)
            return idx, np.where(ok, np.sqrt((n2 + 1.0) * (n2 + 2.0)), 0.0) * w[b]
        return _functional(layout, fill)
    if name == "a_jp":   # <a J+>: element (n2+1, k2-1) x (n2, k2)
        def fill(b, j, n1, k1, n2, k2):
            ok = (n1 == n2 + 1) & (k1 == k2 - 1)
            amp = np.sqrt(n2 + 1.0) * _ap(j, k1 - j)
            idx = layout.element_index(b, n1, k1, n2, k2)
            return idx, np.where(ok, amp, 0.0) * w[b]
        return _functional(layout, fill)
    raise ValueError(f"unknown observable row '{name}'")

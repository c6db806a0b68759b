"""Block superoperators against the brute-force product-space oracle."""

import numpy as np
import pytest

from drivendicke import _bruteforce as bf
from drivendicke._liouvillian import (
    FullBlockLayout,
    ReducedLayout,
    cavity_dissipator_superop,
    hamiltonian_pair_superop,
    liouvillian_rwa,
    local_lowering_superop,
    observable_row,
)
from drivendicke.operators import (
    BlockDensityMatrix,
    build_fock_ops,
    project_to_blocks,
)
from tests.test_operators import random_symmetric_state

rng = np.random.default_rng(5)


def brute_rwa_action(rho, n_sites, n_max, lam, gc, gd):
    l = bf.rwa_liouvillian_product(n_sites, n_max, lam, gc, gd)
    return l.dot(rho.reshape(-1)).reshape(rho.shape)


def block_difference(bdm_a, bdm_b):
    return max(np.max(np.abs(a - b))
               for a, b in zip(bdm_a.blocks, bdm_b.blocks))


@pytest.mark.parametrize("n_sites", [1, 2, 3])
class TestAgainstBruteForce:
    n_max = 3

    def test_local_dissipator(self, n_sites):
        gamma_d = 0.37
        rho = random_symmetric_state(n_sites, self.n_max)
        bdm = project_to_blocks(rho, n_sites, self.n_max)
        drho = np.zeros_like(rho)
        for i in range(1, n_sites + 1):
            c = bf.lift_site_op(n_sites, self.n_max, i, "m").toarray()
            cd = c.conj().T
            drho += gamma_d * (c @ rho @ cd
                               - 0.5 * (cd @ c @ rho + rho @ cd @ c))
        want = project_to_blocks(drho + rho, n_sites, self.n_max)
        layout = FullBlockLayout(n_sites, self.n_max)
        got = layout.from_vec(
            local_lowering_superop(layout, gamma_d).dot(layout.to_vec(bdm)))
        err = max(np.max(np.abs((w - b) - g)) for w, g, b in
                  zip(want.blocks, got.blocks, bdm.blocks))
        assert err < 1e-9

    def test_full_liouvillian(self, n_sites):
        lam, gc, gd = 0.21, 0.13, 0.37
        rho = random_symmetric_state(n_sites, self.n_max)
        bdm = project_to_blocks(rho, n_sites, self.n_max)
        drho = brute_rwa_action(rho, n_sites, self.n_max, lam, gc, gd)
        want = project_to_blocks(drho + rho, n_sites, self.n_max)
        layout = FullBlockLayout(n_sites, self.n_max)
        got = layout.from_vec(
            liouvillian_rwa(layout, lam, gc, gd).dot(layout.to_vec(bdm)))
        err = max(np.max(np.abs((w - b) - g)) for w, g, b in
                  zip(want.blocks, got.blocks, bdm.blocks))
        assert err < 1e-9

    def test_trace_preservation(self, n_sites):
        layout = FullBlockLayout(n_sites, self.n_max)
        lmat = liouvillian_rwa(layout, 0.21, 0.13, 0.37)
        tr_row = observable_row(layout, "trace")
        assert np.max(np.abs((tr_row @ lmat).toarray())) < 1e-12


class TestDissipatorStructure:
    def test_single_detector_reduction(self):
        # N = 1: the block dissipator is the plain two-level dissipator
        n_max = 2
        layout = FullBlockLayout(1, n_max)
        lmat = local_lowering_superop(layout, 1.0)
        sm = np.array([[0, 0], [1, 0]], dtype=complex).conj().T
        rho = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        rho = rho + rho.conj().T
        c = np.kron(np.eye(n_max + 1), sm)
        want = c @ rho @ c.conj().T - 0.5 * (c.conj().T @ c @ rho
                                             + rho @ c.conj().T @ c)
        bdm = BlockDensityMatrix(N=1, n_max=n_max, js=(0.5,), blocks=[rho],
                                 weights=(1.0,))
        got = layout.from_vec(lmat.dot(layout.to_vec(bdm)))
        assert np.max(np.abs(got.blocks[0] - want)) < 1e-12

    def test_all_ground_is_dark(self):
        for n_sites in (1, 2, 3, 5):
            layout = FullBlockLayout(n_sites, 2)
            lmat = local_lowering_superop(layout, 0.8)
            bdm = BlockDensityMatrix.vacuum_ground(n_sites, 2)
            out = lmat.dot(layout.to_vec(bdm))
            assert np.max(np.abs(out)) < 1e-14


class TestReducedLayout:
    def test_roundtrip(self):
        lay = ReducedLayout(3, 4)
        bdm = BlockDensityMatrix.vacuum_ground(3, 4)
        back = lay.from_vec(lay.to_vec(bdm))
        assert block_difference(back, bdm) == 0.0

    def test_matches_full_layout_on_charge_diagonal_states(self):
        n_sites, n_max = 3, 4
        full = FullBlockLayout(n_sites, n_max)
        red = ReducedLayout(n_sites, n_max)
        l_full = liouvillian_rwa(full, 0.21, 0.13, 0.37)
        l_red = liouvillian_rwa(red, 0.21, 0.13, 0.37)
        # random Hermitian state supported on the stored sectors
        bdm = BlockDensityMatrix.vacuum_ground(n_sites, n_max)
        for b in range(len(bdm.blocks)):
            vec = (rng.normal(size=red.block_offsets[b + 1]
                              - red.block_offsets[b])
                   + 1j * rng.normal(size=red.block_offsets[b + 1]
                                     - red.block_offsets[b]))
            blk = np.zeros_like(bdm.blocks[b])
            blk[red._rows[b], red._cols[b]] = vec
            bdm.blocks[b] = blk + blk.conj().T
        assert red.off_sector_mass(bdm) < 1e-14
        da = full.from_vec(l_full.dot(full.to_vec(bdm)))
        db = red.from_vec(l_red.dot(red.to_vec(bdm)))
        assert block_difference(da, db) < 1e-12

    def test_off_sector_mass_detects_coherences(self):
        lay = ReducedLayout(2, 3)
        bdm = BlockDensityMatrix.vacuum_ground(2, 3)
        bdm.blocks[0][0, 1] = 0.1      # (n=0,k=0) x (n=0,k=1): off sector
        bdm.blocks[0][1, 0] = 0.1
        assert lay.off_sector_mass(bdm) > 0.1


class TestObservableRows:
    @pytest.mark.parametrize("reduced", [False, True])
    def test_rows_match_dense_expectations(self, reduced):
        n_sites, n_max = 3, 3
        layout = (ReducedLayout if reduced else FullBlockLayout)(n_sites, n_max)
        if reduced:
            rho = random_symmetric_state(n_sites, n_max)
            bdm = project_to_blocks(rho, n_sites, n_max)
            # keep only the stored sectors (legal input for the reduced rep)
            for b in range(len(bdm.blocks)):
                blk = np.zeros_like(bdm.blocks[b])
                blk[layout._rows[b], layout._cols[b]] = \
                    bdm.blocks[b][layout._rows[b], layout._cols[b]]
                bdm.blocks[b] = blk
        else:
            rho = random_symmetric_state(n_sites, n_max)
            bdm = project_to_blocks(rho, n_sites, n_max)
        vec = layout.to_vec(bdm)
        a, a_dag, num = build_fock_ops(n_max)

        def dense_expect(cav_op, spin_kind):
            from drivendicke.operators import build_dicke_ops
            total = 0.0 + 0.0j
            for j, w, blk in zip(bdm.js, bdm.weights, bdm.blocks):
                jp, jm, jz = build_dicke_ops(j)
                s_dim = int(round(2 * j)) + 1
                spin = {"eye": np.eye(s_dim, dtype=complex), "jz": jz,
                        "jpjm": jp @ jm, "jm": jm}[spin_kind]
                total += w * np.trace(np.kron(cav_op, spin) @ blk)
            return total

        eye_c = np.eye(n_max + 1, dtype=complex)
        checks = {
            "trace": dense_expect(eye_c, "eye"),
            "n": dense_expect(num, "eye"),
            "n2": dense_expect(num @ num, "eye"),
            "jz": dense_expect(eye_c, "jz"),
            "x": dense_expect(a, "jm") / n_sites,
        }
        for name, want in checks.items():
            got = complex((observable_row(layout, name) @ vec)[0])
            assert abs(got - want) < 1e-10, name

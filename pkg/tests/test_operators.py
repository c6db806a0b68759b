import itertools
import math

import numpy as np
import pytest

from drivendicke.operators import (
    BlockDensityMatrix,
    blocks_to_full,
    build_dicke_ops,
    build_fock_ops,
    build_pauli_ops,
    collective_spin_ops,
    degeneracy,
    dicke_j_values,
    project_to_blocks,
    symmetric_basis,
)

rng = np.random.default_rng(42)


def perm_matrix(perm, n_sites):
    dim = 2 ** n_sites
    m = np.zeros((dim, dim))
    for idx in range(dim):
        bits = [(idx >> (n_sites - s)) & 1 for s in range(1, n_sites + 1)]
        permuted = [bits[perm[s]] for s in range(n_sites)]
        jdx = 0
        for b in permuted:
            jdx = (jdx << 1) | b
        m[jdx, idx] = 1.0
    return m


def random_symmetric_state(n_sites, n_max):
    dim = (n_max + 1) * 2 ** n_sites
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    acc = np.zeros_like(rho)
    count = 0
    for perm in itertools.permutations(range(n_sites)):
        pm = np.kron(np.eye(n_max + 1), perm_matrix(list(perm), n_sites))
        acc += pm @ rho @ pm.T
        count += 1
    rho = acc / count
    return rho / np.trace(rho)


class TestFockOps:
    def test_single_excitation_truncation(self):
        a, a_dag, num = build_fock_ops(1)
        assert np.array_equal(a, np.array([[0, 1], [0, 0]], dtype=complex))

    def test_ladder_element(self):
        a, _, _ = build_fock_ops(5)
        assert a[2, 3] == pytest.approx(math.sqrt(3))

    def test_commutator_below_truncation(self):
        n_max = 6
        a, a_dag, _ = build_fock_ops(n_max)
        comm = a @ a_dag - a_dag @ a
        for n in range(n_max):
            e = np.zeros(n_max + 1)
            e[n] = 1.0
            assert np.allclose(comm @ e, e, atol=1e-12)

    def test_number_operator(self):
        a, a_dag, num = build_fock_ops(4)
        assert np.allclose(a_dag @ a, num, atol=1e-14)


class TestDickeOps:
    def test_half_spin_is_pauli(self):
        jp, jm, jz = build_dicke_ops(0.5)
        assert np.allclose(jp, [[0, 0], [1, 0]])
        assert np.allclose(jz, np.diag([-0.5, 0.5]))

    def test_top_of_ladder(self):
        jp, _, _ = build_dicke_ops(1.5)
        top = np.zeros(4)
        top[3] = 1.0
        assert np.allclose(jp @ top, 0.0)

    def test_matrix_element_j1(self):
        _, jm, _ = build_dicke_ops(1.0)
        # <1,0|J-|1,1>: k=2 is m=+1, k=1 is m=0
        assert jm[1, 2] == pytest.approx(math.sqrt(2))

    @pytest.mark.parametrize("j", [0.5, 1.0, 2.5, 5.0, 10.0])
    def test_commutation_algebra(self, j):
        jp, jm, jz = build_dicke_ops(j)
        assert np.max(np.abs((jp @ jm - jm @ jp) - 2 * jz)) < 1e-12
        assert np.max(np.abs((jz @ jp - jp @ jz) - jp)) < 1e-12
        assert np.max(np.abs((jz @ jm - jm @ jz) + jm)) < 1e-12
        assert np.max(np.abs(jz - jz.conj().T)) < 1e-12


class TestPauliOps:
    def test_site_one_structure(self):
        _, _, sz1 = build_pauli_ops(2, 1)
        sz = np.diag([-1.0, 1.0])
        assert np.allclose(sz1, np.kron(sz, np.eye(2)))

    def test_anticommutation(self):
        sp, sm, _ = build_pauli_ops(3, 2)
        anti = sp @ sm + sm @ sp
        assert np.allclose(anti, np.eye(8), atol=1e-14)

    def test_collective_matches_symmetric_embedding(self):
        # sum_i sigma_i^z / 2 equals J^z on the maximal-spin sector
        for n_sites in (2, 3):
            _, _, jz = collective_spin_ops(n_sites)
            basis = symmetric_basis(n_sites)
            j = n_sites / 2.0
            vecs = basis[j][0]           # d_j = 1 copy
            jz_proj = vecs.conj() @ jz @ vecs.T
            _, _, jz_ladder = build_dicke_ops(j)
            assert np.max(np.abs(jz_proj - jz_ladder)) < 1e-10

    def test_size_cap(self):
        with pytest.raises(ValueError):
            build_pauli_ops(5, 1)


class TestSectors:
    def test_j_values(self):
        assert dicke_j_values(4) == [2.0, 1.0, 0.0]
        assert dicke_j_values(5) == [2.5, 1.5, 0.5]

    @pytest.mark.parametrize("n_sites", [1, 2, 3, 4, 6, 9, 12])
    def test_degeneracy_sum_rule(self, n_sites):
        total = sum(degeneracy(n_sites, j) * (2 * j + 1)
                    for j in dicke_j_values(n_sites))
        assert total == pytest.approx(2 ** n_sites, rel=1e-12)


class TestBlockDensityMatrix:
    def test_vacuum_ground(self):
        bdm = BlockDensityMatrix.vacuum_ground(3, 4)
        assert bdm.trace() == pytest.approx(1.0)
        bdm.validate()
        assert bdm.photon_number() == pytest.approx(0.0, abs=1e-14)

    def test_validate_catches_bad_states(self):
        bdm = BlockDensityMatrix.vacuum_ground(2, 3)
        bdm.blocks[0][0, 1] = 0.5      # not Hermitian
        with pytest.raises(ValueError):
            bdm.validate()


class TestProjection:
    def test_ground_state_lands_in_max_spin(self):
        n_max = 3
        dim = (n_max + 1) * 4
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0               # |0> x |gg>, basis g=bit 0
        bdm = project_to_blocks(rho, 2, n_max)
        assert bdm.blocks[0][0, 0] == pytest.approx(1.0)   # j=1, n=0, m=-1
        assert np.max(np.abs(bdm.blocks[1])) < 1e-12       # j=0 empty

    def test_singlet_triplet_split(self):
        # explicit 2-qubit Clebsch-Gordan: |S> = (|ge> - |eg>)/sqrt(2)
        n_max = 1
        singlet = np.zeros(2 * 2, dtype=complex)
        # ordering: site bits (b1 b2), basis g=0, e=1: ge = 01, eg = 10
        singlet[1] = 1 / math.sqrt(2)
        singlet[2] = -1 / math.sqrt(2)
        rho_tls = 0.3 * np.outer(singlet, singlet.conj())
        triplet = np.zeros(4, dtype=complex)
        triplet[0] = 1.0               # |gg>
        rho_tls += 0.7 * np.outer(triplet, triplet.conj())
        cav = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        cav[0, 0] = 1.0
        rho = np.kron(cav, rho_tls)
        bdm = project_to_blocks(rho, 2, n_max)
        traces = [w * np.trace(b).real
                  for w, b in zip(bdm.weights, bdm.blocks)]
        assert traces[0] == pytest.approx(0.7, abs=1e-12)  # triplet sector
        assert traces[1] == pytest.approx(0.3, abs=1e-12)  # singlet sector

    @pytest.mark.parametrize("n_sites", [2, 3])
    def test_observable_agreement(self, n_sites):
        # any degree <= 2 polynomial in {a, a+, Jz, J+-} agrees to 1e-9
        n_max = 3
        rho = random_symmetric_state(n_sites, n_max)
        bdm = project_to_blocks(rho, n_sites, n_max)
        assert bdm.trace() == pytest.approx(1.0, abs=1e-10)

        a, a_dag, num = build_fock_ops(n_max)
        jp_f, jm_f, jz_f = collective_spin_ops(n_sites)
        eye_t = np.eye(2 ** n_sites)
        eye_c = np.eye(n_max + 1)
        pairs = [
            (np.kron(num, eye_t), (num, "eye")),
            (np.kron(num @ num, eye_t), (num @ num, "eye")),
            (np.kron(eye_c, jz_f), ("eye", "jz")),
            (np.kron(eye_c, jp_f @ jm_f), ("eye", "jpjm")),
            (np.kron(a, eye_t) @ np.kron(eye_c, jp_f), (a, "jp")),
        ]
        for full_op, (cav_op, spin_kind) in pairs:
            want = np.trace(full_op @ rho)

            def spin_ops(j):
                jp, jm, jz = build_dicke_ops(j)
                return {"eye": np.eye(int(round(2 * j)) + 1, dtype=complex),
                        "jz": jz, "jpjm": jp @ jm, "jp": jp}[spin_kind]

            cav = None if isinstance(cav_op, str) else cav_op
            got = bdm.expect(cavity_op=cav, spin_ops=spin_ops)
            assert abs(got - want) < 1e-9

    def test_roundtrip(self):
        rho = random_symmetric_state(3, 2)
        bdm = project_to_blocks(rho, 3, 2)
        back = blocks_to_full(bdm)
        assert np.max(np.abs(back - rho)) < 1e-10

    def test_rejects_asymmetric_state(self):
        n_max = 1
        dim = (n_max + 1) * 4
        rho = np.zeros((dim, dim), dtype=complex)
        rho[1, 1] = 1.0                # |0> x |ge>: not swap invariant
        with pytest.raises(ValueError):
            project_to_blocks(rho, 2, n_max)

    def test_reduced_cavity_consistency(self):
        rho = random_symmetric_state(2, 3)
        bdm = project_to_blocks(rho, 2, 3)
        rho_c = bdm.reduced_cavity()
        want = rho.reshape(4, 4, 4, 4).trace(axis1=1, axis2=3)
        assert np.max(np.abs(rho_c - want)) < 1e-10

"""Brute-force solver pieces on the full cavity (x) 2^N product space.

Exists to serve as the oracle for the permutation-symmetric solver and to
integrate the time-dependent laboratory-frame Hamiltonian for small N.
Density matrices are vectorized row-major, so vec(A rho B) =
(A kron B^T) vec(rho).
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix, identity, kron

from ._integrate import COEFF_CONST, COEFF_DRIVE, COEFF_LORENTZ, TermCoeff
from .operators import (
    MAX_BRUTE_FORCE_N,
    build_fock_ops,
    build_pauli_ops,
    collective_spin_ops,
)
from .params import PhysicalParams


def product_ops(N: int, n_max: int):
    """Lifted cavity and collective spin operators on the product space."""
    a, a_dag, num = build_fock_ops(n_max)
    jp, jm, jz = collective_spin_ops(N)
    eye_tls = np.eye(2 ** N)
    eye_cav = np.eye(n_max + 1)
    lift_c = lambda op: csr_matrix(np.kron(op, eye_tls))
    lift_s = lambda op: csr_matrix(np.kron(eye_cav, op))
    return {
        "a": lift_c(a), "a_dag": lift_c(a_dag), "num": lift_c(num),
        "jp": lift_s(jp), "jm": lift_s(jm), "jz": lift_s(jz),
        "dim": (n_max + 1) * 2 ** N,
    }


def lift_site_op(N: int, n_max: int, site: int, which: str) -> csr_matrix:
    sp, sm, sz = build_pauli_ops(N, site)
    base = {"p": sp, "m": sm, "z": sz, "x": sp + sm}[which]
    return csr_matrix(np.kron(np.eye(n_max + 1), base))


def spre(op) -> csr_matrix:
    d = op.shape[0]
    return csr_matrix(kron(op, identity(d, format="csr"), format="csr"))


def spost(op) -> csr_matrix:
    d = op.shape[0]
    return csr_matrix(kron(identity(d, format="csr"), op.T, format="csr"))


def commutator_superop(h) -> csr_matrix:
    return -1j * (spre(h) - spost(h))


def dissipator_superop(c_op, rate: float) -> csr_matrix:
    c = csr_matrix(c_op)
    cd = csr_matrix(c.conj().T)
    cdc = cd @ c
    return rate * (
        spre(c) @ spost(cd) - 0.5 * spre(cdc) - 0.5 * spost(cdc)
    )


def rwa_hamiltonian_product(N, n_max, lam, transformed=False) -> csr_matrix:
    """lam (a^dag J+ + a J-); the unitarily transformed variant swaps J+ <-> J-."""
    ops = product_ops(N, n_max)
    if transformed:
        h = lam * (ops["a_dag"] @ ops["jm"] + ops["a"] @ ops["jp"])
    else:
        h = lam * (ops["a_dag"] @ ops["jp"] + ops["a"] @ ops["jm"])
    return csr_matrix(h)


def rwa_liouvillian_product(N, n_max, lam, gamma_c, gamma_d,
                            transformed=False) -> csr_matrix:
    """Master-equation generator with cavity decay and per-site lowering.

    ``transformed=True`` builds the unitarily equivalent problem with
    co-rotating coupling and per-site raising (incoherent pump) dissipators.
    """
    ops = product_ops(N, n_max)
    l = commutator_superop(rwa_hamiltonian_product(N, n_max, lam, transformed))
    if gamma_c:
        l = l + dissipator_superop(ops["a"], gamma_c)
    if gamma_d:
        which = "p" if transformed else "m"
        for i in range(1, N + 1):
            l = l + dissipator_superop(lift_site_op(N, n_max, i, which), gamma_d)
    return csr_matrix(l)


def hamiltonian_full_matrix(t: float, p: PhysicalParams) -> np.ndarray:
    """Laboratory-frame H(t)/hbar at one instant (dense; contract checks)."""
    terms = hamiltonian_full_terms(p, superop=False, include_static=True)
    dim = terms[0][1].shape[0]
    h = np.zeros((dim, dim), dtype=complex)
    for coeff, mat in terms:
        h += coeff.value(t) * (1j * mat.toarray())  # undo the -i wrapper
    return h


def hamiltonian_full_terms(p: PhysicalParams, superop: bool,
                           include_static: bool = True):
    """Time-dependent generator split into (coefficient profile, matrix) terms.

    With ``superop`` the matrices are -i[., .] commutator superoperators on
    vec(rho); otherwise they are -i H_k for wavefunction integration. The
    detector terms carry the reciprocal Lorentz factor and the sinusoidal
    coupling envelope evaluated continuously in time.
    """
    N = int(p.N)
    if N > MAX_BRUTE_FORCE_N:
        raise ValueError(f"laboratory-frame solver limited to N <= {MAX_BRUTE_FORCE_N}")
    n_max = p.n_max
    ops = product_ops(N, n_max)
    xi = p.xi
    kca = p.omega_c * p.A / p.c_light   # k_c A = omega_c xi / Omega_m

    wrap = commutator_superop if superop else (lambda m: csr_matrix(-1j * m))
    terms = []
    if include_static:
        terms.append((TermCoeff(COEFF_CONST, amp=1.0),
                      wrap(p.omega_c * ops["num"])))
    x_field = ops["a"] + ops["a_dag"]
    for i in range(1, N + 1):
        phi = p.phase_of(i - 1)
        sz_half = 0.5 * lift_site_op(N, n_max, i, "z")
        sx = lift_site_op(N, n_max, i, "x")
        terms.append((
            TermCoeff(COEFF_LORENTZ, amp=p.omega_d0, xi=xi,
                      omega=p.Omega_m, phi=phi),
            wrap(sz_half),
        ))
        terms.append((
            TermCoeff(COEFF_DRIVE, amp=p.lambda0, xi=xi,
                      omega=p.Omega_m, phi=phi, kappa=kca),
            wrap(csr_matrix(x_field @ sx)),
        ))
    return terms


def observable_row_product(N, n_max, name) -> csr_matrix:
    """tr(O rho) as a row over vec(rho): row = vec(O^T)."""
    ops = product_ops(N, n_max)
    if name == "trace":
        o = identity(ops["dim"], format="csr", dtype=complex)
    elif name == "n":
        o = ops["num"]
    elif name == "n2":
        o = ops["num"] @ ops["num"]
    elif name == "top_pop":
        proj = np.zeros(n_max + 1)
        proj[n_max] = 1.0
        o = csr_matrix(np.kron(np.diag(proj), np.eye(2 ** N)))
    elif name == "z":
        o = lift_site_op(N, n_max, 1, "z")
    elif name == "s":
        if N < 2:
            return csr_matrix((1, ops["dim"] ** 2), dtype=complex)
        o = lift_site_op(N, n_max, 1, "p") @ lift_site_op(N, n_max, 2, "m")
    elif name == "x":
        o = ops["a"] @ lift_site_op(N, n_max, 1, "m")
    elif name == "a":
        o = ops["a"]
    elif name == "aa":
        o = ops["a"] @ ops["a"]
    elif name == "a_jp":
        o = ops["a"] @ ops["jp"]
    elif name == "jz":
        o = ops["jz"]
    else:
        raise ValueError(f"unknown observable row '{name}'")
    return csr_matrix(csr_matrix(o).T.reshape(1, ops["dim"] ** 2))

"""Independent reference implementations used only by the tests.

Everything here is built from explicit Jordan-Wigner matrices on the full
Fock space, so it shares no code with the determinant machinery under test.
"""

import numpy as np
import scipy.linalg as sla

from subspectra.fcidump import IntegralTable

_A = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1> -> |0>
_Z = np.diag([1.0, -1.0])
_I = np.eye(2)


def annihilators(n_so):
    """Jordan-Wigner ``c_p`` on ``2**n_so`` states; basis index = occupation word."""
    ops = []
    for p in range(n_so):
        # kron runs from the most significant orbital down to orbital 0
        factors = [_I] * (n_so - 1 - p) + [_A] + [_Z] * p
        m = np.array([[1.0]])
        for f in factors:
            m = np.kron(m, f)
        ops.append(m)
    return ops


def fock_hamiltonian(table):
    """Full-Fock-space matrix of the second-quantised Hamiltonian.

    ``H = E_core + sum h_pq c+_ps c_qs + 1/2 sum (pq|rs) c+_ps c+_rt c_st c_qs``
    with spin-orbital ``2*spatial + spin``.
    """
    m = table.norb
    c = annihilators(2 * m)
    cd = [x.T for x in c]
    dim = 4**m
    H = table.e_core * np.eye(dim)
    for p in range(m):
        for q in range(m):
            if table.h1[p, q]:
                for s in (0, 1):
                    H += table.h1[p, q] * cd[2 * p + s] @ c[2 * q + s]
    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s_ in range(m):
                    v = table.h2[p, q, r, s_]
                    if not v:
                        continue
                    for a in (0, 1):
                        for b in (0, 1):
                            H += 0.5 * v * cd[2 * p + a] @ cd[2 * r + b] @ c[2 * s_ + b] @ c[2 * q + a]
    return H


def operator_matrix(factors, n_so):
    """Matrix of a ladder product; ``factors[-1]`` acts first."""
    c = annihilators(n_so)
    M = np.eye(2**n_so)
    for kind, p in factors:
        M = M @ (c[p].T if kind == "+" else c[p])
    return M


def restrict(M, dets_row, dets_col=None):
    dets_col = dets_row if dets_col is None else dets_col
    return M[np.ix_(list(dets_row), list(dets_col))]


def heisenberg_correlator(H_fock, A, psi0_fock, e0, times):
    """``<psi0| e^{iHt} A^dag e^{-iHt} A |psi0>`` by matrix exponentials."""
    out = []
    for t in times:
        U = sla.expm(-1j * H_fock * t)
        out.append(np.vdot(psi0_fock, U.conj().T @ A.T @ U @ A @ psi0_fock))
    return np.array(out)


def random_table(norb, nelec, ms2=0, seed=0, scale=0.5):
    """Real integrals with the full 8-fold symmetry and random entries."""
    rng = np.random.default_rng(seed)
    h1 = rng.normal(scale=scale, size=(norb, norb))
    h1 = 0.5 * (h1 + h1.T)
    g = rng.normal(scale=scale, size=(norb,) * 4)
    g = g + g.transpose(1, 0, 2, 3)
    g = g + g.transpose(0, 1, 3, 2)
    g = g + g.transpose(2, 3, 0, 1)
    return IntegralTable(norb=norb, nelec=nelec, ms2=ms2, e_core=float(rng.normal()), h1=h1, h2=g / 8)


def block_toy(seed=0):
    """Two decoupled 2x2 blocks over 4 basis states."""
    rng = np.random.default_rng(seed)
    H = np.zeros((4, 4))
    for b in (0, 2):
        x = rng.normal(size=(2, 2))
        H[b : b + 2, b : b + 2] = x + x.T
    return H


def dense_toy(n=8, seed=0):
    """Generic real symmetric matrix with every entry nonzero."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n))
    return x + x.T


def random_state(n, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)

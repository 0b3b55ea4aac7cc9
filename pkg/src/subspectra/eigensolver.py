"""Ground states, reference spectra and real-time propagation."""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .fock import SectorWaveFunction

__all__ = [
    "DENSE_CAP",
    "FULL_SPECTRUM_CAP",
    "ConvergenceError",
    "SizeCapError",
    "SpectrumReference",
    "lanczos_ground_state",
    "ground_state",
    "full_spectrum",
    "Propagator",
    "propagate",
]

DENSE_CAP = 2000
FULL_SPECTRUM_CAP = 20000


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (best residual {residual:.3e})")
        self.residual = residual


class SizeCapError(RuntimeError):
    pass


def _as_operator(H):
    return H.tocsr() if sp.issparse(H) else np.asarray(H)


def _fix_phase(v):
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def lanczos_ground_state(H, tol=1e-8, maxiter=500, seed=0):
    """Lowest eigenpair of Hermitian ``H`` by Lanczos with full reorthogonalisation.

    Returns ``(energy, vector, residual_norm)``.  Raises ConvergenceError if
    ``||H v - E v|| > tol`` after ``maxiter`` Krylov vectors.
    """
    H = _as_operator(H)
    n = H.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 0j
    v /= np.linalg.norm(v)
    m_max = min(maxiter, n)
    V = np.zeros((m_max + 1, n), dtype=complex)
    V[0] = v
    alpha, beta = [], []
    best = (np.inf, None, None)
    for j in range(m_max):
        w = H @ V[j]
        a = np.vdot(V[j], w).real
        w = w - a * V[j] - (beta[-1] * V[j - 1] if j else 0)
        # two passes of classical Gram-Schmidt against the whole basis
        for _ in range(2):
            w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
        alpha.append(a)
        b = np.linalg.norm(w)
        theta, s = sla.eigh_tridiagonal(np.array(alpha), np.array(beta), select="i", select_range=(0, 0))
        est = abs(b * s[-1, 0])
        if est < tol or b < 1e-14 or j == m_max - 1:
            x = V[: j + 1].T @ s[:, 0]
            x /= np.linalg.norm(x)
            e = np.vdot(x, H @ x).real
            res = np.linalg.norm(H @ x - e * x)
            if res < best[0]:
                best = (res, e, x)
            if res <= tol:
                return e, _fix_phase(x), res
            if b < 1e-14:
                break
        beta.append(b)
        V[j + 1] = w / b
    raise ConvergenceError("Lanczos did not converge", best[0])


def ground_state(H, sector=None, dense_cap=DENSE_CAP, tol=1e-8, maxiter=500):
    """Lowest eigenpair of ``H``.

    Dense diagonalisation for ``dim <= dense_cap``, otherwise Lanczos.  The
    largest-magnitude amplitude of the returned vector is real and positive.
    If ``sector`` is given the vector is wrapped in a SectorWaveFunction.
    """
    n = H.shape[0]
    if n < 1:
        raise ValueError("empty matrix")
    if n <= dense_cap:
        dense = H.toarray() if sp.issparse(H) else np.asarray(H)
        w, v = sla.eigh(dense, subset_by_index=[0, 0])
        e0, vec = float(w[0]), v[:, 0].astype(complex)
    else:
        e0, vec, _ = lanczos_ground_state(H, tol=tol, maxiter=maxiter)
    vec = _fix_phase(vec)
    if sector is not None:
        return e0, SectorWaveFunction(sector, vec)
    return e0, vec


@dataclass
class SpectrumReference:
    """Exact eigen-decomposition of a perturbed state.

    Attributes
    ----------
    energies : ndarray
        Eigenvalues ``E_n`` of the Hamiltonian, ascending.
    amplitudes : ndarray
        Overlaps ``|<psi_A|E_n>|^2``.
    e0 : float
        Ground-state energy the excitation energies are measured from.
    a_norm2 : float
        ``<A^dag A>_0``; multiplies the overlaps to give spectral weights.
    """

    energies: np.ndarray
    amplitudes: np.ndarray
    e0: float
    a_norm2: float = 1.0

    def levels(self, degeneracy_tol=1e-8):
        """Distinct excitation energies and their summed spectral weights.

        Returns ``(gaps, weights)`` with ``weights = a_norm2 * sum |<psi_A|E_n>|^2``
        over each degenerate cluster.
        """
        gaps, weights = [], []
        for e, a in zip(self.energies, self.amplitudes):
            if gaps and e - self.e0 - gaps[-1] <= degeneracy_tol:
                weights[-1] += a
            else:
                gaps.append(e - self.e0)
                weights.append(a)
        return np.array(gaps), self.a_norm2 * np.array(weights)


def full_spectrum(H, psi_A, e0=None, a_norm2=1.0, cap=FULL_SPECTRUM_CAP):
    """All eigenvalues of ``H`` and the weight of ``psi_A`` on each.

    ``e0`` defaults to the lowest eigenvalue of ``H``; pass the ground energy
    of the unperturbed sector when ``psi_A`` lives in a different one.
    """
    n = H.shape[0]
    if n > cap:
        raise SizeCapError(f"dimension {n} exceeds dense cap {cap}")
    dense = H.toarray() if sp.issparse(H) else np.asarray(H)
    w, v = sla.eigh(dense)
    amps = psi_A.amps if isinstance(psi_A, SectorWaveFunction) else np.asarray(psi_A)
    ov = np.abs(v.conj().T @ amps) ** 2
    return SpectrumReference(w, ov, float(w[0]) if e0 is None else float(e0), float(a_norm2))


class Propagator:
    """Applies ``exp(-i H t)`` to vectors.

    For ``dim <= dense_cap`` the eigendecomposition of ``H`` is computed once
    and reused for every time; otherwise an adaptive Lanczos (Krylov) stepper
    is used with a per-step error bound ``krylov_tol``.
    """

    def __init__(self, H, dense_cap=DENSE_CAP, krylov_dim=30, krylov_tol=1e-10):
        self.H = _as_operator(H)
        self.dim = self.H.shape[0]
        self.krylov_dim = krylov_dim
        self.krylov_tol = krylov_tol
        self.dense = self.dim <= dense_cap
        self._eig = None

    @property
    def eig(self):
        if self._eig is None:
            dense = self.H.toarray() if sp.issparse(self.H) else self.H
            self._eig = sla.eigh(dense)
        return self._eig

    def evolve(self, psi, t):
        """``exp(-iHt) psi`` for a vector or a ``(dim, k)`` block."""
        if t == 0:
            return np.array(psi, dtype=complex)
        if self.dense:
            w, V = self.eig
            c = V.conj().T @ psi
            phase = np.exp(-1j * w * t)
            return V @ (phase * c if c.ndim == 1 else phase[:, None] * c)
        psi = np.asarray(psi, dtype=complex)
        if psi.ndim == 2:
            return np.column_stack([self._krylov(psi[:, k], t) for k in range(psi.shape[1])])
        return self._krylov(psi, t)

    def evolve_times(self, psi, times):
        """States at each time as rows of a ``(len(times), dim)`` array."""
        times = np.asarray(times, dtype=float)
        if self.dense:
            w, V = self.eig
            c = V.conj().T @ psi
            return (np.exp(-1j * np.outer(times, w)) * c) @ V.T
        out = np.empty((len(times), self.dim), dtype=complex)
        order = np.argsort(times)
        cur, t_cur = np.asarray(psi, dtype=complex), 0.0
        # step forward from the previous time; negative times handled directly
        for k in order:
            t = times[k]
            if t < 0:
                out[k] = self._krylov(psi, t)
                continue
            cur = self._krylov(cur, t - t_cur)
            t_cur = t
            out[k] = cur
        return out

    def _krylov(self, v, t):
        v = np.asarray(v, dtype=complex)
        nrm = np.linalg.norm(v)
        if t == 0 or nrm == 0:
            return v.copy()
        H = self.H
        m_max = min(self.krylov_dim, self.dim)
        done = 0.0
        sign = np.sign(t)
        total = abs(t)
        tau = total
        w = v / nrm
        while done < total:
            V = np.zeros((m_max + 1, self.dim), dtype=complex)
            V[0] = w
            alpha = np.zeros(m_max)
            beta = np.zeros(m_max)
            m = m_max
            for j in range(m_max):
                u = H @ V[j]
                alpha[j] = np.vdot(V[j], u).real
                u -= alpha[j] * V[j]
                if j:
                    u -= beta[j - 1] * V[j - 1]
                u -= V[: j + 1].T @ (V[: j + 1].conj() @ u)
                beta[j] = np.linalg.norm(u)
                if beta[j] < 1e-13:
                    m = j + 1
                    break
                V[j + 1] = u / beta[j]
            T = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1) + np.diag(beta[: m - 1], -1)
            evals, S = np.linalg.eigh(T)
            happy = m < m_max or m == self.dim
            tau = min(tau, total - done)
            while True:
                c = S @ (np.exp(-1j * sign * evals * tau) * S[0].conj())
                err = 0.0 if happy else beta[m - 1] * abs(c[-1])
                if err <= self.krylov_tol:
                    break
                tau *= 0.5
                if tau < 1e-12 * max(total, 1.0):
                    raise ConvergenceError("Krylov step size underflow", err)
            w = V[:m].T @ c
            w /= np.linalg.norm(w)
            done += tau
            if err < 0.1 * self.krylov_tol:
                tau *= 1.5
        return nrm * w


_PROPAGATORS: dict = {}


def _cached_propagator(H, dense_cap):
    key = (id(H), dense_cap)
    entry = _PROPAGATORS.get(key)
    if entry is not None and entry[0]() is H:
        return entry[1]
    prop = Propagator(H, dense_cap=dense_cap)
    try:
        ref = weakref.ref(H, lambda _, k=key, cache=_PROPAGATORS: cache.pop(k, None))
    except TypeError:
        return prop
    _PROPAGATORS[key] = (ref, prop)
    return prop


def propagate(H, psi, t, dense_cap=DENSE_CAP):
    """``exp(-iHt) psi``; eigendecompositions are cached per matrix object."""
    prop = _cached_propagator(H, dense_cap)
    if isinstance(psi, SectorWaveFunction):
        return SectorWaveFunction(psi.sector, prop.evolve(psi.amps, t))
    return prop.evolve(np.asarray(psi, dtype=complex), t)

"""Long-time propagation inside sampled subspaces and Loschmidt accumulation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigensolver import DENSE_CAP, Propagator, SizeCapError
from .fock import FockError, build_hamiltonian

__all__ = [
    "MERGED_DIM_CAP",
    "EXHAUSTIVE_EPS",
    "STOCHASTIC",
    "EXHAUSTIVE",
    "DegenerateSampleError",
    "TimeGrid",
    "CorrelatorSeries",
    "ProjectedEvolution",
    "project_and_propagate",
    "overlap_series",
    "local_estimator",
    "LoschmidtAccumulator",
    "accumulate_loschmidt",
    "assemble_correlator",
    "exhaustive_weights",
    "merged_loschmidt",
]

MERGED_DIM_CAP = 2**20
EXHAUSTIVE_EPS = 1e-24
STOCHASTIC, EXHAUSTIVE = "stochastic", "exhaustive"


class DegenerateSampleError(FockError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """Symmetric grid ``t_k = k * dt_long`` for ``k = -N .. N``."""

    t_max_long: float = 1000.0
    dt_long: float = 0.1

    def __post_init__(self):
        if not (self.t_max_long > 0 and self.dt_long > 0):
            raise ValueError("grid parameters must be positive")
        if self.n_half < 1:
            raise ValueError("grid has no points besides t = 0")

    @property
    def n_half(self):
        return int(round(self.t_max_long / self.dt_long))

    @property
    def T(self):
        """Effective half-window ``N * dt_long``."""
        return self.n_half * self.dt_long

    @property
    def times(self):
        return self.dt_long * np.arange(-self.n_half, self.n_half + 1)

    def __len__(self):
        return 2 * self.n_half + 1


@dataclass
class CorrelatorSeries:
    grid: TimeGrid
    loschmidt: np.ndarray
    e0: float = 0.0
    a_norm2: float = 1.0
    mode: str = STOCHASTIC
    stderr: np.ndarray | None = None
    g_a: np.ndarray | None = None

    @property
    def times(self):
        return self.grid.times


def _grid_phases(energies, grid):
    """Factor ``exp(-i E t_k)`` over the grid as ``outer[a] * inner[b]``.

    With ``k + N = a*B + b`` the full ``(len(grid), n)`` phase matrix never
    has to be formed; a sum over modes becomes one matrix product.
    """
    n_pts = len(grid)
    B = int(np.ceil(np.sqrt(n_pts)))
    A = -(-n_pts // B)
    dt, N = grid.dt_long, grid.n_half
    ta = (np.arange(A) * B - N) * dt
    tb = np.arange(B) * dt
    outer = np.exp(-1j * np.outer(ta, energies))
    inner = np.exp(-1j * np.outer(energies, tb))
    return outer, inner, n_pts


def _mode_sum(energies, coeffs, grid):
    """``sum_n coeffs[n] exp(-i energies[n] t_k)`` on every grid point."""
    outer, inner, n_pts = _grid_phases(energies, grid)
    return ((outer * coeffs) @ inner).ravel()[:n_pts]


def overlap_series(H, bra, ket, grid, dense_cap=DENSE_CAP, propagator=None):
    """``<bra| exp(-i H t_k) |ket>`` for every point of ``grid``."""
    prop = propagator if propagator is not None else Propagator(H, dense_cap=dense_cap)
    if prop.dense:
        w, V = prop.eig
        coeffs = (V.T @ np.conj(bra)) * (V.conj().T @ ket)
        return _mode_sum(w, coeffs, grid)
    out = np.empty(len(grid), dtype=complex)
    N = grid.n_half
    for direction in (1, -1):
        v = np.asarray(ket, dtype=complex)
        out[N] = np.vdot(bra, v)
        for k in range(1, N + 1):
            v = prop.evolve(v, direction * grid.dt_long)
            out[N + direction * k] = np.vdot(bra, v)
    return out


@dataclass
class ProjectedEvolution:
    """``exp(-i H_proj t)|x>`` for the Hamiltonian restricted to ``members``."""

    x: int
    members: tuple
    H_proj: object
    propagator: Propagator = field(repr=False)

    @property
    def dim(self):
        return len(self.members)

    @property
    def x_pos(self):
        return self.members.index(self.x)

    def start(self):
        e = np.zeros(self.dim, dtype=complex)
        e[self.x_pos] = 1.0
        return e

    def state(self, t):
        return self.propagator.evolve(self.start(), t)

    def states(self, times):
        """Rows are the restricted states at each of ``times``."""
        return self.propagator.evolve_times(self.start(), times)

    def bra(self, psi_A):
        return np.array([psi_A.amplitude(y) for y in self.members])

    def estimator_series(self, psi_A, grid):
        """``l(x, t_k)`` on every grid point without storing the states."""
        amp_x = psi_A.amplitude(self.x)
        _check_amp(amp_x)
        series = overlap_series(self.H_proj, self.bra(psi_A), self.start(), grid, propagator=self.propagator)
        return series / np.conj(amp_x)


def project_and_propagate(x, members, table, dense_cap=DENSE_CAP):
    """Project the Hamiltonian onto ``members`` and prepare the evolution of ``|x>``."""
    members = tuple(sorted(members))
    if x not in members:
        raise FockError("x must belong to its own subspace")
    H = build_hamiltonian(table, members)
    return ProjectedEvolution(x, members, H, Propagator(H, dense_cap=dense_cap))


def _check_amp(amp_x):
    if abs(amp_x) < 1e-14:
        raise DegenerateSampleError(f"|psi_A(x)| = {abs(amp_x):.2e} is too small to divide by")


def local_estimator(x, phi, psi_A, members):
    """``l(x,t) = sum_{y in S_x} psi_A*(y) phi(y) / psi_A*(x)``.

    ``phi`` is a restricted state over ``members`` or a stack of them (one
    per row), in which case an array of estimator values is returned.
    """
    amp_x = psi_A.amplitude(x)
    _check_amp(amp_x)
    bra = np.array([psi_A.amplitude(y) for y in members])
    return (np.asarray(phi) @ np.conj(bra)) / np.conj(amp_x)


def exhaustive_weights(psi_A, eps=EXHAUSTIVE_EPS):
    """``|psi_A(x)|^2`` for every determinant of the support.

    Entries with ``|psi_A(x)|^2 <= eps`` are rounding noise on symmetry
    zeros; each contributes at most ``sqrt(eps)`` to ``L_A``.
    """
    p = psi_A.probabilities()
    return {psi_A.sector.dets[i]: float(p[i]) for i in np.flatnonzero(p > eps)}


class LoschmidtAccumulator:
    """Streaming weighted mean of estimator series.

    Contributions must be added in a fixed order (callers sort by
    determinant word) so the floating-point reduction is reproducible.
    """

    def __init__(self, grid, mode=STOCHASTIC, n_samples=None):
        if mode not in (STOCHASTIC, EXHAUSTIVE):
            raise ValueError(f"unknown mode {mode!r}")
        self.grid = grid
        self.mode = mode
        self.n_samples = n_samples
        self.first = np.zeros(len(grid), dtype=complex)
        self.second = np.zeros(len(grid))
        self.total_weight = 0.0

    def add(self, weight, series):
        self.first += weight * series
        self.second += weight * np.abs(series) ** 2
        self.total_weight += weight

    def result(self, e0=0.0, a_norm2=1.0):
        stderr = None
        if self.mode == STOCHASTIC and self.n_samples and self.n_samples > 1:
            var = np.maximum(self.second - np.abs(self.first) ** 2, 0.0)
            stderr = np.sqrt(var / (self.n_samples - 1))
        return CorrelatorSeries(self.grid, self.first.copy(), e0, a_norm2, self.mode, stderr)


def accumulate_loschmidt(weights, estimators, grid, mode=STOCHASTIC, n_samples=None):
    """Weighted sum ``L_A(t) = sum_x w_x l(x, t)``.

    ``weights`` maps determinant -> weight (empirical frequencies in
    stochastic mode, ``|psi_A(x)|^2`` in exhaustive mode); ``estimators``
    maps determinant -> estimator series on ``grid``.
    """
    missing = [x for x in weights if x not in estimators]
    if missing:
        raise KeyError(f"no estimator for {len(missing)} sampled configuration(s)")
    acc = LoschmidtAccumulator(grid, mode, n_samples)
    for x in sorted(weights):
        acc.add(weights[x], np.asarray(estimators[x]))
    return acc.result()


def assemble_correlator(series, e0, a_norm2):
    """Fill ``g_a = exp(i E0 t) <A^dag A>_0 L_A(t)``."""
    series.e0 = float(e0)
    series.a_norm2 = float(a_norm2)
    series.g_a = np.exp(1j * e0 * series.times) * a_norm2 * series.loschmidt
    return series


def merged_loschmidt(weights, psi_A, members, table, grid, mode=STOCHASTIC, n_samples=None,
                     dense_cap=DENSE_CAP, dim_cap=MERGED_DIM_CAP):
    """Loschmidt series with every configuration evolved in the union subspace.

    With a single projected Hamiltonian the weighted sum collapses to one
    overlap ``<psi_A|exp(-i H_U t)|chi>`` where ``chi(x) = w_x / psi_A*(x)``.
    """
    members = tuple(sorted(members))
    if len(members) > dim_cap:
        raise SizeCapError(f"merged subspace has {len(members)} states, cap is {dim_cap}")
    pos = {y: i for i, y in enumerate(members)}
    bra = np.array([psi_A.amplitude(y) for y in members])
    chi = np.zeros(len(members), dtype=complex)
    for x in sorted(weights):
        amp_x = psi_A.amplitude(x)
        _check_amp(amp_x)
        chi[pos[x]] = weights[x] / np.conj(amp_x)
    H = build_hamiltonian(table, members)
    prop = Propagator(H, dense_cap=dense_cap)
    series = overlap_series(H, bra, chi, grid, propagator=prop)
    stderr = None
    if mode == STOCHASTIC and n_samples and n_samples > 1:
        # per-x series are needed for the spread; only affordable when dense
        if prop.dense:
            acc = LoschmidtAccumulator(grid, mode, n_samples)
            for x in sorted(weights):
                e = np.zeros(len(members), dtype=complex)
                e[pos[x]] = 1.0
                acc.add(weights[x], overlap_series(H, bra, e, grid, propagator=prop) / np.conj(psi_A.amplitude(x)))
            stderr = acc.result().stderr
    return CorrelatorSeries(grid, series, mode=mode, stderr=stderr)

"""Noise-free stand-in for the quantum processor.

Sampled configurations ``x`` are evolved exactly for a few short times and
measured in the determinant basis; the observed outcomes form the local
subspace ``S_x``.  Every random stream is keyed by ``(seed, purpose, x,
round)`` with a counter-based generator (Philox), so results do not depend on
the order in which configurations are processed, and draws within a stream
are prefix-stable: asking for more shots only appends outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigensolver import DENSE_CAP, Propagator

__all__ = [
    "EmulatorConfig",
    "BornSamples",
    "SubspaceSample",
    "stream",
    "born_sample",
    "measure_evolved",
    "measure_many",
    "exact_support",
    "SUPPORT_EPS",
]

SUPPORT_EPS = 1e-12
_BORN, _MEASURE = 0, 1


@dataclass(frozen=True)
class EmulatorConfig:
    """Short-time measurement protocol.

    Rounds are taken at ``t = j * t_step`` for ``j = 0 .. n_steps`` with
    ``shots_per_step`` fresh projective measurements each.
    """

    t_step: float = 1.0
    n_steps: int = 10
    shots_per_step: int = 4096
    seed: int = 0
    n_samples: int = 1_000_000

    def __post_init__(self):
        if self.shots_per_step < 1:
            raise ValueError("shots_per_step must be >= 1")
        if self.n_steps < 0:
            raise ValueError("n_steps must be >= 0")
        if not self.t_step > 0:
            raise ValueError("t_step must be positive")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    @property
    def t_max(self):
        return self.n_steps * self.t_step

    @property
    def times(self):
        return self.t_step * np.arange(self.n_steps + 1)


def _words(d):
    out = []
    while True:
        out.append(d & 0xFFFFFFFF)
        d >>= 32
        if not d:
            return out


def stream(seed, purpose, *keys):
    """Philox generator keyed by the seed and an arbitrary tuple of ints."""
    spawn = [purpose]
    for k in keys:
        w = _words(k)
        spawn += [len(w), *w]
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(spawn))
    return np.random.Generator(np.random.Philox(ss))


def _inverse_cdf(probs, u):
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, u * cdf[-1], side="right")
    last = int(np.flatnonzero(probs > 0)[-1])
    return np.minimum(idx, last)


@dataclass
class BornSamples:
    """Unique sampled determinants with their multiplicities.

    ``dets`` follow the sector ordering; ``counts`` sum to ``n_samples``.
    """

    dets: list
    counts: np.ndarray
    n_samples: int

    @property
    def frequencies(self):
        return self.counts / self.n_samples

    def __len__(self):
        return len(self.dets)


def born_sample(psi_A, n_samples, seed):
    """Draw ``n_samples`` determinants i.i.d. from ``|psi_A(x)|^2``."""
    probs = psi_A.probabilities()
    u = stream(seed, _BORN).random(n_samples)
    idx = _inverse_cdf(probs, u)
    uniq, counts = np.unique(idx, return_counts=True)
    return BornSamples([psi_A.sector.dets[i] for i in uniq], counts, n_samples)


@dataclass
class SubspaceSample:
    """Local subspace discovered from configuration ``x``.

    ``members`` is sorted by determinant word and always contains ``x``;
    ``first_hit`` maps each member to the earliest round time it was seen
    (``x`` itself is recorded at 0).
    """

    x: int
    members: tuple
    first_hit: dict = field(default_factory=dict)

    @property
    def dim(self):
        return len(self.members)


def _propagator(H, propagator, dense_cap):
    return propagator if propagator is not None else Propagator(H, dense_cap=dense_cap)


def measure_many(xs, H_full, sector, cfg, propagator=None, dense_cap=DENSE_CAP, block=256):
    """Emulated measurement rounds for every configuration in ``xs``.

    Returns a dict ``x -> SubspaceSample``.  ``H_full`` is the Hamiltonian
    over ``sector.dets``.
    """
    prop = _propagator(H_full, propagator, dense_cap)
    xs = list(xs)
    hits = {x: {x: 0.0} for x in xs}
    dets = sector.dets
    for start in range(0, len(xs), block):
        chunk = xs[start : start + block]
        cols = np.array([sector.index[x] for x in chunk])
        X = np.zeros((len(dets), len(chunk)), dtype=complex)
        X[cols, np.arange(len(chunk))] = 1.0
        Phi, t_prev = X, 0.0
        for j, t in enumerate(cfg.times):
            # step from the previous round; the Krylov path never restarts from t = 0
            if t != t_prev:
                Phi = prop.evolve(Phi, t - t_prev)
                t_prev = t
            P = np.abs(Phi) ** 2
            for k, x in enumerate(chunk):
                u = stream(cfg.seed, _MEASURE, x, j).random(cfg.shots_per_step)
                seen = hits[x]
                for i in np.unique(_inverse_cdf(P[:, k], u)):
                    seen.setdefault(dets[i], float(t))
    return {x: SubspaceSample(x, tuple(sorted(h)), h) for x, h in hits.items()}


def measure_evolved(x, H_full, sector, cfg, propagator=None, dense_cap=DENSE_CAP):
    """Subspace ``S_x`` observed from the short-time evolution of ``|x>``."""
    return measure_many([x], H_full, sector, cfg, propagator, dense_cap)[x]


def exact_support(x, H_full, sector, times, eps=SUPPORT_EPS, propagator=None, dense_cap=DENSE_CAP):
    """Determinants ``y`` with ``|<y|U(t)|x>|^2 > eps`` for some ``t`` in ``times``."""
    prop = _propagator(H_full, propagator, dense_cap)
    e_x = sector.basis_vector(x)
    mask = np.zeros(len(sector), dtype=bool)
    for t in times:
        phi = e_x if t == 0 else prop.evolve(e_x, t)
        mask |= np.abs(phi) ** 2 > eps
    return {sector.dets[i] for i in np.flatnonzero(mask)}

"""Fourier spectra of correlator series, peak extraction and reference matching.

The discrete transform is normalised as

    G(w_m) = dt / (2T) * sum_k exp(i w_m t_k) G_A(t_k),   w_m = m * pi / T,

so an isolated mode ``c exp(-i D t)`` with ``D`` on the grid gives a peak of
height ``c (1 + 1/2N)``.  The frequency step equals the resolution ``pi/T``;
the window is rectangular.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DEFAULT_THRESHOLD",
    "Peak",
    "SpectrumResult",
    "ComparisonReport",
    "fourier_spectrum",
    "extract_peaks",
    "compare_to_reference",
    "default_match_tol",
    "level_errors",
]

DEFAULT_THRESHOLD = 5e-3
_REFINE_FLOOR = 1e-3  # neighbours below this fraction of the peak: no refinement


@dataclass(frozen=True)
class Peak:
    omega: float
    height: float
    interp_refined: bool
    bin: int


@dataclass
class SpectrumResult:
    omega: np.ndarray
    values: np.ndarray
    resolution: float
    T: float
    peaks: list = field(default_factory=list)
    threshold: float | None = None
    n_half: int = 0

    @property
    def magnitude(self):
        return np.abs(self.values)

    def imag_fraction(self):
        """Largest imaginary part relative to the largest real part.

        Zero for a Hermitian-symmetric series; reported as a diagnostic.
        """
        re = np.max(np.abs(self.values.real), initial=0.0)
        return float(np.max(np.abs(self.values.imag), initial=0.0) / re) if re > 0 else 0.0

    @property
    def peak_omegas(self):
        return np.array([p.omega for p in self.peaks])


def fourier_spectrum(series, omega_max=None):
    """Transform ``series.g_a`` onto ``w_m = m pi/T``, ``0 <= w_m <= omega_max``.

    ``omega_max`` defaults to the Nyquist frequency ``pi / dt``.
    """
    if series.g_a is None:
        raise ValueError("correlator not assembled")
    grid = series.grid
    g = np.asarray(series.g_a, dtype=complex)
    N, dt = grid.n_half, grid.dt_long
    if g.shape != (2 * N + 1,):
        raise ValueError("series does not live on a symmetric grid")
    T = N * dt
    # fold k = -N..N onto a period-2N sequence; t = -T and t = T share a phase
    folded = np.zeros(2 * N, dtype=complex)
    folded[:N] = g[N : 2 * N]
    folded[N] = g[2 * N] + g[0]
    folded[N + 1 :] = g[1:N]
    full = np.fft.ifft(folded) * (2 * N)
    m_max = N if omega_max is None else min(N, int(np.floor(omega_max * T / np.pi + 1e-9)))
    m = np.arange(m_max + 1)
    return SpectrumResult(
        omega=m * np.pi / T,
        values=full[: m_max + 1] * dt / (2 * T),
        resolution=np.pi / T,
        T=T,
        n_half=N,
    )


def _window_gain(delta, n_half):
    """Rectangular-window response at ``delta`` bins from a mode (1 on the mode)."""
    if abs(delta) < 1e-12:
        return 1.0
    x = np.pi * delta
    return abs(np.sin(x) / (2 * n_half * np.tan(x / (2 * n_half))))


def extract_peaks(spec, threshold=DEFAULT_THRESHOLD):
    """Local maxima of ``|G(w)|`` above ``threshold``.

    Positions are refined by a parabola through the log-magnitudes of the
    three bins around the maximum, with the offset clamped to half a bin so
    a refined peak stays within one grid spacing of its local maximum.
    Heights undo the scalloping loss of the rectangular window: the offset
    of an isolated mode follows exactly from the ratio of the maximum to its
    larger neighbour, and the bin value is divided by the window response
    there.
    """
    mag = spec.magnitude
    n = len(mag)
    step = spec.resolution
    n_half = max(spec.n_half, 1)
    peaks = []
    for m in range(n):
        c = mag[m]
        if c <= threshold:
            continue
        left = mag[m - 1] if m > 0 else -np.inf
        right = mag[m + 1] if m + 1 < n else -np.inf
        if not (c >= left and c > right):
            continue
        omega, refined = spec.omega[m], False
        if 0 < m < n - 1 and min(left, right) > _REFINE_FLOOR * c:
            lm, l0, lp = np.log(left), np.log(c), np.log(right)
            denom = lm - 2 * l0 + lp
            if denom < 0:
                delta = float(np.clip(0.5 * (lm - lp) / denom, -0.5, 0.5))
                omega = spec.omega[m] + delta * step
                refined = True
        side = max(left, right, 0.0)
        height = c / _window_gain(side / (c + side), n_half)
        peaks.append(Peak(float(omega), float(height), refined, m))
    spec.peaks = peaks
    spec.threshold = threshold
    return spec


def default_match_tol(resolution):
    """Resolution plus half a bin of interpolation slack."""
    return 1.5 * resolution


@dataclass
class ComparisonReport:
    """Outcome of matching extracted peaks to exact excitation energies.

    ``matched`` rows are ``(reference_gap, weight, peak_omega, abs_error)``.
    ``merged`` rows have the same layout and hold weighted levels that lie
    within one resolution step of an already matched level, so the grid
    cannot separate them; they share that level's peak.  ``unweighted`` lists peaks that sit on a reference level whose weight is
    below the threshold; ``spurious`` lists peaks near no reference level.
    """

    matched: list
    merged: list
    misses: list
    spurious: list
    unweighted: list
    match_tol: float
    threshold: float

    @property
    def max_error(self):
        return max((row[3] for row in self.matched + self.merged), default=0.0)

    @property
    def ok(self):
        return not self.misses and not self.spurious

    def to_dict(self):
        return {
            "matched": [dict(zip(("reference", "weight", "peak", "abs_error"), r)) for r in self.matched],
            "merged": [dict(zip(("reference", "weight", "peak", "abs_error"), r)) for r in self.merged],
            "misses": [dict(zip(("reference", "weight"), r)) for r in self.misses],
            "spurious": list(self.spurious),
            "unweighted": [dict(zip(("reference", "weight", "peak"), r)) for r in self.unweighted],
            "match_tol": self.match_tol,
            "threshold": self.threshold,
        }


def _greedy_pairs(peaks, refs, tol):
    pairs = sorted(
        (abs(p - r), i, j) for i, p in enumerate(peaks) for j, r in enumerate(refs) if abs(p - r) <= tol
    )
    used_p, used_r, out = set(), set(), []
    for dist, i, j in pairs:
        if i in used_p or j in used_r:
            continue
        used_p.add(i)
        used_r.add(j)
        out.append((i, j))
    return out


def compare_to_reference(spec, ref, match_tol=None, threshold=None, weight_floor=1e-10):
    """Greedy nearest matching of peaks to reference gaps with weight above threshold.

    A weighted level left without a peak counts as merged, not missed, when
    it lies within ``spec.resolution`` of a matched level and within
    ``match_tol`` of that level's peak.
    """
    threshold = spec.threshold if threshold is None else threshold
    if threshold is None:
        threshold = DEFAULT_THRESHOLD
    tol = default_match_tol(spec.resolution) if match_tol is None else match_tol
    gaps, weights = ref.levels()
    strong = np.flatnonzero(weights > threshold)
    peaks = spec.peak_omegas
    pairs = _greedy_pairs(peaks, gaps[strong], tol)
    matched = []
    hit_p = set()
    hit_r = set()
    for i, j in pairs:
        g = gaps[strong[j]]
        matched.append((float(g), float(weights[strong[j]]), float(peaks[i]), float(abs(peaks[i] - g))))
        hit_p.add(i)
        hit_r.add(j)
    merged, misses = [], []
    for j, k in enumerate(strong):
        if j in hit_r:
            continue
        g = gaps[k]
        near = [row for row in matched if abs(row[0] - g) <= spec.resolution and abs(row[2] - g) <= tol]
        if near:
            p = min(near, key=lambda row: abs(row[0] - g))[2]
            merged.append((float(g), float(weights[k]), p, float(abs(p - g))))
        else:
            misses.append((float(g), float(weights[k])))
    weak = np.flatnonzero((weights > weight_floor) & (weights <= threshold))
    spurious, unweighted = [], []
    for i, p in enumerate(peaks):
        if i in hit_p:
            continue
        near = weak[np.abs(gaps[weak] - p) <= tol] if len(weak) else weak
        if len(near):
            k = near[np.argmin(np.abs(gaps[near] - p))]
            unweighted.append((float(gaps[k]), float(weights[k]), float(p)))
        else:
            spurious.append(float(p))
    matched.sort()
    merged.sort()
    return ComparisonReport(matched, merged, misses, spurious, unweighted, float(tol), float(threshold))


def level_errors(spec, ref, threshold=None):
    """Distance from each weighted reference level to the nearest extracted peak.

    Returns ``(gaps, errors)`` over levels with weight above ``threshold``;
    errors are ``inf`` when no peak was extracted.
    """
    threshold = spec.threshold if threshold is None else threshold
    if threshold is None:
        threshold = DEFAULT_THRESHOLD
    gaps, weights = ref.levels()
    strong = gaps[weights > threshold]
    peaks = spec.peak_omegas
    if len(peaks) == 0:
        return strong, np.full(len(strong), np.inf)
    return strong, np.min(np.abs(strong[:, None] - peaks[None, :]), axis=1)

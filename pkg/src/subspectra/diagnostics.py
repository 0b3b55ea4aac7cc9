"""Variance of the two Loschmidt-amplitude estimators, by exhaustive enumeration.

Sampling strategy: draw ``x ~ |psi_A(x)|^2`` and average

    l(x) = <psi_A|U(t)|x> / psi_A*(x).

Alternative strategy: additionally draw ``y ~ p(y|x) = |<y|U(t)|x>|^2`` and
average

    f(y, x) = psi_A*(y) / psi_A*(x) / conj(<y|U(t)|x>),

which is unbiased because ``p(y|x) f(y, x) = psi_A*(y) <y|U|x> / psi_A*(x)``.
Its second moment is ``sum_y p(y) dim S_y`` where ``dim S_y`` counts the
configurations ``x`` of the support of ``psi_A`` with ``p(y|x) > eps``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigensolver import Propagator, SizeCapError
from .emulator import SUPPORT_EPS, stream

__all__ = [
    "ENUMERATION_CAP",
    "ALT_ENUMERATION_CAP",
    "VarianceReport",
    "sampling_strategy_variance",
    "alt_estimator_value",
    "alt_estimator_variance",
]

ENUMERATION_CAP = 4096
ALT_ENUMERATION_CAP = 1024  # the alternative estimator needs the full dense U(t)
_STRATEGY, _ALT = 2, 3


@dataclass
class VarianceReport:
    """Exact, predicted and empirical variance of one estimator at time ``t``.

    ``exact_var`` comes from enumerating every outcome; ``predicted_var`` is
    the closed form; ``empirical_var`` is the sample variance of ``n_draws``
    random draws and ``empirical_mean`` their average (both NaN when no
    draws were requested).  ``bound`` is the
    general upper bound (1 for the sampling strategy).
    """

    t: float
    n_draws: int
    empirical_var: float
    predicted_var: float
    exact_var: float
    l_a_exact: complex
    mean_exact: complex
    bound: float = np.nan
    support_profile: dict = field(default_factory=dict)
    closure: float = 1.0
    empirical_mean: complex = complex(np.nan, np.nan)


def _amps(psi_A):
    return psi_A.amps if hasattr(psi_A, "amps") else np.asarray(psi_A, dtype=complex)


def _check_size(H, cap=ENUMERATION_CAP):
    if H.shape[0] > cap:
        raise SizeCapError(f"dimension {H.shape[0]} too large for enumeration (cap {cap})")


def _sample_var(values):
    if len(values) < 2:
        return float("nan")
    return float(np.sum(np.abs(values - values.mean()) ** 2) / (len(values) - 1))


def sampling_strategy_variance(psi_A, H, t, n_draws=0, seed=0, propagator=None):
    """Exact variance of ``l(x)`` under ``x ~ |psi_A|^2``.

    ``predicted_var`` is ``1 - |L_A|^2``; it equals ``exact_var`` whenever
    ``U(t)^dag psi_A`` stays inside the support of ``psi_A`` (``closure == 1``),
    e.g. for a fully supported state, and bounds it otherwise.
    """
    _check_size(H)
    a = _amps(psi_A)
    prop = propagator if propagator is not None else Propagator(H, dense_cap=ENUMERATION_CAP)
    p = np.abs(a) ** 2
    supp = np.flatnonzero(p > 0)
    # <psi_A|U(t)|x> = conj((U(-t) psi_A)[x])
    back = np.conj(prop.evolve(a, -t))
    ell = back[supp] / np.conj(a[supp])
    l_a = complex(np.vdot(a, prop.evolve(a, t)))
    mean = complex(np.sum(p[supp] * ell))
    exact = float(np.sum(p[supp] * np.abs(ell) ** 2) - abs(mean) ** 2)
    closure = float(np.sum(np.abs(back[supp]) ** 2))
    emp, emp_mean = float("nan"), complex(np.nan, np.nan)
    if n_draws:
        u = stream(seed, _STRATEGY, int(round(t * 1e6)) & 0xFFFFFFFF).random(n_draws)
        cdf = np.cumsum(p[supp])
        draws = np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), len(supp) - 1)
        emp, emp_mean = _sample_var(ell[draws]), complex(ell[draws].mean())
    return VarianceReport(
        t=float(t), n_draws=n_draws, empirical_var=emp, predicted_var=1.0 - abs(l_a) ** 2,
        exact_var=exact, l_a_exact=l_a, mean_exact=mean, bound=1.0, closure=closure,
        empirical_mean=emp_mean,
    )


def alt_estimator_value(psi_x, psi_y, amp_yx):
    """``f(y, x)`` from the amplitudes ``psi_A(x)``, ``psi_A(y)`` and ``<y|U(t)|x>``."""
    if amp_yx == 0:
        raise ZeroDivisionError("transition amplitude vanishes; y cannot be drawn from x")
    if psi_x == 0:
        raise ZeroDivisionError("psi_A(x) vanishes; x cannot be drawn")
    return np.conj(psi_y) / np.conj(psi_x) / np.conj(amp_yx)


def _unitary(H, t, propagator=None):
    prop = propagator if propagator is not None else Propagator(H, dense_cap=ENUMERATION_CAP)
    return prop.evolve(np.eye(H.shape[0], dtype=complex), t)


def alt_estimator_variance(psi_A, H, t, eps=SUPPORT_EPS, n_draws=0, seed=0, propagator=None):
    """Exact and closed-form variance of ``f(y, x)``.

    The enumeration visits every pair with ``p(x) > 0`` and ``p(y|x) > eps``
    and evaluates ``f`` pair by pair; the closed form is
    ``sum_y p(y) dim S_y - |L_A|^2``.  ``bound`` holds ``dim - |L_A|^2``,
    the value reached when every transition amplitude is nonzero.
    """
    _check_size(H, ALT_ENUMERATION_CAP)
    a = _amps(psi_A)
    n = len(a)
    U = _unitary(H, t, propagator)  # U[y, x] = <y|U(t)|x>
    p = np.abs(a) ** 2
    P = np.abs(U) ** 2
    supp = np.flatnonzero(p > 0)
    reach = P[:, supp] > eps  # reach[y, j]: y reachable from x = supp[j]
    dim_S = reach.sum(axis=1)
    l_a = complex(np.vdot(a, U @ a))

    first = 0j
    second = 0.0
    for j, x in enumerate(supp):
        for y in np.flatnonzero(reach[:, j]):
            f = alt_estimator_value(a[x], a[y], U[y, x])
            w = p[x] * P[y, x]
            first += w * f
            second += w * abs(f) ** 2
    exact = second - abs(first) ** 2
    predicted = float(np.sum(p * dim_S)) - abs(l_a) ** 2

    emp, emp_mean = float("nan"), complex(np.nan, np.nan)
    if n_draws:
        rng = stream(seed, _ALT, int(round(t * 1e6)) & 0xFFFFFFFF)
        cdf_x = np.cumsum(p[supp])
        xs = supp[np.minimum(np.searchsorted(cdf_x, rng.random(n_draws) * cdf_x[-1], side="right"), len(supp) - 1)]
        uy = rng.random(n_draws)
        cdf_y = np.cumsum(np.where(P > eps, P, 0.0), axis=0)
        vals = np.empty(n_draws, dtype=complex)
        for k, (x, u) in enumerate(zip(xs, uy)):
            col = cdf_y[:, x]
            y = min(int(np.searchsorted(col, u * col[-1], side="right")), n - 1)
            vals[k] = alt_estimator_value(a[x], a[y], U[y, x])
        emp, emp_mean = _sample_var(vals), complex(vals.mean())
    profile = {int(y): int(dim_S[y]) for y in range(n) if p[y] > 0}
    return VarianceReport(
        t=float(t), n_draws=n_draws, empirical_var=emp, predicted_var=float(predicted),
        exact_var=float(exact), l_a_exact=l_a, mean_exact=complex(first),
        bound=float(n) - abs(l_a) ** 2, support_profile=profile,
        empirical_mean=emp_mean,
    )

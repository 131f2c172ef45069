"""Test statistic for sufficient follow-up, bootstrap calibration, and plug-in asymptotics.

The statistic is the gap between the extrapolated non-cure estimate and the
KM plateau height. Large values point to a KM curve that was cut short by the
end of follow-up rather than levelling off on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _parallel
from .cure import (
    Clamp,
    CureRateEstimate,
    EpsilonChoice,
    clamped_extrapolation,
    epsilon_star,
    estimate,
    gumbel_extrapolate,
)
from .data import MissingEventTime, SurvivalSample
from .km import censoring_km, km_fit, product_limit, variance_process


class DegenerateDenominator(ArithmeticError):
    """The three-point window is affine (``2b - a - c == 0``)."""


@dataclass(frozen=True)
class TestResult:
    t_n_stat: float
    critical_value: float
    p_value: float
    reject: bool
    alpha: float
    n_bootstrap: int
    seed: int
    estimate: CureRateEstimate
    n_degenerate_replicates: int
    n_eventless_replicates: int = 0
    fixed_epsilon: bool = False

    __test__ = False  # not a pytest class

    def as_dict(self) -> dict:
        est = self.estimate
        return {
            "t_n": self.t_n_stat,
            "p_naive": est.p_naive,
            "p_gumbel": est.p_gumbel,
            "p_gumbel_raw": est.p_gumbel_raw,
            "clamp": est.clamp.value,
            "epsilon": est.epsilon.epsilon,
            "epsilon_branch": est.epsilon.branch.value,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "reject": self.reject,
            "alpha": self.alpha,
            "bootstrap": self.n_bootstrap,
            "seed": self.seed,
            "fixed_epsilon": self.fixed_epsilon,
            "n_degenerate_replicates": self.n_degenerate_replicates,
            "n_eventless_replicates": self.n_eventless_replicates,
        }


@dataclass(frozen=True)
class AsymptoticDiagnostic:
    s1: float
    s2: float
    s3: float
    bias: float
    variance: float
    truncated: bool

    def as_dict(self) -> dict:
        return {
            "s1": self.s1,
            "s2": self.s2,
            "s3": self.s3,
            "bias": self.bias,
            "variance": self.variance,
            "truncated": self.truncated,
        }


def statistic(
    sample: SurvivalSample, eps: Optional[EpsilonChoice] = None
) -> tuple[float, CureRateEstimate]:
    """Return ``(T_n, estimate)``; ``eps`` defaults to the data-driven rule."""
    if sample.t_max_event is None:
        raise MissingEventTime()
    est = estimate(sample, eps)
    return est.p_gumbel - est.p_naive, est


class _Resampler:
    """Recomputes the statistic on multinomially reweighted copies of a sample.

    A bootstrap resample is represented by integer counts over the sorted
    original observations, which avoids re-sorting and re-validating it. Risk
    sets and event counts stay integers, so each replicate's KM values match
    those of :func:`km_fit` on the materialised resample bit for bit.
    """

    def __init__(self, sample: SurvivalSample):
        self.n = sample.n
        self.times = sample.times
        self.events = sample.events
        ev_times = sample.times[sample.events]
        self.uniq_ev, self.ev_group = np.unique(ev_times, return_inverse=True)
        self.first_pos = np.searchsorted(sample.times, self.uniq_ev, side="left")

    def draw_counts(self, rng: np.random.Generator) -> np.ndarray:
        return np.bincount(rng.integers(0, self.n, size=self.n), minlength=self.n)

    def stat(self, counts: np.ndarray, eps: Optional[float] = None) -> tuple[float, Clamp | None]:
        """Statistic for one reweighting; ``Clamp`` is ``None`` for an eventless resample."""
        d = np.bincount(
            self.ev_group, weights=counts[self.events], minlength=self.uniq_ev.size
        )
        keep = d > 0
        if not keep.any():
            return 0.0, None
        at_risk = np.cumsum(counts[::-1])[::-1][self.first_pos]
        knots = self.uniq_ev[keep]
        values = product_limit(d[keep], at_risk[keep])
        t_max = float(self.times[np.flatnonzero(counts)[-1]])
        width = epsilon_star(t_max, float(knots[-1])).epsilon if eps is None else eps
        pos = np.searchsorted(knots, [t_max - width, t_max - 0.5 * width, t_max], side="right")
        a, b, c = (float(values[i - 1]) if i else 0.0 for i in pos)
        value, clamp, _ = clamped_extrapolation(a, b, c, c)
        return value - c, clamp


def order_statistic_index(alpha: float, n_bootstrap: int) -> int:
    """1-based rank ``ceil((1 - alpha) B)`` of the critical value among sorted replicates."""
    # rounding first keeps e.g. 0.95 * 1000 from landing just above 950
    k = math.ceil(round((1.0 - alpha) * n_bootstrap, 9))
    return min(max(k, 1), n_bootstrap)


def critical_value(diffs, alpha: float) -> float:
    d = np.sort(np.asarray(diffs, dtype=float))
    return float(d[order_statistic_index(alpha, d.size) - 1])


def bootstrap_test(
    sample: SurvivalSample,
    alpha: float = 0.05,
    B: int = 1000,
    seed: int = 0,
    *,
    eps: Optional[EpsilonChoice] = None,
    fixed_epsilon: bool = False,
    workers: Optional[int] = None,
) -> TestResult:
    """Naive-bootstrap test of sufficient follow-up.

    Each replicate resamples ``n`` pairs with replacement and recomputes the
    statistic, re-deriving the window width from the resample unless
    `fixed_epsilon` is set (then the original sample's width is reused). The
    critical value is the ``ceil((1 - alpha) B)``-th smallest of the centred
    replicates ``T_b - T_n``; the p-value is ``(1 + #{T_b - T_n >= T_n}) / (B + 1)``.

    Replicate ``b`` draws from its own stream keyed by ``(seed, b)``, so the
    result does not depend on `workers`.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    t_n, est = statistic(sample, eps)
    rs = _Resampler(sample)
    rep_eps = est.epsilon.epsilon if fixed_epsilon else None

    def one(b: int) -> tuple[float, Clamp | None]:
        return rs.stat(rs.draw_counts(_parallel.stream(seed, b)), rep_eps)

    reps = _parallel.ordered_map(one, B, workers)
    t_b = np.array([r[0] for r in reps])
    clamps = [r[1] for r in reps]
    diffs = t_b - t_n
    crit = critical_value(diffs, alpha)
    exceed = int(np.count_nonzero(diffs >= t_n))
    return TestResult(
        t_n_stat=t_n,
        critical_value=crit,
        p_value=(1 + exceed) / (B + 1),
        reject=bool(t_n > crit),
        alpha=alpha,
        n_bootstrap=B,
        seed=seed,
        estimate=est,
        n_degenerate_replicates=sum(c is not Clamp.NONE for c in clamps),
        n_eventless_replicates=sum(c is None for c in clamps),
        fixed_epsilon=fixed_epsilon,
    )


def bootstrap_replicates(
    sample: SurvivalSample,
    B: int,
    seed: int,
    *,
    eps: Optional[EpsilonChoice] = None,
    fixed_epsilon: bool = False,
    workers: Optional[int] = None,
) -> np.ndarray:
    """The raw replicate statistics ``T_b`` behind :func:`bootstrap_test`."""
    _, est = statistic(sample, eps)
    rs = _Resampler(sample)
    rep_eps = est.epsilon.epsilon if fixed_epsilon else None
    reps = _parallel.ordered_map(
        lambda b: rs.stat(rs.draw_counts(_parallel.stream(seed, b)), rep_eps)[0], B, workers
    )
    return np.array(reps)


def asymptotic_coeffs(a: float, b: float, c: float) -> tuple[float, float, float]:
    """Weights of the limit of ``sqrt(n) (T_n - bias)`` on the KM process at the window points.

    `a`, `b`, `c` are the distribution at ``tau - eps``, ``tau - eps/2``, ``tau``.
    The third weight is taken as ``-(s1 + s2)``: the three always sum to zero,
    and deriving the last one from the other two keeps that exact in floating
    point even when the denominator is small and the weights are large.
    """
    den = (b - a) - (c - b)
    if den == 0:
        raise DegenerateDenominator(f"2b - a - c = 0 for window ({a}, {b}, {c})")
    den2 = den * den
    s1 = (b - c) ** 2 / den2
    s2 = 2.0 * (c - b) * (a - b) / den2
    if not (math.isfinite(s1) and math.isfinite(s2)):
        raise DegenerateDenominator(f"window ({a}, {b}, {c}) is numerically affine")
    return s1, s2, -(s1 + s2)


def asymptotic_diagnostic(
    sample: SurvivalSample, eps: Optional[EpsilonChoice] = None
) -> AsymptoticDiagnostic:
    """Plug-in bias and variance of the normal limit of the statistic.

    The limit variance is a quadratic form in the coefficients with entries
    ``(1-F)(t_i) (1-F)(t_j) v(t_min(i,j))`` at the window points
    ``t_max - eps``, ``t_max - eps/2``, ``t_max``. Values are reported whatever
    the population conditions behind the limit theory; they are advisory.
    """
    if sample.t_max_event is None:
        raise MissingEventTime()
    if eps is None:
        eps = epsilon_star(sample.t_max, sample.t_max_event)
    f = km_fit(sample)
    fc = censoring_km(sample)
    tau = sample.t_max
    points = [tau - eps.epsilon, tau - 0.5 * eps.epsilon, tau]
    a, b, c = (f.eval(t) for t in points)
    s = asymptotic_coeffs(a, b, c)
    surv = [1.0 - a, 1.0 - b, 1.0 - c]
    vs = [variance_process(sample, t, f=f, fc=fc) for t in points]
    var = 0.0
    for i in range(3):
        for j in range(3):
            var += s[i] * s[j] * surv[i] * surv[j] * vs[min(i, j)].value
    raw = gumbel_extrapolate(a, b, c)
    return AsymptoticDiagnostic(
        s1=s[0],
        s2=s[1],
        s3=s[2],
        bias=raw - c,
        variance=max(var, 0.0),
        truncated=any(v.truncated for v in vs),
    )

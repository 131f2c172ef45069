"""Non-cure proportion estimators: KM plateau height and Gumbel-tail extrapolation."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

from .data import MissingEventTime, SurvivalSample
from .km import StepFunction, km_fit


class EpsilonBranch(str, enum.Enum):
    STAR_RULE = "star_rule"
    T_MAX_FALLBACK = "t_max_fallback"
    USER_SUPPLIED = "user_supplied"


class Clamp(str, enum.Enum):
    NONE = "none"
    DENOMINATOR_ZERO = "denominator_zero"
    BELOW_NAIVE = "below_naive"
    ABOVE_ONE = "above_one"


@dataclass(frozen=True)
class EpsilonChoice:
    epsilon: float
    branch: EpsilonBranch

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        object.__setattr__(self, "branch", EpsilonBranch(self.branch))


@dataclass(frozen=True)
class CureRateEstimate:
    """Both estimates of the non-cure proportion for one sample.

    ``window`` holds the KM values at ``t_max - eps``, ``t_max - eps/2`` and
    ``t_max`` that fed the extrapolation.
    """

    p_naive: float
    p_gumbel: float
    p_gumbel_raw: Optional[float]
    epsilon: EpsilonChoice
    clamp: Clamp
    window: tuple[float, float, float]

    def as_dict(self) -> dict:
        return {
            "p_naive": self.p_naive,
            "p_gumbel": self.p_gumbel,
            "p_gumbel_raw": self.p_gumbel_raw,
            "epsilon": self.epsilon.epsilon,
            "epsilon_branch": self.epsilon.branch.value,
            "clamp": self.clamp.value,
        }


def phat_naive(f: StepFunction, t_max: float) -> float:
    """Height of the KM curve at the largest observed time."""
    return f.eval(t_max)


def epsilon_star(t_max: float, t_max_event: Optional[float]) -> EpsilonChoice:
    """Data-driven window width.

    Returns ``9/8 t_max - 1/4 t_max_event`` when ``2 (t_max - t_max_event) < t_max``
    and ``t_max`` otherwise. In the first branch the result lies strictly
    between ``2 (t_max - t_max_event)`` and ``t_max``, i.e. outside the zone
    where the statistic is identically zero.
    """
    if t_max_event is None:
        raise MissingEventTime()
    if not 0 < t_max_event <= t_max:
        raise ValueError(
            f"need 0 < t_max_event <= t_max, got t_max_event={t_max_event}, t_max={t_max}"
        )
    lo = 2.0 * (t_max - t_max_event)
    if lo < t_max:
        # t_max - (2 t_ev - t_max) / 8; the bracketed difference is exact
        eps = t_max - (2.0 * t_max_event - t_max) / 8.0
        # keep the open bounds near the branch boundary, where rounding can hit them
        if eps >= t_max:
            eps = math.nextafter(t_max, 0.0)
        if eps <= lo:
            eps = math.nextafter(lo, math.inf)
        return EpsilonChoice(eps, EpsilonBranch.STAR_RULE)
    return EpsilonChoice(float(t_max), EpsilonBranch.T_MAX_FALLBACK)


def user_epsilon(epsilon: float, t_max: float, t_max_event: Optional[float] = None) -> EpsilonChoice:
    """Validate a user-chosen window width against ``(0, t_max]``.

    Widths outside ``(t_max - t_max_event, t_max)`` are accepted with a
    warning: the extrapolation is flat there and the statistic collapses to 0.
    """
    if not 0 < epsilon <= t_max:
        raise ValueError(f"epsilon must lie in (0, {t_max}], got {epsilon}")
    if t_max_event is not None and not (t_max - t_max_event < epsilon < t_max):
        warnings.warn(
            f"epsilon={epsilon} is outside the admissible interval "
            f"({t_max - t_max_event}, {t_max})",
            stacklevel=2,
        )
    return EpsilonChoice(float(epsilon), EpsilonBranch.USER_SUPPLIED)


def gumbel_extrapolate(a: float, b: float, c: float) -> Optional[float]:
    """Three-point extrapolation ``a + (b - a)^2 / (2b - a - c)``.

    `a`, `b`, `c` are the distribution estimate at ``t - eps``, ``t - eps/2``
    and ``t``. Returns ``None`` when the denominator vanishes.

    Evaluated in the equivalent form ``c + (c - b)^2 / (2b - a - c)``, which
    returns `c` exactly whenever ``b == c``. That keeps the statistic at an
    exact zero on a flat right half-window instead of a rounding residue.
    """
    den = (b - a) - (c - b)
    if den == 0:
        return None
    return c + (c - b) ** 2 / den


def phat_gumbel(
    f: StepFunction, t_max: float, eps: EpsilonChoice, p_naive: float
) -> CureRateEstimate:
    """Extrapolated non-cure proportion, clamped into ``[p_naive, 1]``.

    Clamping order: undefined extrapolation, then below the plateau height,
    then above one.
    """
    a = f.eval(t_max - eps.epsilon)
    b = f.eval(t_max - 0.5 * eps.epsilon)
    c = f.eval(t_max)
    value, clamp, raw = clamped_extrapolation(a, b, c, p_naive)
    return CureRateEstimate(p_naive, value, raw, eps, clamp, (a, b, c))


def clamped_extrapolation(
    a: float, b: float, c: float, p_naive: float
) -> tuple[float, Clamp, Optional[float]]:
    raw = gumbel_extrapolate(a, b, c)
    if raw is None:
        return p_naive, Clamp.DENOMINATOR_ZERO, raw
    if raw < p_naive:
        return p_naive, Clamp.BELOW_NAIVE, raw
    if raw > 1.0:
        return 1.0, Clamp.ABOVE_ONE, raw
    return raw, Clamp.NONE, raw


def estimate(sample: SurvivalSample, eps: Optional[EpsilonChoice] = None) -> CureRateEstimate:
    """Fit the KM curve and compute both estimators; ``eps`` defaults to :func:`epsilon_star`."""
    if eps is None:
        eps = epsilon_star(sample.t_max, sample.t_max_event)
    f = km_fit(sample)
    p_n = phat_naive(f, sample.t_max)
    return phat_gumbel(f, sample.t_max, eps, p_n)

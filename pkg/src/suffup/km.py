"""Product-limit (Kaplan-Meier) estimation of the improper distribution F.

F here is the distribution of the latent failure time including the cured
mass at infinity, so the fitted curve levels off at the non-cure proportion
rather than at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .data import SurvivalSample


@dataclass(frozen=True)
class RiskTable:
    """Distinct uncensored times with their event counts and risk-set sizes."""

    times: np.ndarray
    events: np.ndarray
    at_risk: np.ndarray

    @property
    def rows(self) -> list[tuple[float, int, int]]:
        return [
            (float(t), int(d), int(r))
            for t, d, r in zip(self.times, self.events, self.at_risk)
        ]

    def __len__(self) -> int:
        return int(self.times.size)


def risk_table(sample: SurvivalSample) -> RiskTable:
    """Build the risk table. Events tied with censorings count as at risk."""
    times = sample.times
    ev_times = times[sample.events]
    uniq, counts = np.unique(ev_times, return_counts=True)
    at_risk = sample.n - np.searchsorted(times, uniq, side="left")
    return RiskTable(uniq, counts.astype(np.int64), at_risk.astype(np.int64))


def product_limit(events: np.ndarray, at_risk: np.ndarray) -> np.ndarray:
    """Values of the product-limit distribution estimate at each event time.

    Written as ``F_i = (R_1 - (R_i - d_i) * P_i) / R_1`` where
    ``P_i = prod_{j<i} (R_j - d_j) / R_{j+1}``. The ratios are exactly 1 between
    event times with no intervening censoring, so on uncensored data every
    value is a single correctly rounded ``k / n``. The textbook running product
    of ``1 - d/R`` accumulates rounding instead.
    """
    d = np.asarray(events, dtype=float)
    r = np.asarray(at_risk, dtype=float)
    if d.size == 0:
        return np.empty(0)
    surv = r - d
    scale = np.empty_like(r)
    scale[0] = 1.0
    if r.size > 1:
        np.cumprod(surv[:-1] / r[1:], out=scale[1:])
    return (r[0] - surv * scale) / r[0]


class StepFunction:
    """Right-continuous nondecreasing step function on ``[0, inf)``.

    Zero before the first knot; ``values[i]`` holds on ``[knots[i], knots[i+1])``.
    """

    __slots__ = ("knots", "values")

    def __init__(self, knots, values):
        k = np.asarray(knots, dtype=float)
        v = np.asarray(values, dtype=float)
        if k.shape != v.shape or k.ndim != 1:
            raise ValueError("knots and values must be 1-d arrays of equal length")
        if k.size > 1 and np.any(np.diff(k) <= 0):
            raise ValueError("knots must be strictly increasing")
        if v.size and (np.any(np.diff(v) < 0) or v[0] < 0 or v[-1] > 1):
            raise ValueError("values must be nondecreasing within [0, 1]")
        k.setflags(write=False)
        v.setflags(write=False)
        self.knots = k
        self.values = v

    def __call__(self, t):
        """Vectorized right-continuous evaluation."""
        idx = np.searchsorted(self.knots, t, side="right")
        padded = np.concatenate(([0.0], self.values))
        out = padded[idx]
        return float(out) if np.ndim(out) == 0 else out

    def eval(self, t: float) -> float:
        i = int(np.searchsorted(self.knots, t, side="right"))
        return float(self.values[i - 1]) if i else 0.0

    def eval_left(self, t: float) -> float:
        """Limit from the left, i.e. the value strictly before `t`."""
        i = int(np.searchsorted(self.knots, t, side="left"))
        return float(self.values[i - 1]) if i else 0.0

    def left_limits(self, t) -> np.ndarray:
        idx = np.searchsorted(self.knots, t, side="left")
        return np.concatenate(([0.0], self.values))[idx]

    def jumps(self) -> np.ndarray:
        return np.diff(self.values, prepend=0.0)

    def __len__(self) -> int:
        return int(self.knots.size)

    def __repr__(self) -> str:
        return f"StepFunction(knots={self.knots.size})"


def eval(f: StepFunction, t: float) -> float:
    return f.eval(t)


def eval_left(f: StepFunction, t: float) -> float:
    return f.eval_left(t)


def km_fit(sample: SurvivalSample) -> StepFunction:
    """Kaplan-Meier estimate of F; jumps only at distinct uncensored times."""
    rt = risk_table(sample)
    return StepFunction(rt.times, product_limit(rt.events, rt.at_risk))


def censoring_km(sample: SurvivalSample) -> StepFunction:
    """Reverse product-limit estimate of the censoring distribution."""
    return km_fit(SurvivalSample(sample.times, ~sample.events))


class VarianceEstimate(NamedTuple):
    value: float
    truncated: bool


def variance_process(sample: SurvivalSample, t: float, *, f=None, fc=None) -> VarianceEstimate:
    """Plug-in estimate of the variance function of the KM limit process.

    Sums ``dF(s) / [(1 - F(s)) (1 - F(s-)) (1 - Fc(s-))]`` over uncensored
    times ``s <= t``. Terms with a zero denominator are skipped and flagged
    through ``truncated``. Already-fitted `f` and `fc` may be passed in to
    avoid refitting.
    """
    if f is None:
        f = km_fit(sample)
    if fc is None:
        fc = censoring_km(sample)
    k = int(np.searchsorted(f.knots, t, side="right"))
    if k == 0:
        return VarianceEstimate(0.0, False)
    knots = f.knots[:k]
    vals = f.values[:k]
    prev = np.concatenate(([0.0], vals[:-1]))
    fc_left = fc.left_limits(knots)
    den = (1.0 - vals) * (1.0 - prev) * (1.0 - fc_left)
    ok = den > 0
    # fsum keeps the result monotone in t (terms are nonnegative)
    total = math.fsum((vals[ok] - prev[ok]) / den[ok])
    return VarianceEstimate(total, bool(np.any(~ok)))


def km_export_rows(f: StepFunction) -> list[tuple[float, float]]:
    return [(0.0, 0.0)] + [(float(t), float(v)) for t, v in zip(f.knots, f.values)]


def km_export_csv(f: StepFunction) -> str:
    """CSV with header ``t,F_hat``: the origin, then every knot and its post-jump value."""
    lines = ["t,F_hat"]
    lines.extend(f"{t!r},{v!r}" for t, v in km_export_rows(f))
    return "\n".join(lines) + "\n"

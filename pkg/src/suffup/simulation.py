"""Cure-mixture data generators and the Monte Carlo level/power harness."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _parallel
from .data import SurvivalSample
from .followup import bootstrap_test


class ScenarioError(ValueError):
    pass


_NUM = r"[0-9]+(?:\.[0-9]+)?(?:[eE][-+]?[0-9]+)?"
_ARITY = {"weibull": 2, "exponential": 1, "lognormal": 2, "uniform": 2}


@dataclass(frozen=True)
class Distribution:
    """A parametric law for latent failure or censoring times.

    ``weibull(shape, scale)`` has survival ``exp(-(t/scale)**shape)``,
    ``exponential(rate)`` has mean ``1/rate``, ``lognormal(mu, sigma)`` is
    parameterised on the log scale, and ``uniform(lo, hi)`` draws from
    ``(lo, hi]``.
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise ScenarioError(f"unknown distribution {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        if len(params) != _ARITY[self.kind]:
            raise ScenarioError(
                f"{self.kind} takes {_ARITY[self.kind]} parameter(s), got {len(params)}"
            )
        if not all(math.isfinite(p) for p in params):
            raise ScenarioError(f"parameters must be finite: {params}")
        if self.kind == "lognormal":
            if params[1] <= 0:
                raise ScenarioError("lognormal sigma must be positive")
        elif self.kind == "uniform":
            if not 0 <= params[0] < params[1]:
                raise ScenarioError("uniform needs 0 <= lo < hi")
        elif any(p <= 0 for p in params):
            raise ScenarioError(f"{self.kind} parameters must be positive")
        object.__setattr__(self, "params", params)

    @classmethod
    def parse(cls, text: str) -> "Distribution":
        """Parse ``weibull:<shape>:<scale>``, ``exponential:<rate>``,
        ``lognormal:<mu>:<sigma>`` or ``uniform:<lo>:<hi>``."""
        parts = text.strip().split(":")
        kind = parts[0].lower()
        if kind not in _ARITY:
            raise ScenarioError(f"unknown distribution {parts[0]!r} in {text!r}")
        if len(parts) - 1 != _ARITY[kind]:
            raise ScenarioError(f"{kind} takes {_ARITY[kind]} parameter(s): {text!r}")
        for p in parts[1:]:
            # lognormal location may be negative
            if not re.fullmatch(("-?" if kind == "lognormal" else "") + _NUM, p):
                raise ScenarioError(f"bad number {p!r} in {text!r}")
        return cls(kind, tuple(float(p) for p in parts[1:]))

    def __str__(self) -> str:
        return ":".join([self.kind, *(repr(p) for p in self.params)])

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        p = self.params
        if self.kind == "weibull":
            return p[1] * rng.weibull(p[0], size)
        if self.kind == "exponential":
            return rng.exponential(1.0 / p[0], size)
        if self.kind == "lognormal":
            return rng.lognormal(p[0], p[1], size)
        return p[0] + (p[1] - p[0]) * (1.0 - rng.random(size))

    def mean(self) -> float:
        p = self.params
        if self.kind == "weibull":
            return p[1] * math.gamma(1.0 + 1.0 / p[0])
        if self.kind == "exponential":
            return 1.0 / p[0]
        if self.kind == "lognormal":
            return math.exp(p[0] + 0.5 * p[1] ** 2)
        return 0.5 * (p[0] + p[1])

    def variance(self) -> float:
        p = self.params
        if self.kind == "weibull":
            g1 = math.gamma(1.0 + 1.0 / p[0])
            return p[1] ** 2 * (math.gamma(1.0 + 2.0 / p[0]) - g1 * g1)
        if self.kind == "exponential":
            return 1.0 / p[0] ** 2
        if self.kind == "lognormal":
            return (math.exp(p[1] ** 2) - 1.0) * math.exp(2.0 * p[0] + p[1] ** 2)
        return (p[1] - p[0]) ** 2 / 12.0


def weibull(shape: float, scale: float) -> Distribution:
    return Distribution("weibull", (shape, scale))


def exponential(rate: float = 1.0) -> Distribution:
    return Distribution("exponential", (rate,))


def lognormal(mu: float = 0.0, sigma: float = 1.0) -> Distribution:
    return Distribution("lognormal", (mu, sigma))


def uniform(lo: float, hi: float) -> Distribution:
    return Distribution("uniform", (lo, hi))


@dataclass(frozen=True)
class Scenario:
    failure: Distribution
    censoring: Distribution
    p: float
    n: int
    label: str = ""

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ScenarioError(f"p must be in (0, 1), got {self.p}")
        if int(self.n) != self.n or self.n < 1:
            raise ScenarioError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    def with_n(self, n: int) -> "Scenario":
        return replace(self, n=n)

    def as_dict(self) -> dict:
        return {
            "failure": str(self.failure),
            "censoring": str(self.censoring),
            "p": self.p,
            "n": self.n,
            "label": self.label,
        }


@dataclass(frozen=True)
class LatentDraw:
    """Everything drawn for one synthetic sample, including unobservables."""

    cured: np.ndarray
    failure: np.ndarray  # +inf for cured individuals
    censoring: np.ndarray
    sample: SurvivalSample


def gen_latent(scenario: Scenario, seed: int) -> LatentDraw:
    rng = np.random.Generator(np.random.PCG64(seed))
    n = scenario.n
    cured = rng.random(n) >= scenario.p
    t = scenario.failure.draw(rng, n)
    t[cured] = np.inf
    c = scenario.censoring.draw(rng, n)
    y = np.minimum(t, c)
    # a draw of exactly 0 has probability ~2**-53 but would be rejected as data
    y = np.maximum(y, np.finfo(float).tiny)
    return LatentDraw(cured, t, c, SurvivalSample(y, t <= c))


def gen_sample(scenario: Scenario, seed: int) -> SurvivalSample:
    """One sample from the cure mixture: cured with probability ``1 - p``,
    then ``Y = min(T, C)`` and ``delta = 1(T <= C)``."""
    return gen_latent(scenario, seed).sample


@dataclass(frozen=True)
class MonteCarloConfig:
    runs: int = 1000
    B: int = 500
    alpha: float = 0.05
    seed: int = 0
    fixed_epsilon: bool = False

    def __post_init__(self):
        if self.runs < 1 or self.B < 1:
            raise ValueError("runs and B must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def as_dict(self) -> dict:
        return {
            "runs": self.runs,
            "bootstrap": self.B,
            "alpha": self.alpha,
            "seed": self.seed,
            "fixed_epsilon": self.fixed_epsilon,
        }


@dataclass(frozen=True)
class PowerReport:
    rejection_rate: float
    mc_standard_error: float
    mean_censoring_rate: float
    mean_cure_fraction_observed: float
    runs_completed: int
    scenario: Scenario
    config: MonteCarloConfig
    reference_rate: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "rejection_rate": self.rejection_rate,
            "mc_standard_error": self.mc_standard_error,
            "mean_censoring_rate": self.mean_censoring_rate,
            "mean_cure_fraction_observed": self.mean_cure_fraction_observed,
            "runs_completed": self.runs_completed,
            "reference_rate": self.reference_rate,
            "scenario": self.scenario.as_dict(),
            "config": self.config.as_dict(),
        }


@dataclass(frozen=True)
class RunRecord:
    reject: bool
    censoring_rate: float
    cure_fraction: float
    t_n: float


def _run(scenario: Scenario, config: MonteCarloConfig, r: int) -> RunRecord:
    sample = gen_sample(scenario, _parallel.child_seed(config.seed, r, 0))
    cens = 1.0 - float(sample.events.mean())
    if sample.t_max_event is None:
        # an eventless dataset cannot be tested; counted as not rejecting
        return RunRecord(False, cens, 1.0, 0.0)
    res = bootstrap_test(
        sample,
        config.alpha,
        config.B,
        _parallel.child_seed(config.seed, r, 1),
        fixed_epsilon=config.fixed_epsilon,
        workers=1,
    )
    return RunRecord(res.reject, cens, 1.0 - res.estimate.p_naive, res.t_n_stat)


def simulate_runs(
    scenario: Scenario, config: MonteCarloConfig, workers: Optional[int] = None
) -> list[RunRecord]:
    """Per-run records; run ``r`` uses streams keyed by ``(seed, r)``."""

    return _parallel.ordered_map(lambda r: _run(scenario, config, r), config.runs, workers)


def rejection_rate(
    scenario: Scenario,
    config: MonteCarloConfig,
    workers: Optional[int] = None,
    reference_rate: Optional[float] = None,
) -> PowerReport:
    """Empirical rejection frequency of the bootstrap test on `scenario`."""
    records = simulate_runs(scenario, config, workers)
    runs = len(records)
    rate = sum(r.reject for r in records) / runs
    return PowerReport(
        rejection_rate=rate,
        mc_standard_error=math.sqrt(rate * (1.0 - rate) / runs),
        mean_censoring_rate=math.fsum(r.censoring_rate for r in records) / runs,
        mean_cure_fraction_observed=math.fsum(r.cure_fraction for r in records) / runs,
        runs_completed=runs,
        scenario=scenario,
        config=config,
        reference_rate=reference_rate,
    )


# ---------------------------------------------------------------------------
# Reference simulation grid: three failure laws, Weibull(1, lambda) censoring
# under H0 and U(0, mu] censoring under H1, p in {0.9, 0.7}, four sample sizes.
# Each cell carries its header censoring rate and reported rejection rates.

SAMPLE_SIZES = (400, 800, 1200, 1800)
LAMBDAS = (3.0, 2.5, 2.0, 1.5)
MUS = (3.5, 3.0, 2.5, 2.0)
PS = (0.9, 0.7)

_FAILURES = {
    1: weibull(1.5, 1.5),
    2: exponential(1.0),
    3: lognormal(0.0, 1.0),
}

# censoring-rate headers, columns ordered (param1 p=.9, param1 p=.7, param2 p=.9, ...)
_CENS = {
    (1, "h0"): (27, 43, 30, 45, 33, 48, 39, 52),
    (1, "h1"): (28, 44, 31, 46, 34, 49, 40, 53),
    (2, "h0"): (33, 47, 36, 50, 40, 53, 46, 58),
    (2, "h1"): (35, 50, 38, 52, 43, 56, 49, 60),
    (3, "h0"): (41, 54, 44, 57, 50, 61, 56, 66),
    (3, "h1"): (45, 57, 49, 60, 54, 64, 60, 69),
}

# rejection rates by sample size (rows) in the same column order
_RATES = {
    (1, "h0"): (
        (0.036, 0.067, 0.041, 0.056, 0.049, 0.043, 0.106, 0.038),
        (0.052, 0.053, 0.043, 0.053, 0.033, 0.042, 0.061, 0.031),
        (0.058, 0.047, 0.055, 0.057, 0.045, 0.044, 0.035, 0.031),
        (0.043, 0.047, 0.058, 0.047, 0.038, 0.048, 0.038, 0.038),
    ),
    (1, "h1"): (
        (0.711, 0.134, 0.860, 0.361, 0.922, 0.640, 0.852, 0.652),
        (0.930, 0.400, 0.971, 0.538, 0.973, 0.725, 0.930, 0.811),
        (0.990, 0.812, 0.992, 0.812, 0.990, 0.891, 0.971, 0.908),
        (0.996, 0.939, 0.996, 0.957, 0.994, 0.985, 0.974, 0.942),
    ),
    (2, "h0"): (
        (0.053, 0.049, 0.038, 0.043, 0.055, 0.049, 0.086, 0.035),
        (0.043, 0.057, 0.046, 0.054, 0.036, 0.044, 0.045, 0.023),
        (0.054, 0.047, 0.042, 0.051, 0.046, 0.047, 0.042, 0.038),
        (0.066, 0.046, 0.039, 0.040, 0.040, 0.042, 0.032, 0.035),
    ),
    (2, "h1"): (
        (0.266, 0.026, 0.341, 0.051, 0.486, 0.108, 0.536, 0.197),
        (0.496, 0.075, 0.624, 0.111, 0.705, 0.139, 0.747, 0.178),
        (0.817, 0.443, 0.898, 0.476, 0.938, 0.467, 0.942, 0.392),
        (0.956, 0.776, 0.981, 0.789, 0.992, 0.759, 0.995, 0.695),
    ),
    (3, "h0"): (
        (0.069, 0.036, 0.056, 0.031, 0.089, 0.033, 0.138, 0.056),
        (0.043, 0.037, 0.047, 0.033, 0.073, 0.034, 0.125, 0.029),
        (0.038, 0.034, 0.040, 0.027, 0.055, 0.029, 0.086, 0.029),
        (0.032, 0.018, 0.044, 0.031, 0.050, 0.021, 0.096, 0.021),
    ),
    (3, "h1"): (
        (0.258, 0.047, 0.310, 0.094, 0.384, 0.129, 0.483, 0.218),
        (0.544, 0.108, 0.590, 0.114, 0.620, 0.124, 0.647, 0.196),
        (0.885, 0.509, 0.878, 0.482, 0.899, 0.444, 0.884, 0.327),
        (0.966, 0.790, 0.972, 0.795, 0.978, 0.768, 0.977, 0.676),
    ),
}


@dataclass(frozen=True)
class GridCell:
    """Location of a scenario in the reference grid and what was reported there."""

    table: int
    hypothesis: str
    param: float
    p: float
    censoring_rate: float
    rejection_rates: dict = field(default_factory=dict)

    def name(self, n: Optional[int] = None) -> str:
        key = "lambda" if self.hypothesis == "h0" else "mu"
        base = f"table{self.table}:{self.hypothesis}:{key}{self.param:g}:p{self.p:g}"
        return base if n is None else f"{base}:n{n}"


@dataclass(frozen=True)
class Preset:
    scenario: Scenario
    expected_censoring_rate: float
    paper_cell: GridCell

    def __iter__(self):
        return iter((self.scenario, self.expected_censoring_rate, self.paper_cell))


def preset_scenarios(n: int = SAMPLE_SIZES[0]) -> list[Preset]:
    """All 48 cells of the reference level/power grid, each at sample size `n`."""
    out = []
    for table, failure in _FAILURES.items():
        for hyp, params in (("h0", LAMBDAS), ("h1", MUS)):
            cens = _CENS[(table, hyp)]
            rates = _RATES[(table, hyp)]
            for j, param in enumerate(params):
                for k, p in enumerate(PS):
                    col = 2 * j + k
                    censor = weibull(1.0, param) if hyp == "h0" else uniform(0.0, param)
                    cell = GridCell(
                        table=table,
                        hypothesis=hyp,
                        param=param,
                        p=p,
                        censoring_rate=cens[col] / 100.0,
                        rejection_rates={
                            size: rates[i][col] for i, size in enumerate(SAMPLE_SIZES)
                        },
                    )
                    out.append(
                        Preset(Scenario(failure, censor, p, n, cell.name()), cell.censoring_rate, cell)
                    )
    return out


_PRESET_RE = re.compile(
    r"table(?P<table>[123]):(?P<hyp>h[01]):(?P<key>lambda|mu)(?P<param>" + _NUM + r")"
    r":p(?P<p>" + _NUM + r")(?::n(?P<n>[0-9]+))?"
)


def resolve_preset(name: str) -> Preset:
    """Look up e.g. ``table1:h0:lambda2.5:p0.9:n800``; ``:n<size>`` is optional."""
    m = _PRESET_RE.fullmatch(name.strip().lower())
    if not m:
        raise ScenarioError(f"malformed preset name {name!r}")
    if (m["hyp"] == "h0") != (m["key"] == "lambda"):
        raise ScenarioError(f"{name!r}: h0 cells use lambda, h1 cells use mu")
    table, param, p = int(m["table"]), float(m["param"]), float(m["p"])
    n = int(m["n"]) if m["n"] else SAMPLE_SIZES[0]
    for preset in preset_scenarios(n):
        c = preset.paper_cell
        if (c.table, c.hypothesis, c.param, c.p) == (table, m["hyp"], param, p):
            label = c.name(n)
            return Preset(replace(preset.scenario, label=label), preset.expected_censoring_rate, c)
    raise ScenarioError(f"no reference grid cell named {name!r}")

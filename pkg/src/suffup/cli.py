"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 output I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import __version__
from .cure import user_epsilon
from .data import MissingEventTime, SurvivalDataError, SurvivalSample, load_csv, summarize
from .followup import DegenerateDenominator, asymptotic_diagnostic, bootstrap_test
from .km import km_export_csv, km_fit
from .simulation import (
    Distribution,
    MonteCarloConfig,
    Scenario,
    ScenarioError,
    rejection_rate,
    resolve_preset,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.4f}"
    return str(x)


def _emit(payload: dict, fmt: str, title: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return
    out.write(title + "\n")
    width = max(len(k) for k in payload)
    for key, value in payload.items():
        if isinstance(value, dict):
            out.write(f"  {key}:\n")
            for k2, v2 in value.items():
                out.write(f"    {k2:<{width}}  {_fmt(v2)}\n")
        else:
            out.write(f"  {key:<{width}}  {_fmt(value)}\n")


def _load(path: str) -> SurvivalSample:
    try:
        with open(path, "rb") as fh:
            return load_csv(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise DataError(f"{path} is not valid UTF-8") from None
    except SurvivalDataError as exc:
        raise DataError(f"{path}: {exc}") from None


def _probability(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError(f"must be in (0, 1), got {text}")
    return x


def _positive_int(text: str) -> int:
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return x


def _seed(text: str) -> int:
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return x


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def cmd_test(args, out) -> int:
    sample = _load(args.input)
    if sample.t_max_event is None:
        raise DataError(f"{args.input}: no uncensored observations")
    eps = None
    if args.epsilon is not None:
        try:
            eps = user_epsilon(args.epsilon, sample.t_max, sample.t_max_event)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    try:
        result = bootstrap_test(
            sample,
            args.alpha,
            args.bootstrap,
            args.seed,
            eps=eps,
            fixed_epsilon=args.fixed_epsilon,
        )
    except MissingEventTime:
        raise DataError(f"{args.input}: no uncensored observations") from None
    payload = result.as_dict()
    payload["n"] = sample.n
    if args.diagnostic:
        try:
            payload["diagnostic"] = asymptotic_diagnostic(sample, result.estimate.epsilon).as_dict()
        except DegenerateDenominator as exc:
            payload["diagnostic"] = {"error": str(exc)}
    _emit(payload, args.format, "sufficient follow-up test", out)
    return EXIT_OK


def cmd_km(args, out) -> int:
    sample = _load(args.input)
    text = km_export_csv(km_fit(sample))
    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"cannot write {args.out}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    try:
        reference_rate = None
        if args.preset:
            preset = resolve_preset(args.preset)
            scenario = preset.scenario
            reference_rate = preset.paper_cell.rejection_rates.get(scenario.n)
            if args.n is not None:
                scenario = scenario.with_n(args.n)
                reference_rate = preset.paper_cell.rejection_rates.get(args.n)
        else:
            missing = [f for f in ("failure", "censor", "p", "n") if getattr(args, f) is None]
            if missing:
                raise UsageError(
                    "either --preset or all of --failure/--censor/--p/--n are required"
                    f" (missing: {', '.join('--' + m for m in missing)})"
                )
            scenario = Scenario(
                Distribution.parse(args.failure),
                Distribution.parse(args.censor),
                args.p,
                args.n,
                label="custom",
            )
        config = MonteCarloConfig(
            runs=args.runs,
            B=args.bootstrap,
            alpha=args.alpha,
            seed=args.seed,
            fixed_epsilon=args.fixed_epsilon,
        )
    except ScenarioError as exc:
        raise UsageError(str(exc)) from None
    report = rejection_rate(scenario, config, reference_rate=reference_rate)
    _emit(report.as_dict(), args.format, "Monte Carlo rejection rate", out)
    return EXIT_OK


def cmd_summarize(args, out) -> int:
    summary = summarize(_load(args.input))
    _emit(summary.as_dict(), args.format, "sample summary", out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="suffup", description="Test for sufficient follow-up in cure-rate data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fmt = dict(choices=("text", "json"), default="text", help="output format")

    p = sub.add_parser("test", help="run the bootstrap test on a time,status CSV")
    p.add_argument("--input", required=True, metavar="FILE")
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--bootstrap", type=_positive_int, default=1000, metavar="B")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--epsilon", type=_positive_float, default=None,
                   help="fixed window width (default: data-driven rule)")
    p.add_argument("--fixed-epsilon", action="store_true",
                   help="reuse the original window width in every bootstrap replicate")
    p.add_argument("--diagnostic", action="store_true",
                   help="add plug-in asymptotic bias and variance")
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("km", help="export the Kaplan-Meier curve of F as CSV")
    p.add_argument("--input", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=cmd_km)

    p = sub.add_parser("simulate", help="empirical level/power of the test")
    p.add_argument("--preset", default=None,
                   help="reference grid cell, e.g. table1:h0:lambda2.5:p0.9:n800")
    p.add_argument("--failure", default=None, metavar="SPEC")
    p.add_argument("--censor", default=None, metavar="SPEC")
    p.add_argument("--p", type=_probability, default=None)
    p.add_argument("--n", type=_positive_int, default=None)
    p.add_argument("--runs", type=_positive_int, default=1000)
    p.add_argument("--bootstrap", type=_positive_int, default=500, metavar="B")
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--fixed-epsilon", action="store_true")
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("summarize", help="counts, censoring rate and plateau of a CSV")
    p.add_argument("--input", required=True, metavar="FILE")
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_summarize)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"suffup: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"suffup: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

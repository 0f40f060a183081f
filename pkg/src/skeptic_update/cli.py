"""``skeptic-update`` command line.

Exit codes: 0 success, 1 usage error, 2 data or estimation error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
import warnings
from pathlib import Path
from typing import Sequence

from . import report
from .dataio import COLUMNS, analysis_rows, describe, format_survey, load_survey, parse_filter
from .errors import SkepticUpdateError
from .estimators import DesignMatrix, fit_binary, fit_hurdle, fit_tobit_generalized, marginal_effects, predict_change
from .simulate import CHANGE_COVARIATES, LEVEL_COVARIATES, MODELS, TOBIT_COVARIATES, DgpConfig, mc_recover, simulate_survey

FORMATS = ("text", "csv", "jsonl")
DEFAULT_MC_N = {"tobit": 2828, "hurdle": 10000, "linear": 2885}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _covariates(text: str) -> list[str]:
    names = [c.strip().lower() for c in text.split(",") if c.strip()]
    bad = [c for c in names if c not in COLUMNS or c in ("change", "post")]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown covariate(s) {bad}")
    return names


def _param(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    try:
        if not sep:
            raise ValueError
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}") from None


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("threshold must lie in [0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="skeptic-update", description="Belief-updating estimators for survey priors and posteriors.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, covariates=True):
        p.add_argument("--input", required=True, type=Path, help="survey CSV")
        p.add_argument("--format", choices=FORMATS, default="text")
        p.add_argument("--strict", action="store_true", help="fail on invariant violations")
        if covariates:
            p.add_argument("--covariates", type=_covariates, default=list(CHANGE_COVARIATES))

    p = sub.add_parser("describe", help="descriptive statistics")
    common(p, covariates=False)
    p.add_argument("--filter", default=None, help="e.g. change=1")

    fit = sub.add_parser("fit", help="estimate a model")
    fit_sub = fit.add_subparsers(dest="model", required=True, parser_class=_Parser)
    p = fit_sub.add_parser("tobit", help="generalized Tobit on (Prior - Post)")
    common(p, covariates=False)
    p.add_argument("--covariates", type=_covariates, default=list(TOBIT_COVARIATES))
    p = fit_sub.add_parser("hurdle", help="change decision plus revised level")
    common(p, covariates=False)
    p.add_argument("--change-covariates", type=_covariates, default=list(CHANGE_COVARIATES))
    p.add_argument("--level-covariates", type=_covariates, default=list(LEVEL_COVARIATES))
    p.add_argument("--link", choices=("probit", "logit"), default="probit")
    p.add_argument("--transform", choices=("log", "identity"), default="identity")
    p = fit_sub.add_parser("binary", help="probit or logit for the change decision")
    common(p)
    p.add_argument("--link", choices=("probit", "logit"), default="probit")

    p = sub.add_parser("margins", help="average marginal effects of the change decision")
    common(p)
    p.add_argument("--link", choices=("probit", "logit"), default="probit")

    p = sub.add_parser("predict", help="in-sample classification of the change decision")
    common(p)
    p.add_argument("--link", choices=("probit", "logit"), default="probit")
    p.add_argument("--threshold", type=_probability, default=0.5)

    p = sub.add_parser("simulate", help="write a synthetic survey CSV")
    p.add_argument("--model", choices=MODELS, default="tobit")
    p.add_argument("--n", type=int, default=2885)
    p.add_argument("--seed", type=int, default=DgpConfig.seed)
    p.add_argument("--out", type=Path, default=None, help="output CSV (stdout if omitted)")
    p.add_argument("--param", type=_param, action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--transform", choices=("log", "identity"), default="identity")
    p.add_argument("--unbounded", action="store_true", help="skip instrument rounding and bounds")

    p = sub.add_parser("mc", help="Monte-Carlo parameter recovery")
    p.add_argument("--model", choices=MODELS, default="tobit")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--seed", type=int, default=DgpConfig.seed)
    p.add_argument("--n", type=int, default=None, help="sample size (model-specific default)")
    p.add_argument("--param", type=_param, action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--transform", choices=("log", "identity"), default="identity")
    p.add_argument("--bounded", action="store_true", help="apply instrument rounding and bounds")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $SKEPTIC_UPDATE_THREADS or 1)")
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("--timings", action="store_true", help="append elapsed wall-clock time")
    return parser


def _emit(args, records, text: str, out) -> None:
    if args.format == "csv":
        out.write(report.to_csv(records))
    elif args.format == "jsonl":
        out.write(report.to_jsonl(records))
    else:
        out.write(text)


def _load(args, err):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        frame, missing = load_survey(args.input, strict=args.strict)
    for w in caught:
        err.write(f"warning: {w.message}\n")
    return frame


def _binary_fit(args, frame):
    cols = ["prior", *[c for c in args.covariates if c != "prior"]]
    data = analysis_rows(frame, cols + ["change"])
    X = DesignMatrix.from_frame(data, cols)
    return fit_binary(data["change"].to_numpy(dtype=float), X, args.link), X, data


def _config(args, bounded: bool, n: int) -> DgpConfig:
    return DgpConfig(model=args.model, params=dict(args.param), n=n, seed=args.seed, transform=args.transform, bounded=bounded)


def _dispatch(args, out, err) -> None:
    if args.command == "describe":
        frame = _load(args, err)
        rows = describe(frame, parse_filter(args.filter))
        title = "Descriptive Analysis" + (f" ({args.filter})" if args.filter else "")
        _emit(args, report.describe_records(rows), report.describe_table(rows, title), out)
    elif args.command == "fit" and args.model == "tobit":
        frame = _load(args, err)
        covs = [c for c in args.covariates if c != "prior"]
        data = analysis_rows(frame, ["prior", "post", *covs])
        fit = fit_tobit_generalized(data["prior"].to_numpy(), data["post"].to_numpy(), DesignMatrix.from_frame(data, covs))
        _emit(args, report.tobit_records(fit), report.tobit_table(fit), out)
    elif args.command == "fit" and args.model == "hurdle":
        frame = _load(args, err)
        fit = fit_hurdle(frame, args.change_covariates, args.level_covariates, args.link, args.transform)
        data = analysis_rows(frame, [*fit.change_covariates, "change"])
        margins = marginal_effects(fit.change_stage, DesignMatrix.from_frame(data, list(fit.change_covariates)))
        _emit(args, report.hurdle_records(fit, margins), report.hurdle_table(fit, margins), out)
    elif args.command == "fit" and args.model == "binary":
        fit, _, _ = _binary_fit(args, _load(args, err))
        _emit(args, report.binary_records(fit), report.binary_table(fit), out)
    elif args.command == "margins":
        fit, X, _ = _binary_fit(args, _load(args, err))
        m = marginal_effects(fit, X)
        _emit(args, report.margins_records(m, fit.link), report.margins_table(m, fit.link), out)
    elif args.command == "predict":
        fit, X, data = _binary_fit(args, _load(args, err))
        rep = predict_change(fit, X, data["change"].to_numpy(dtype=float), threshold=args.threshold)
        _emit(args, report.prediction_records(rep), report.prediction_table(rep), out)
    elif args.command == "simulate":
        frame = simulate_survey(_config(args, not args.unbounded, args.n))
        text = format_survey(frame)
        if args.out is None:
            out.write(text)
        else:
            args.out.write_text(text, encoding="utf-8")
    elif args.command == "mc":
        start = time.perf_counter()
        n = DEFAULT_MC_N[args.model] if args.n is None else args.n
        rep = mc_recover(_config(args, args.bounded, n), args.reps, threads=args.threads)
        _emit(args, report.mc_records(rep), report.mc_table(rep), out)
        if args.timings:
            err.write(f"elapsed: {time.perf_counter() - start:.2f} s\n")


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    try:
        _dispatch(args, out, err)
    except BrokenPipeError:
        raise
    except SkepticUpdateError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    except (ValueError, OSError) as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    return 0


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)


if __name__ == "__main__":
    main()

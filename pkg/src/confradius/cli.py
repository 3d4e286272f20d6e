"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 numeric error, 4 verification failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from confradius import approx, availability, exact, oracle, tables
from confradius.eigen import CovarianceMatrix, ShapeRatios, decompose, ratios
from confradius.errors import (
    ConfRadiusError,
    DomainError,
    FormatError,
    MonotonicityViolation,
    NoSignChange,
    ToleranceNotReached,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def parse_confidence(text: str) -> float:
    """Accept 0.95 or 95; exactly 1 is rejected as ambiguous."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value == 1.0:
        raise argparse.ArgumentTypeError("confidence 1 is ambiguous (fraction or percent)")
    if 0.0 < value < 1.0:
        return value
    if 1.0 < value < 100.0:
        return value / 100.0
    raise argparse.ArgumentTypeError(f"confidence must be in (0, 1) or (1, 100) percent, got {text}")


def _unit_ratio(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (0.0 <= value <= 1.0):
        raise argparse.ArgumentTypeError(f"ratio must lie in [0, 1], got {text}")
    return value


def _shape_from_args(args) -> ShapeRatios:
    if args.dim == 1:
        if args.ratio is not None or args.m is not None or args.n is not None:
            raise UsageError("--dim 1 takes no ratios")
        return ShapeRatios.line()
    if args.dim == 2:
        if args.m is not None or args.n is not None:
            raise UsageError("--dim 2 takes --ratio, not --m/--n")
        if args.ratio is None:
            raise UsageError("--dim 2 needs --ratio")
        return ShapeRatios.planar(args.ratio)
    if args.ratio is not None:
        raise UsageError("--dim 3 takes --m and --n, not --ratio")
    if args.m is None or args.n is None:
        raise UsageError("--dim 3 needs both --m and --n")
    return ShapeRatios.spatial(args.m, args.n)


def _describe_shape(shape: ShapeRatios) -> str:
    if shape.dim == 1:
        return "-"
    if shape.dim == 2:
        return f"r={_fmt(shape.r)}"
    return f"m={_fmt(shape.m)} n={_fmt(shape.n)}"


def _load_table(path, confidence: float) -> tables.FactorTable:
    table = tables.load(path)
    if abs(table.confidence - confidence) > 1e-12:
        raise UsageError(f"table {path} was built for confidence {table.confidence}, not {confidence}")
    return table


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_factor(args, out) -> int:
    shape = _shape_from_args(args)
    p = args.confidence
    if args.table:
        if args.method != "exact":
            raise UsageError("--table replaces the exact method only")
        table = _load_table(args.table, p)
        result = tables.lookup(table, shape)
        source = f"table {Path(args.table).name}"
    elif args.method == "chisq" and shape.dim > 1:
        result = approx.chi2_factor(shape.dim, p)
        source = "direct"
    else:
        result = exact.factor(shape, p)
        source = "direct"
    out.write(f"dim {shape.dim}\n")
    out.write(f"confidence {p!r}\n")
    out.write(f"shape {_describe_shape(shape)}\n")
    out.write(f"method {result.method.value} ({source})\n")
    out.write(f"factor {_fmt(result.factor)}\n")
    return EXIT_OK


def cmd_radius(args, out) -> int:
    cov = availability.load_covariance(args.cov)
    p = args.confidence
    table = _load_table(args.table, p) if args.table else None
    fn = availability.radius_function(args.method, table)
    r = fn(cov, p)
    spectrum = decompose(cov)
    out.write(f"dim {cov.dim}\n")
    out.write(f"confidence {p!r}\n")
    out.write(f"method {args.method}{' (table)' if table else ''}\n")
    out.write(f"sigma_x {_fmt(spectrum.sigma_x)}\n")
    out.write(f"factor {_fmt(r / spectrum.sigma_x)}\n")
    out.write(f"radius {_fmt(r)}\n")
    return EXIT_OK


def cmd_compare(args, out) -> int:
    p = args.confidence
    if args.cov:
        if args.dim is not None or args.ratio is not None or args.m is not None or args.n is not None:
            raise UsageError("use either --cov or --dim with ratios, not both")
        report = approx.compare(availability.load_covariance(args.cov), p)
    else:
        if args.dim is None:
            raise UsageError("compare needs --cov or --dim")
        shape = _shape_from_args(args)
        if shape.dim == 1:
            raise UsageError("compare needs a 2D or 3D shape")
        report = approx.compare_shape(shape, p)
    sx = report.sigma_x
    out.write(f"dim {report.exact.ratios.dim}\n")
    out.write(f"confidence {p!r}\n")
    out.write(f"shape {_describe_shape(report.exact.ratios)}\n")
    out.write(f"sigma_x {_fmt(sx)}\n")
    out.write(f"{'method':<14}{'factor':>10}{'radius':>12}{'over':>9}\n")
    rows = [
        ("exact", report.exact.factor, None),
        ("chi-squared", report.chi_sq.factor, report.overestimation_chi_sq),
        ("diagonal-sum", report.diagonal_sum, report.overestimation_diagonal),
    ]
    for name, f, over in rows:
        over_txt = "" if over is None else f"{100 * over:.1f}%"
        out.write(f"{name:<14}{_fmt(f):>10}{_fmt(f * sx):>12}{over_txt:>9}\n")
    out.write(
        f"chi-sq overestimation {100 * report.overestimation_chi_sq:.1f}% "
        f"({_fmt(report.overestimation_chi_sq)})\n"
    )
    out.write(
        f"diagonal overestimation {100 * report.overestimation_diagonal:.1f}% "
        f"({_fmt(report.overestimation_diagonal)})\n"
    )
    return EXIT_OK


def cmd_table(args, out) -> int:
    table = tables.build_table(
        args.dim, args.confidence, args.step, args.interpolation, workers=args.workers
    )
    fmt = args.format or ("csv" if Path(args.out).suffix.lower() == ".csv" else "bin")
    tables.save(table, args.out, fmt)
    out.write(f"wrote {args.out} ({fmt})\n")
    out.write(f"grid size {table.values.size}\n")
    out.write(f"monotonicity margin {tables.monotonicity_margin(table):.6g}\n")
    return EXIT_OK


def cmd_availability(args, out) -> int:
    series = availability.load_series(args.series)
    p = args.confidence
    table = _load_table(args.table, p) if args.table else None
    res = availability.evaluate(series, args.threshold, p, args.method, table)
    if args.verbose:
        for t, r in zip(series.times, res.per_epoch_radius):
            flag = "ok" if r <= res.threshold else "exceeded"
            out.write(f"{t} {_fmt(r)} {flag}\n")
    out.write(f"method {res.method}\n")
    out.write(f"threshold {_fmt(res.threshold)}\n")
    out.write(f"epochs {res.epochs_met}/{len(series)}\n")
    out.write(f"availability {res.availability:.6f}\n")
    return EXIT_OK


def cmd_mc_check(args, out) -> int:
    cov = availability.load_covariance(args.cov)
    p = args.confidence
    spectrum = decompose(cov)
    shape = ratios(spectrum)
    f = exact.factor(shape, p).factor
    cfg = oracle.McConfig(samples=args.samples, seed=args.seed, confidence=p)
    q, se = oracle.mc_quantile(spectrum, cfg)
    sx = spectrum.sigma_x
    diff = abs(q - f)
    ok = diff <= 3.0 * se
    out.write(f"dim {cov.dim}\n")
    out.write(f"confidence {p!r}\n")
    out.write(f"samples {cfg.samples} seed {cfg.seed}\n")
    out.write(f"exact radius {_fmt(f * sx)}\n")
    out.write(f"mc radius {_fmt(q * sx)}\n")
    out.write(f"std error {_fmt(se * sx)}\n")
    out.write(f"deviation {diff / se if se > 0 else math.inf:.3f} sigma\n")
    out.write(f"{'PASS' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_shape_flags(p, dim_required=True):
    p.add_argument("--dim", type=int, choices=(1, 2, 3) if dim_required else (2, 3), required=dim_required)
    p.add_argument("--ratio", type=_unit_ratio, help="sigma_y / sigma_x (2D)")
    p.add_argument("--m", type=_unit_ratio, help="sigma_y / sigma_x (3D)")
    p.add_argument("--n", type=_unit_ratio, help="sigma_z / sigma_x (3D)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="confradius", description="Exact Gaussian confidence radii from covariances.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("factor", help="factor on the largest standard deviation")
    _add_shape_flags(p)
    p.add_argument("--confidence", type=parse_confidence, required=True)
    p.add_argument("--method", choices=("exact", "chisq"), default="exact")
    p.add_argument("--table", help="answer by interpolation in a saved table")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("radius", help="confidence radius of a covariance file")
    p.add_argument("--cov", required=True)
    p.add_argument("--confidence", type=parse_confidence, required=True)
    p.add_argument("--method", choices=("exact", "chisq", "diagonal"), default="exact")
    p.add_argument("--table")
    p.set_defaults(func=cmd_radius)

    p = sub.add_parser("compare", help="exact factor against both approximations")
    p.add_argument("--cov")
    _add_shape_flags(p, dim_required=False)
    p.add_argument("--confidence", type=parse_confidence, required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("table", help="build a factor lookup table")
    p.add_argument("--dim", type=int, choices=(2, 3), required=True)
    p.add_argument("--confidence", type=parse_confidence, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "bin"))
    p.add_argument(
        "--interpolation",
        choices=[i.value for i in tables.Interpolation],
        default=tables.Interpolation.MONOTONE_CUBIC.value,
    )
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("availability", help="availability over a covariance series")
    p.add_argument("--series", required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--confidence", type=parse_confidence, required=True)
    p.add_argument("--method", choices=("exact", "chisq", "diagonal"), default="exact")
    p.add_argument("--table")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_availability)

    p = sub.add_parser("mc-check", help="verify the exact radius against Monte Carlo")
    p.add_argument("--cov", required=True)
    p.add_argument("--confidence", type=parse_confidence, required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_mc_check)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"confradius: error: {exc}\n")
        return EXIT_INPUT
    except (ToleranceNotReached, NoSignChange, MonotonicityViolation) as exc:
        err.write(f"confradius: numeric error: {exc}\n")
        return EXIT_NUMERIC
    except (DomainError, FormatError, OSError) as exc:
        err.write(f"confradius: error: {exc}\n")
        return EXIT_INPUT
    except ConfRadiusError as exc:
        err.write(f"confradius: numeric error: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""
Command-line interface.

    kpart rate   -i counts.csv [-o rates.csv]
    kpart fit    -i series.csv --k 10 [-o model.json]
    kpart curve  -i model.json [--points 200 | --at series.csv] [-o curve.tsv]
    kpart report -i states/ --k 10 [--k-for DC=5] [-o report.csv]

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import sys
from pathlib import Path

import numpy as np

from .data import ColumnMap, load_series
from .document import ModelDocument
from .exceptions import (
    ContractError,
    DataFormatError,
    DomainError,
    EmptySeriesError,
    InsufficientDataError,
    KpartError,
    NoFeasibleModelError,
    SingularDesignError,
)
from .search import fit_kpart, max_k_from_env

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 4

DEFAULT_K = 10
DEFAULT_POINTS = 200

INPUT_ERRORS = (DataFormatError, EmptySeriesError, DomainError, OSError, UnicodeDecodeError)
NUMERICAL_ERRORS = (NoFeasibleModelError, InsufficientDataError, SingularDesignError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _k_override(text):
    name, sep, k = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=K, got {text!r}")
    return name, _positive_int(k)


def _add_columns(p):
    g = p.add_argument_group("column names")
    g.add_argument("--year-col", default="year")
    g.add_argument("--pop-col", default="population")
    g.add_argument("--count-col", default="count")
    g.add_argument("--rate-col", default="rate")


def _columns(args) -> ColumnMap:
    return ColumnMap(year=args.year_col, population=args.pop_col,
                     count=args.count_col, rate=args.rate_col)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kpart", description="Cubic spline regression with min/max K-partition knots.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rate", help="compute per-capita rates from counts")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--out")
    _add_columns(p)

    p = sub.add_parser("fit", help="fit one series and write a model document")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--k", type=_positive_int, default=DEFAULT_K)
    p.add_argument("-o", "--out", help="model JSON path")
    p.add_argument("--name", help="series label (default: file stem)")
    _add_columns(p)

    p = sub.add_parser("curve", help="tabulate a fitted curve")
    p.add_argument("-i", "--input", required=True, help="model JSON")
    p.add_argument("--points", type=_positive_int, default=DEFAULT_POINTS)
    p.add_argument("--at", help="evaluate at the populations in this CSV instead of a grid")
    p.add_argument("-o", "--out")
    _add_columns(p)

    p = sub.add_parser("report", help="fit every CSV in a directory")
    p.add_argument("-i", "--input", required=True, help="directory of CSV files")
    p.add_argument("--k", type=_positive_int, default=DEFAULT_K)
    p.add_argument("--k-for", type=_k_override, action="append", default=[],
                   metavar="NAME=K", help="per-series K override; repeatable")
    p.add_argument("-o", "--out")
    _add_columns(p)
    return parser


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _fmt(v) -> str:
    return repr(float(v))


def _check_k(k, n=None):
    cap = max_k_from_env()
    if k > cap:
        raise UsageError(f"--k {k} exceeds the cap of {cap} (KPART_MAX_K)")
    if n is not None and k > n:
        raise UsageError(f"--k {k} exceeds the number of observations ({n})")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_rate(args) -> int:
    series, report = load_series(args.input, _columns(args))
    if not series.has_counts:
        print(f"warning: {args.input} already holds rates; passing them through", file=sys.stderr)
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["year", "population", "rate"])
        for o in series.observations:
            w.writerow([o.year, _fmt(o.population), _fmt(o.rate)])
    if report.n_skipped:
        print(f"{args.input}: {report}", file=sys.stderr)
    return EXIT_OK


def _summary(doc: ModelDocument) -> str:
    lines = [
        f"series: {doc.series_name}  (n={doc.n}, K={doc.k_requested}, p={doc.p})",
        f"knots selected: {len(doc.knots_raw_units)}",
    ]
    if doc.knots_raw_units:
        lines.append(f"  {'population':>18}  year")
        for t, year in zip(doc.knots_raw_units, doc.selected_years):
            lines.append(f"  {t:>18.1f}  {year}")
    lines.append(f"R2_adj: {100 * doc.r2_adj:.2f}%  (R2 {100 * doc.r2:.2f}%)")
    lines.append(f"BIC: {doc.bic:.4f}")
    return "\n".join(lines)


def cmd_fit(args) -> int:
    _check_k(args.k)
    series, report = load_series(args.input, _columns(args), name=args.name)
    _check_k(args.k, len(series))
    result = fit_kpart(series, args.k)
    doc = ModelDocument.from_result(result, series.name)
    if args.out:
        doc.save(args.out)
    if report.n_skipped:
        print(f"{args.input}: {report}")
    print(_summary(doc))
    return EXIT_OK


def cmd_curve(args) -> int:
    doc = ModelDocument.load(args.input)
    if args.at:
        series, _ = load_series(args.at, _columns(args))
        grid = series.population
    else:
        lo, hi = doc.raw_range
        grid = np.linspace(lo, hi, args.points)
    fitted = doc.predict(grid)
    with _output(args.out) as out:
        out.write("x_raw\ty_fitted\n")
        for xv, yv in zip(grid, fitted):
            out.write(f"{_fmt(xv)}\t{_fmt(yv)}\n")
        out.write("# knots:\n")
        for t in doc.knots_raw_units:
            out.write(f"# {_fmt(t)}\n")
    return EXIT_OK


REPORT_HEADER = ["name", "n", "k", "n_knots", "r2_adj", "bic", "error"]


def _report_row(path: Path, k: int, columns: ColumnMap):
    try:
        series, _ = load_series(path, columns)
    except (KpartError, OSError, UnicodeDecodeError) as exc:
        return path.stem, None, [path.stem, "", k, "", "", "", f"load: {exc}"]
    name = series.name
    try:
        _check_k(k, len(series))
        result = fit_kpart(series, k)
    except (KpartError, UsageError) as exc:
        return name, series, [name, len(series), k, "", "", "", f"fit: {exc}"]
    fit = result.winner
    return name, series, [name, fit.n, k, result.n_knots,
                          f"{fit.r2_adj:.10g}", f"{result.winner_bic:.10g}", ""]


def cmd_report(args) -> int:
    overrides = dict(args.k_for)
    for _, k in overrides.items():
        _check_k(k)
    _check_k(args.k)
    folder = Path(args.input)
    if not folder.is_dir():
        raise DataFormatError(f"{folder} is not a directory")
    files = sorted(folder.glob("*.csv"))
    rows, loaded = [], 0
    for path in files:
        name, series, row = _report_row(path, overrides.get(path.stem, args.k), _columns(args))
        loaded += series is not None
        rows.append((name, row))
    if loaded == 0:
        raise EmptySeriesError(f"no loadable series in {folder}")
    rows.sort(key=lambda r: r[0])

    r2s = [float(row[4]) for _, row in rows if row[4] != ""]
    total = len(rows)
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for _, row in rows:
            w.writerow(row)
        out.write(f"# {sum(r > 0.90 for r in r2s)} of {total} above 0.90\n")
        out.write(f"# {sum(r > 0.70 for r in r2s)} of {total} above 0.70\n")
    return EXIT_OK


COMMANDS = {"rate": cmd_rate, "fit": cmd_fit, "curve": cmd_curve, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"kpart: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except INPUT_ERRORS as exc:
        print(f"kpart: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NUMERICAL_ERRORS as exc:
        print(f"kpart: fit failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ContractError as exc:
        print(f"kpart: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

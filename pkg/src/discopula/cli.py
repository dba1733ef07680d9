"""Command-line interface: ``discopula <subcommand> ...``.

Exit codes: 0 success, 1 validation failure, 2 I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import sys
from pathlib import Path

import numpy as np

from . import io
from .arrays import array_from_copula, copula_from_array
from .ecc import MarginId, dependence_template, run_ecc
from .empirical import TIE_POLICIES, empirical_copula_from_ranks, ranks
from .exceptions import DiscopulaError
from .grid import DEFAULT_EPS, check_discrete_copula
from .sklar import compose, extract_copula
from .subcopula import extend_irreducible

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    """Flag combination rejected before any computation."""


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def cmd_check(args, out) -> int:
    f = io.read_grid(args.grid)
    report = check_discrete_copula(f, args.eps)
    if args.json:
        out.write(io.dumps_json(report.to_dict()))
    else:
        out.write(f"{args.grid}: {report}\n")
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_to_array(args, out) -> int:
    io.write_array(args.output, array_from_copula(io.read_grid(args.grid), args.eps, exact=True))
    return EXIT_OK


def cmd_from_array(args, out) -> int:
    io.write_grid(args.output, copula_from_array(io.read_array(args.array), args.eps, exact=True))
    return EXIT_OK


def cmd_empirical(args, out) -> int:
    if args.ties == "random" and args.seed is None:
        raise UsageError("--ties random requires --seed")
    points = io.loads_samples(_read(args.samples), args.samples)
    R = ranks(points, ties=args.ties, seed=args.seed)
    io.write_grid(args.grid_out, empirical_copula_from_ranks(R))
    io.write_rank_matrix(args.ranks_out, R)
    return EXIT_OK


def cmd_extend(args, out) -> int:
    io.write_grid(args.output, extend_irreducible(io.read_subcopula(args.subcopula), args.eps))
    return EXIT_OK


def cmd_sklar_compose(args, out) -> int:
    D = io.read_grid(args.grid)
    margins = [io.loads_margin(_read(p), D.M, p) for p in args.margin]
    H = compose(D, margins, args.eps)
    _write(args.output, io.dumps_joint(H.to_joint_distribution()))
    return EXIT_OK


def cmd_sklar_extract(args, out) -> int:
    J = io.loads_joint(_read(args.joint), args.M, args.joint)
    result = extract_copula(J, args.eps)
    io.write_grid(args.output, result.copula)
    out.write(f"unique: {'true' if result.unique else 'false'}\n")
    return EXIT_OK


def cmd_ecc(args, out) -> int:
    if args.seed is None:
        raise UsageError("ecc requires --seed (ties in the raw ensemble are broken at random)")
    raw, rows = io.loads_raw(_read(args.raw), args.raw)
    margins = io.loads_margins_json(_read(args.margins), args.margins)
    ecc, report = run_ecc(raw, margins, scheme=args.scheme, seed=args.seed)
    _write(args.output, io.dumps_ecc_output(rows, ecc))
    _write(args.report, io.dumps_json(report.to_dict()))
    out.write(f"preserved: {'true' if report.preserved else 'false'}\n")
    return EXIT_OK if report.preserved else EXIT_INVALID


def _parse_margin_id(text: str) -> MarginId:
    parts = text.split("/")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"margin id must be variable/location/lead_time, got {text!r}")
    return MarginId(*parts)


def cmd_plot_data(args, out) -> int:
    raw, _ = io.loads_raw(_read(args.raw), args.raw)
    ecc, _ = io.loads_raw(_read(args.ecc), args.ecc, value_column="ecc_value")
    if raw.margins != ecc.margins or raw.members != ecc.members:
        raise DiscopulaError("raw and ECC files describe different margins or members")
    try:
        cols = [raw.margins.index(m) for m in args.pair]
    except ValueError:
        raise DiscopulaError(f"margin pair {[str(m) for m in args.pair]} not found in the data") from None
    M = raw.members
    panels = {}
    for name, data in (("raw", raw), ("ecc", ecc)):
        sub = data.values[:, cols]
        panels[name] = (sub, dependence_template(sub, args.seed))

    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["member", "raw_a", "raw_b", "ecc_a", "ecc_b", "raw_rank_a", "raw_rank_b", "ecc_rank_a", "ecc_rank_b"])
    for m in range(M):
        w.writerow(
            [m + 1]
            + [io.fmt(x) for x in panels["raw"][0][m]]
            + [io.fmt(x) for x in panels["ecc"][0][m]]
            + [int(r) for r in panels["raw"][1].ranks[m]]
            + [int(r) for r in panels["ecc"][1].ranks[m]]
        )
    _write(args.scatter_out, buf.getvalue())

    grids = {name: empirical_copula_from_ranks(R).values for name, (_, R) in panels.items()}
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "j", "u", "v", "raw_copula", "ecc_copula"])
    for i in range(M + 1):
        for j in range(M + 1):
            w.writerow([i, j, io.fmt(i / M), io.fmt(j / M), io.fmt(grids["raw"][i, j]), io.fmt(grids["ecc"][i, j])])
    _write(args.copula_out, buf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    formats = "\n".join(f"  {k:9s} {v}" for k, v in io.FORMATS.items())
    parser = argparse.ArgumentParser(
        prog="discopula",
        description="Discrete copulas on {0,1/M,...,1}^L and ensemble copula coupling.",
        epilog="file formats:\n" + formats,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help, formats_used):
        p = sub.add_parser(
            name,
            help=help,
            description=help,
            epilog="formats:\n" + "\n".join(f"  {k:9s} {io.FORMATS[k]}" for k in formats_used),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.set_defaults(func=func)
        p.add_argument("--eps", type=float, default=DEFAULT_EPS, help="comparison tolerance (default 1e-9)")
        return p

    p = add("check", cmd_check, "check the discrete copula axioms of a grid file", ["GRIDFN"])
    p.add_argument("grid")
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = add("to-array", cmd_to_array, "convert a copula grid to its stochastic array", ["GRIDFN", "STOCHARR"])
    p.add_argument("grid")
    p.add_argument("-o", "--output", required=True)

    p = add("from-array", cmd_from_array, "convert a stochastic array to its copula grid", ["STOCHARR", "GRIDFN"])
    p.add_argument("array")
    p.add_argument("-o", "--output", required=True)

    p = add("empirical", cmd_empirical, "empirical copula and rank matrix of a sample", ["samples", "GRIDFN", "RANKMAT"])
    p.add_argument("samples")
    p.add_argument("--grid-out", required=True)
    p.add_argument("--ranks-out", required=True)
    p.add_argument("--ties", choices=TIE_POLICIES, default="reject")
    p.add_argument("--seed", type=int)

    p = add("extend", cmd_extend, "extend an irreducible subcopula to a full copula", ["SUBCOP", "GRIDFN"])
    p.add_argument("subcopula")
    p.add_argument("-o", "--output", required=True)

    p = add("sklar-compose", cmd_sklar_compose, "joint distribution from a copula and margins", ["GRIDFN", "margin", "joint"])
    p.add_argument("--grid", required=True)
    p.add_argument("--margin", action="append", required=True, help="margin CSV, once per axis in order")
    p.add_argument("-o", "--output", required=True)

    p = add("sklar-extract", cmd_sklar_extract, "irreducible copula of a joint distribution", ["joint", "GRIDFN"])
    p.add_argument("joint")
    p.add_argument("--M", type=int, required=True, help="grid resolution; masses are multiples of 1/M")
    p.add_argument("-o", "--output", required=True)

    p = add("ecc", cmd_ecc, "ensemble copula coupling of a raw ensemble", ["raw", "margins", "ecc-out", "report"])
    p.add_argument("--raw", required=True)
    p.add_argument("--margins", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--scheme", choices=("quantiles", "random"), default="quantiles")
    p.add_argument("--seed", type=int)

    p = add("plot-data", cmd_plot_data, "scatter and copula-grid CSVs for two margins", ["raw", "ecc-out"])
    p.add_argument("--raw", required=True)
    p.add_argument("--ecc", required=True, help="ECC output CSV (uses its ecc_value column)")
    p.add_argument("--pair", nargs=2, type=_parse_margin_id, required=True, metavar="VAR/LOC/LEAD")
    p.add_argument("--scatter-out", required=True)
    p.add_argument("--copula-out", required=True)
    p.add_argument("--seed", type=int, help="needed when a margin has ties")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        parser.error(str(exc))
    except (io.ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DiscopulaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

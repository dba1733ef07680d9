"""Readers and writers for the on-disk formats.

Math objects use a one-line header (``GRIDFN``, ``STOCHARR``, ``RANKMAT``,
``SUBCOP``) followed by whitespace-separated numbers; tabular data is CSV and
structured configuration is JSON.  Floats are written with ``repr`` (the
shortest string that round-trips), so reading and re-writing is bit-exact.
Parsers reject malformed input with a :class:`ParseError` naming the line and
column instead of repairing it.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import re
from pathlib import Path
from typing import Iterable

import numpy as np

from .arrays import RankMatrix, StochasticArray
from .ecc import EmpiricalMargin, EnsembleDataset, GaussianMargin, MarginId
from .exceptions import DiscopulaError
from .grid import GridFunction
from .sklar import DiscreteJointDistribution, StepCDF
from .subcopula import DiscreteSubcopula

FORMATS = {
    "GRIDFN": "GRIDFN M=<int> L=<int>, then (M+1)^L values, row-major (first index slowest)",
    "STOCHARR": "STOCHARR M=<int> L=<int>, then M^L values, row-major",
    "RANKMAT": "RANKMAT M=<int> L=<int>, then M lines of L integer ranks",
    "SUBCOP": "SUBCOP M=<int> L=<int>, then L lines of domain integers, then values row-major over the domain product",
    "samples": "CSV header m,dim1,...,dimL; one row per sample point",
    "joint": "CSV header x1,...,xL,mass; one row per atom, masses multiples of 1/M",
    "margin": "CSV header value,level; one row per support point, level = F(value)",
    "raw": "CSV header variable,location,lead_time,member,value; members 1..M for every margin",
    "margins": 'JSON array of {variable, location, lead_time, dist: {"type":"gaussian","mean","sd"} | {"type":"empirical","samples":[...]}}',
    "ecc-out": "CSV: raw columns plus ecc_value",
    "report": "JSON {preserved, template_hash, per_margin: [{id, min, max}], tied_margins, scheme}",
}


class ParseError(DiscopulaError):
    def __init__(self, message, line=None, column=None, source=None):
        where = ", ".join(
            p for p in (source and str(source), line and f"line {line}", column and f"column {column}") if p
        )
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.column = column


def fmt(x: float) -> str:
    return repr(float(x))


def _read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- header formats ---------------------------------------------------------

_HEADER = re.compile(r"^(\w+)((?:\s+\w+=-?\d+)*)\s*$")


def _tokens(lines: list[str], start: int) -> Iterable[tuple[str, int, int]]:
    for lineno in range(start, len(lines)):
        for m in re.finditer(r"\S+", lines[lineno]):
            yield m.group(), lineno + 1, m.start() + 1


def _parse_header(text: str, magic: str, source) -> tuple[dict, list[str]]:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", source=source)
    m = _HEADER.match(lines[0].strip())
    if not m or m.group(1) != magic:
        raise ParseError(f"expected header '{magic} M=<int> L=<int>'", 1, 1, source)
    fields = dict(kv.split("=") for kv in m.group(2).split())
    params = {}
    for key in ("M", "L"):
        if key not in fields:
            raise ParseError(f"header is missing {key}=<int>", 1, None, source)
        params[key] = int(fields[key])
        if params[key] < 1:
            raise ParseError(f"{key} must be positive", 1, None, source)
    return params, lines


def _floats(tokens, count: int, source, what="value") -> np.ndarray:
    out = np.empty(count)
    n = 0
    for tok, line, col in tokens:
        if n == count:
            raise ParseError(f"unexpected extra {what} {tok!r}", line, col, source)
        try:
            x = float(tok)
        except ValueError:
            raise ParseError(f"invalid number {tok!r}", line, col, source) from None
        if not math.isfinite(x):
            raise ParseError(f"non-finite {what} {tok!r}", line, col, source)
        out[n] = x
        n += 1
    if n != count:
        raise ParseError(f"expected {count} {what}s, found {n}", None, None, source)
    return out


def _ints(tokens, count: int, source) -> np.ndarray:
    vals = _floats(tokens, count, source, "integer")
    if np.any(vals != np.rint(vals)):
        raise ParseError("expected integers", None, None, source)
    return vals.astype(np.int64)


def _rows(values: np.ndarray, width: int) -> str:
    flat = values.ravel()
    return "".join(" ".join(fmt(x) for x in flat[i : i + width]) + "\n" for i in range(0, flat.size, width))


def dumps_grid(f: GridFunction) -> str:
    return f"GRIDFN M={f.M} L={f.L}\n" + _rows(f.values, f.M + 1)


def loads_grid(text: str, source=None) -> GridFunction:
    p, lines = _parse_header(text, "GRIDFN", source)
    values = _floats(_tokens(lines, 1), (p["M"] + 1) ** p["L"], source)
    return GridFunction(p["M"], p["L"], values)


def dumps_array(A: StochasticArray) -> str:
    return f"STOCHARR M={A.M} L={A.L}\n" + _rows(A.entries, A.M)


def loads_array(text: str, source=None) -> StochasticArray:
    p, lines = _parse_header(text, "STOCHARR", source)
    values = _floats(_tokens(lines, 1), p["M"] ** p["L"], source)
    return StochasticArray(p["M"], p["L"], values)


def dumps_rank_matrix(R: RankMatrix) -> str:
    body = "".join(" ".join(str(int(r)) for r in row) + "\n" for row in R.ranks)
    return f"RANKMAT M={R.M} L={R.L}\n" + body


def loads_rank_matrix(text: str, source=None) -> RankMatrix:
    p, lines = _parse_header(text, "RANKMAT", source)
    values = _ints(_tokens(lines, 1), p["M"] * p["L"], source)
    return RankMatrix(values.reshape(p["M"], p["L"]))


def dumps_subcopula(Ds: DiscreteSubcopula) -> str:
    doms = "".join(" ".join(str(k) for k in d) + "\n" for d in Ds.domains)
    return f"SUBCOP M={Ds.M} L={Ds.L}\n" + doms + _rows(Ds.values, len(Ds.domains[-1]))


def loads_subcopula(text: str, source=None) -> DiscreteSubcopula:
    p, lines = _parse_header(text, "SUBCOP", source)
    M, L = p["M"], p["L"]
    if len(lines) < 1 + L:
        raise ParseError(f"expected {L} domain lines", len(lines), None, source)
    domains = []
    for ell in range(L):
        try:
            dom = [int(t) for t in lines[1 + ell].split()]
        except ValueError:
            raise ParseError("domain points must be integers", 2 + ell, None, source) from None
        if not dom:
            raise ParseError("empty domain line", 2 + ell, 1, source)
        domains.append(dom)
    size = int(np.prod([len(d) for d in domains]))
    values = _floats(_tokens(lines, 1 + L), size, source)
    return DiscreteSubcopula(M, tuple(domains), values)


# -- CSV formats ------------------------------------------------------------


def _csv_records(text: str, expected_header, source):
    reader = csv.reader(_io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file", source=source) from None
    header = [h.strip() for h in header]
    if callable(expected_header):
        expected_header(header)
    elif header != list(expected_header):
        raise ParseError(f"expected header {','.join(expected_header)}", 1, 1, source)
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", reader.line_num, None, source)
        yield reader.line_num, [c.strip() for c in row]


def _cell_float(cell: str, line: int, col: int, source) -> float:
    try:
        x = float(cell)
    except ValueError:
        raise ParseError(f"invalid number {cell!r}", line, col, source) from None
    if not math.isfinite(x):
        raise ParseError(f"non-finite value {cell!r}", line, col, source)
    return x


def _cell_int(cell: str, line: int, col: int, source) -> int:
    try:
        return int(cell)
    except ValueError:
        raise ParseError(f"invalid integer {cell!r}", line, col, source) from None


def loads_samples(text: str, source=None) -> np.ndarray:
    """Sample CSV to an ``M x L`` array ordered by the ``m`` column."""

    def check(header):
        if len(header) < 2 or header[0] != "m" or header[1:] != [f"dim{j}" for j in range(1, len(header))]:
            raise ParseError("expected header m,dim1,...,dimL", 1, 1, source)

    rows = {}
    for line, row in _csv_records(text, check, source):
        m = _cell_int(row[0], line, 1, source)
        if m in rows:
            raise ParseError(f"duplicate sample index m={m}", line, 1, source)
        rows[m] = [_cell_float(c, line, j + 2, source) for j, c in enumerate(row[1:])]
    if not rows:
        raise ParseError("no sample rows", source=source)
    return np.array([rows[m] for m in sorted(rows)])


def dumps_samples(points: np.ndarray) -> str:
    L = points.shape[1]
    out = ["m," + ",".join(f"dim{j}" for j in range(1, L + 1))]
    out += [f"{m}," + ",".join(fmt(x) for x in row) for m, row in enumerate(points, start=1)]
    return "\n".join(out) + "\n"


def loads_joint(text: str, M: int, source=None) -> DiscreteJointDistribution:
    def check(header):
        L = len(header) - 1
        if L < 1 or header != [f"x{j}" for j in range(1, L + 1)] + ["mass"]:
            raise ParseError("expected header x1,...,xL,mass", 1, 1, source)

    pts, masses = [], []
    for line, row in _csv_records(text, check, source):
        pts.append([_cell_float(c, line, j + 1, source) for j, c in enumerate(row[:-1])])
        masses.append(_cell_float(row[-1], line, len(row), source))
    if not pts:
        raise ParseError("no atoms", source=source)
    return DiscreteJointDistribution.from_points(np.array(pts), np.array(masses), M)


def dumps_joint(J: DiscreteJointDistribution) -> str:
    pts, num = J.atoms()
    out = [",".join(f"x{j}" for j in range(1, J.L + 1)) + ",mass"]
    out += [",".join(fmt(x) for x in p) + "," + fmt(c / J.M) for p, c in zip(pts, num)]
    return "\n".join(out) + "\n"


def loads_margin(text: str, M: int, source=None) -> StepCDF:
    support, levels = [], []
    for line, row in _csv_records(text, ("value", "level"), source):
        support.append(_cell_float(row[0], line, 1, source))
        levels.append(_cell_float(row[1], line, 2, source))
    if not support:
        raise ParseError("no margin rows", source=source)
    return StepCDF.from_probabilities(support, levels, M)


def dumps_margin(F: StepCDF) -> str:
    out = ["value,level"] + [f"{fmt(x)},{fmt(k / F.M)}" for x, k in zip(F.support, F.levels)]
    return "\n".join(out) + "\n"


RAW_HEADER = ("variable", "location", "lead_time", "member", "value")


def loads_raw(text: str, source=None, value_column: str = "value") -> tuple[EnsembleDataset, list]:
    """Raw ensemble CSV to a dataset; margins keep their order of first appearance.

    Also returns the parsed rows ``(margin, member, value_text)`` in file
    order so writers can reproduce the input layout.  ``value_column`` picks
    the value field when reading an ECC output file.
    """

    vcol = None

    def check(header):
        nonlocal vcol
        if header[:5] != list(RAW_HEADER) or value_column not in header:
            raise ParseError(f"expected header {','.join(RAW_HEADER)}", 1, 1, source)
        if len(set(header)) != len(header):
            raise ParseError("duplicate column names", 1, 1, source)
        vcol = header.index(value_column)

    cells: dict = {}
    order: list = []
    rows = []
    for line, row in _csv_records(text, check, source):
        mid = MarginId(row[0], row[1], row[2])
        member = _cell_int(row[3], line, 4, source)
        value = _cell_float(row[vcol], line, vcol + 1, source)
        if member < 1:
            raise ParseError(f"member numbers start at 1, got {member}", line, 4, source)
        if mid not in cells:
            cells[mid] = {}
            order.append(mid)
        if member in cells[mid]:
            raise ParseError(f"duplicate cell for margin {mid} member {member}", line, 4, source)
        cells[mid][member] = value
        rows.append((mid, member, row))
    if not order:
        raise ParseError("no ensemble rows", source=source)
    M = max(max(c) for c in cells.values())
    for mid in order:
        missing = sorted(set(range(1, M + 1)) - set(cells[mid]))
        if missing:
            raise ParseError(f"margin {mid} is missing members {missing}", source=source)
    values = np.array([[cells[mid][m] for mid in order] for m in range(1, M + 1)])
    return EnsembleDataset(tuple(order), values), rows


def dumps_ecc_output(rows, ecc: EnsembleDataset) -> str:
    col = {mid: ell for ell, mid in enumerate(ecc.margins)}
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(RAW_HEADER) + ["ecc_value"])
    for mid, member, row in rows:
        w.writerow(list(row[:5]) + [fmt(ecc.values[member - 1, col[mid]])])
    return buf.getvalue()


def loads_margins_json(text: str, source=None) -> dict:
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, source) from None
    if not isinstance(records, list):
        raise ParseError("margins config must be a JSON array", 1, 1, source)
    out = {}
    for n, rec in enumerate(records):
        where = f"record {n}"
        try:
            mid = MarginId(str(rec["variable"]), str(rec["location"]), str(rec["lead_time"]))
            dist = rec["dist"]
            kind = dist["type"]
            if kind == "gaussian":
                F = GaussianMargin(float(dist["mean"]), float(dist["sd"]))
            elif kind == "empirical":
                F = EmpiricalMargin(np.asarray(dist["samples"], dtype=np.float64))
            else:
                raise ParseError(f"{where}: unknown distribution type {kind!r}", source=source)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{where}: missing or malformed field {exc}", source=source) from None
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}", source=source) from None
        if mid in out:
            raise ParseError(f"{where}: duplicate margin {mid}", source=source)
        out[mid] = F
    return out


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- path helpers -----------------------------------------------------------


def read_grid(path) -> GridFunction:
    return loads_grid(_read_text(path), path)


def write_grid(path, f: GridFunction) -> None:
    _write_text(path, dumps_grid(f))


def read_array(path) -> StochasticArray:
    return loads_array(_read_text(path), path)


def write_array(path, A: StochasticArray) -> None:
    _write_text(path, dumps_array(A))


def read_rank_matrix(path) -> RankMatrix:
    return loads_rank_matrix(_read_text(path), path)


def write_rank_matrix(path, R: RankMatrix) -> None:
    _write_text(path, dumps_rank_matrix(R))


def read_subcopula(path) -> DiscreteSubcopula:
    return loads_subcopula(_read_text(path), path)


def write_subcopula(path, Ds: DiscreteSubcopula) -> None:
    _write_text(path, dumps_subcopula(Ds))

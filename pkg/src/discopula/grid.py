"""Functions on the lattice {0, 1/M, ..., 1}^L and the discrete copula axioms.

Grid points are addressed by integer coordinates ``(i_1, ..., i_L)`` with
``0 <= i_l <= M``; the scaling by ``1/M`` is implicit.  Values are stored as a
dense float64 array of shape ``(M + 1,) * L`` in C (row-major) order, so the
first coordinate varies slowest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import GridSizeError, StructureError

DEFAULT_EPS = 1e-9
MAX_DENSE_ENTRIES = 10**8


def _check_dense_size(side: int, L: int) -> None:
    # integer power: float overflow would hide huge L
    if side**L > MAX_DENSE_ENTRIES:
        raise GridSizeError(
            f"dense storage of {side}^{L} entries exceeds the limit of {MAX_DENSE_ENTRIES}"
        )


def _check_resolution(M, L) -> tuple[int, int]:
    if int(M) != M or int(L) != L or M < 1 or L < 1:
        raise StructureError(f"M and L must be positive integers, got M={M!r}, L={L!r}")
    return int(M), int(L)


class Violation(NamedTuple):
    """One failed axiom instance.

    ``witness`` holds the grid indices (or, for cell/box axioms, the
    ``(lower, upper)`` corner pair; for line-sum axioms, ``(axis, line)``)
    that exhibit the failure.
    """

    axiom: str
    witness: tuple
    observed: float
    required: str

    def to_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "witness": _jsonable(self.witness),
            "observed": float(self.observed),
            "required": self.required,
        }


def _jsonable(obj):
    if isinstance(obj, (tuple, list)):
        return [_jsonable(o) for o in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


@dataclass(frozen=True)
class AxiomReport:
    violations: tuple[Violation, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed

    def axioms(self) -> set[str]:
        return {v.axiom for v in self.violations}

    def to_dict(self) -> dict:
        return {"passed": self.passed, "violations": [v.to_dict() for v in self.violations]}

    def __str__(self) -> str:
        if self.passed:
            return "passed"
        lines = [f"failed ({len(self.violations)} violations)"]
        for v in self.violations:
            lines.append(f"  {v.axiom} at {_jsonable(v.witness)}: observed {v.observed!r}, required {v.required}")
        return "\n".join(lines)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real-valued function on the grid ``{0, ..., M}^L``.

    Parameters
    ----------
    M : int
        Grid resolution.
    L : int
        Dimension.
    values : array-like
        Either ``(M + 1)**L`` values in row-major order or an array of shape
        ``(M + 1,) * L``.  The stored array is a read-only float64 copy.
    """

    M: int
    L: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        M, L = _check_resolution(self.M, self.L)
        _check_dense_size(M + 1, L)
        values = np.array(self.values, dtype=np.float64)
        shape = (M + 1,) * L
        if values.size != (M + 1) ** L:
            raise StructureError(
                f"grid with M={M}, L={L} needs {(M + 1) ** L} values, got {values.size}"
            )
        if values.shape != shape:
            if values.ndim != 1:
                raise StructureError(f"grid values have shape {values.shape}, expected {shape}")
            values = values.reshape(shape)
        if not np.all(np.isfinite(values)):
            raise StructureError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "values", values)

    def __getitem__(self, index) -> float:
        return float(self.values[tuple(index)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridFunction):
            return NotImplemented
        return (self.M, self.L) == (other.M, other.L) and np.array_equal(self.values, other.values)

    __hash__ = None

    def flat(self) -> np.ndarray:
        return self.values.ravel()


def _validate_index(f: GridFunction, index: Sequence[int], name: str) -> tuple[int, ...]:
    index = tuple(int(i) for i in index)
    if len(index) != f.L:
        raise StructureError(f"{name} has {len(index)} coordinates, expected {f.L}")
    if any(i < 0 or i > f.M for i in index):
        raise StructureError(f"{name} {index} out of range [0, {f.M}]")
    return index


def box_volume(f: GridFunction, lower: Sequence[int], upper: Sequence[int]) -> float:
    """Alternating corner sum of ``f`` over the box ``[lower, upper]``.

    The sign of a corner is ``(-1)**k`` where ``k`` counts the coordinates
    taken from ``lower``.
    """
    lower = _validate_index(f, lower, "lower")
    upper = _validate_index(f, upper, "upper")
    if any(lo > up for lo, up in zip(lower, upper)):
        raise StructureError(f"lower {lower} exceeds upper {upper}")
    total = 0.0
    for pick in itertools.product((0, 1), repeat=f.L):
        corner = tuple(up if p else lo for p, lo, up in zip(pick, lower, upper))
        sign = -1.0 if (f.L - sum(pick)) % 2 else 1.0
        total += sign * f.values[corner]
    return total


def unit_cell_volumes(values: np.ndarray) -> np.ndarray:
    """All unit-cell volumes at once; entry ``j`` is the cell with lower corner ``j``."""
    out = values
    for axis in range(values.ndim):
        out = np.diff(out, axis=axis)
    return out


def check_discrete_copula(f: GridFunction, eps: float = DEFAULT_EPS) -> AxiomReport:
    """Check groundedness (D1), uniform margins (D2) and L-increasingness (D3).

    D3 is checked on unit cells only; nonnegative unit cells imply every box
    is nonnegative because box volumes are sums of the cells they contain.
    """
    if not isinstance(f, GridFunction):
        raise StructureError(f"expected a GridFunction, got {type(f).__name__}")
    M, L = f.M, f.L
    v = f.values
    found: list[Violation] = []

    grounded = np.zeros(v.shape, dtype=bool)
    for axis in range(L):
        sl = [slice(None)] * L
        sl[axis] = 0
        grounded[tuple(sl)] = True
    for idx in zip(*np.nonzero(grounded & (np.abs(v) > eps))):
        found.append(Violation("D1", tuple(int(i) for i in idx), float(v[idx]), "== 0"))

    for axis in range(L):
        for i in range(M + 1):
            idx = [M] * L
            idx[axis] = i
            idx = tuple(idx)
            if abs(v[idx] - i / M) > eps:
                found.append(Violation("D2", idx, float(v[idx]), f"== {i}/{M}"))

    cells = unit_cell_volumes(v)
    for low in zip(*np.nonzero(cells < -eps)):
        low = tuple(int(i) for i in low)
        up = tuple(i + 1 for i in low)
        found.append(Violation("D3", (low, up), float(cells[low]), ">= 0"))

    return AxiomReport(tuple(found))


def is_irreducible(f: GridFunction, eps: float = DEFAULT_EPS) -> bool:
    """True when every value lies within ``eps`` of a multiple of ``1/M``."""
    scaled = f.values * f.M
    return bool(np.all(np.abs(scaled - np.rint(scaled)) <= eps * f.M))


def _grid_coords(M: int, L: int) -> list[np.ndarray]:
    return np.meshgrid(*([np.arange(M + 1)] * L), indexing="ij", sparse=True)


def product_copula(M: int, L: int) -> GridFunction:
    """Independence copula: the product of the coordinates."""
    M, L = _check_resolution(M, L)
    _check_dense_size(M + 1, L)
    num = np.ones((1,) * L, dtype=np.int64)
    for c in _grid_coords(M, L):
        num = num * c
    # one division keeps corner values exact
    return GridFunction(M, L, num / M**L)


def min_copula(M: int, L: int) -> GridFunction:
    """Upper Frechet bound: the minimum of the coordinates."""
    M, L = _check_resolution(M, L)
    _check_dense_size(M + 1, L)
    coords = _grid_coords(M, L)
    num = coords[0]
    for c in coords[1:]:
        num = np.minimum(num, c)
    return GridFunction(M, L, np.broadcast_to(num, (M + 1,) * L) / M)

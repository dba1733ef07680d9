"""Stochastic arrays, permutation arrays and their correspondence with copulas.

A copula on the grid is ``1/M`` times the L-fold prefix sum of a stochastic
array, and the array is recovered by unit-cell differencing.  Permutation
arrays (0/1 stochastic arrays) correspond to irreducible copulas and are kept
sparsely as rank matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exceptions import AxiomError, StructureError
from .grid import (
    DEFAULT_EPS,
    AxiomReport,
    GridFunction,
    Violation,
    _check_dense_size,
    _check_resolution,
    check_discrete_copula,
    unit_cell_volumes,
)


@dataclass(frozen=True, eq=False)
class StochasticArray:
    """Nonnegative ``M^L`` array whose every line sum is one.

    Index ``(i_1, ..., i_L)`` with ``1 <= i_l <= M`` is stored at numpy position
    ``(i_1 - 1, ..., i_L - 1)``.  Axioms are not enforced at construction; use
    :func:`check_stochastic`.
    """

    M: int
    L: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        M, L = _check_resolution(self.M, self.L)
        _check_dense_size(M, L)
        entries = np.array(self.entries, dtype=np.float64)
        shape = (M,) * L
        if entries.size != M**L:
            raise StructureError(f"array with M={M}, L={L} needs {M**L} entries, got {entries.size}")
        if entries.shape != shape:
            if entries.ndim != 1:
                raise StructureError(f"array entries have shape {entries.shape}, expected {shape}")
            entries = entries.reshape(shape)
        if not np.all(np.isfinite(entries)):
            raise StructureError("array entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "entries", entries)

    def __eq__(self, other):
        if not isinstance(other, StochasticArray):
            return NotImplemented
        return (self.M, self.L) == (other.M, other.L) and np.array_equal(self.entries, other.entries)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class RankMatrix:
    """``M x L`` integer matrix whose columns are permutations of ``1..M``.

    Row ``m`` marks the 1 of a permutation array at ``ranks[m]``; as an ECC
    dependence template, row ``m`` holds the ranks of ensemble member ``m``.
    """

    ranks: np.ndarray

    def __post_init__(self):
        r = np.array(self.ranks)
        if r.ndim != 2 or r.shape[0] < 1 or r.shape[1] < 1:
            raise StructureError(f"rank matrix must be a non-empty 2-d array, got shape {r.shape}")
        if not np.issubdtype(r.dtype, np.integer):
            if not np.all(np.isfinite(r)) or np.any(r != np.rint(r)):
                raise StructureError("rank matrix entries must be integers")
        r = r.astype(np.int64)
        M = r.shape[0]
        expected = np.arange(1, M + 1)
        for col in range(r.shape[1]):
            if not np.array_equal(np.sort(r[:, col]), expected):
                raise StructureError(f"column {col + 1} of the rank matrix is not a permutation of 1..{M}")
        r.setflags(write=False)
        object.__setattr__(self, "ranks", r)

    @property
    def M(self) -> int:
        return self.ranks.shape[0]

    @property
    def L(self) -> int:
        return self.ranks.shape[1]

    def column(self, ell: int) -> np.ndarray:
        return self.ranks[:, ell]

    def canonical(self) -> "RankMatrix":
        """Rows sorted lexicographically, i.e. by the first-axis coordinate."""
        order = np.lexsort(self.ranks.T[::-1])
        return RankMatrix(self.ranks[order])

    def __eq__(self, other):
        if not isinstance(other, RankMatrix):
            return NotImplemented
        return np.array_equal(self.ranks, other.ranks)

    __hash__ = None


def check_stochastic(A: StochasticArray, eps: float = DEFAULT_EPS) -> AxiomReport:
    """Report negative entries (A1) and line sums away from one (A2).

    An A2 witness is ``(axis, line)``, both 1-based: the sum runs over all
    entries whose ``axis``-th index equals ``line``.
    """
    if not isinstance(A, StochasticArray):
        raise StructureError(f"expected a StochasticArray, got {type(A).__name__}")
    a = A.entries
    found: list[Violation] = []
    for idx in zip(*np.nonzero(a < -eps)):
        found.append(Violation("A1", tuple(int(i) + 1 for i in idx), float(a[idx]), ">= 0"))
    all_axes = tuple(range(A.L))
    for axis in range(A.L):
        sums = a.sum(axis=all_axes[:axis] + all_axes[axis + 1:])
        for line in np.nonzero(np.abs(sums - 1.0) > eps)[0]:
            found.append(Violation("A2", (axis + 1, int(line) + 1), float(sums[line]), "== 1"))
    return AxiomReport(tuple(found))


MAX_DENOMINATOR = 10**6


def _rationalize(x: float) -> Fraction:
    # simplest fraction that rounds to x; falls back to the exact binary value
    exact = Fraction(x)
    r = exact.limit_denominator(MAX_DENOMINATOR)
    return r if float(r) == x else exact


_to_fractions = np.vectorize(_rationalize, otypes=[object])
_to_floats = np.vectorize(float, otypes=[np.float64])


def copula_from_array(A: StochasticArray, eps: float = DEFAULT_EPS, exact: bool = False) -> GridFunction:
    """Scaled prefix sums: ``D(i) = (1/M) * sum_{j <= i} a_j``.

    With ``exact=True`` every entry is read as the simplest rational that
    rounds to it, the sums are exact and each value is rounded once.  This
    makes ``copula_from_array(array_from_copula(D, exact=True), exact=True)``
    reproduce ``D`` bit for bit whenever ``D`` has rational values with
    denominators up to ``MAX_DENOMINATOR``.
    """
    report = check_stochastic(A, eps)
    if not report.passed:
        raise AxiomError(f"not a stochastic array: {report}", report)
    _check_dense_size(A.M + 1, A.L)
    cum = _to_fractions(A.entries) if exact else A.entries
    cum = np.pad(cum, [(1, 0)] * A.L, constant_values=0)
    for axis in range(A.L):
        cum = np.cumsum(cum, axis=axis)
    if exact:
        return GridFunction(A.M, A.L, _to_floats(cum / Fraction(A.M)))
    return GridFunction(A.M, A.L, cum / A.M)


def array_from_copula(D: GridFunction, eps: float = DEFAULT_EPS, exact: bool = False) -> StochasticArray:
    """Invert :func:`copula_from_array` by unit-cell differencing.

    Differences in ``[-eps, 0)`` are floating-point noise and are set to zero.
    ``exact`` works as in :func:`copula_from_array`.
    """
    report = check_discrete_copula(D, eps)
    if not report.passed:
        raise AxiomError(f"not a discrete copula: {report}", report)
    if exact:
        entries = _to_floats(D.M * unit_cell_volumes(_to_fractions(D.values)))
    else:
        entries = D.M * unit_cell_volumes(D.values)
    entries[entries < 0] = 0.0
    return StochasticArray(D.M, D.L, entries)


def is_permutation_array(A: StochasticArray, eps: float = DEFAULT_EPS) -> bool:
    a = A.entries
    return bool(np.all((np.abs(a) <= eps) | (np.abs(a - 1.0) <= eps)))


def rank_matrix_from_permutation_array(A: StochasticArray, eps: float = DEFAULT_EPS) -> RankMatrix:
    """Coordinates of the ones of ``A``, rows ordered by the first axis."""
    if not check_stochastic(A, eps).passed or not is_permutation_array(A, eps):
        raise StructureError("input is not a permutation array")
    ones = np.argwhere(A.entries > 0.5)
    if ones.shape[0] != A.M:
        raise StructureError(f"permutation array must contain exactly {A.M} ones, found {ones.shape[0]}")
    # argwhere already yields lexicographic (first-axis-major) order
    return RankMatrix(ones + 1)


def permutation_array_from_rank_matrix(R: RankMatrix) -> StochasticArray:
    _check_dense_size(R.M, R.L)
    a = np.zeros((R.M,) * R.L)
    a[tuple((R.ranks - 1).T)] = 1.0
    return StochasticArray(R.M, R.L, a)


def random_rank_matrix(M: int, L: int, rng) -> RankMatrix:
    """Random Latin hypercube: independent uniform permutation columns."""
    rng = np.random.default_rng(rng)
    return RankMatrix(np.column_stack([rng.permutation(M) + 1 for _ in range(L)]))


def mixture_array(components: Sequence[RankMatrix], weights: Sequence[float]) -> StochasticArray:
    """Convex combination of permutation arrays given by rank matrices."""
    weights = np.asarray(weights, dtype=np.float64)
    if len(components) == 0 or len(components) != len(weights):
        raise StructureError("need one weight per component and at least one component")
    if np.any(weights < 0) or not np.isclose(weights.sum(), 1.0, rtol=0, atol=1e-12):
        raise StructureError("weights must be nonnegative and sum to one")
    M, L = components[0].M, components[0].L
    if any((R.M, R.L) != (M, L) for R in components):
        raise StructureError("all components must share M and L")
    _check_dense_size(M, L)
    a = np.zeros((M,) * L)
    for R, w in zip(components, weights):
        a[tuple((R.ranks - 1).T)] += w
    return StochasticArray(M, L, a)


def random_stochastic_array(M: int, L: int, k: int = 1, seed=None) -> StochasticArray:
    """Convex combination of ``k`` random permutation arrays with Dirichlet weights.

    ``k == 1`` returns a permutation array.  The output satisfies A1/A2 by
    construction and is a deterministic function of ``seed``.
    """
    if k < 1:
        raise ValueError(f"component count must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    components = [random_rank_matrix(M, L, rng) for _ in range(k)]
    weights = np.ones(1) if k == 1 else rng.dirichlet(np.ones(k))
    return mixture_array(components, weights)

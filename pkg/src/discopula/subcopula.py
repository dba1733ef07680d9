"""Discrete subcopulas and their extension to irreducible copulas.

A subcopula lives on a product of integer domains ``K_l``, each a sorted
subset of ``{0, ..., M}`` containing both endpoints.  Consecutive domain
points cut every axis into slabs; the product of slabs are the blocks.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .arrays import RankMatrix, copula_from_array, permutation_array_from_rank_matrix
from .exceptions import AxiomError, ExtensionError, StructureError
from .grid import (
    DEFAULT_EPS,
    AxiomReport,
    GridFunction,
    Violation,
    _check_resolution,
    unit_cell_volumes,
)

COUNT_TOL = 1e-6


def _normalize_domains(M: int, L: int, domains) -> tuple[tuple[int, ...], ...]:
    if len(domains) != L:
        raise StructureError(f"need {L} domains, got {len(domains)}")
    out = []
    for ell, dom in enumerate(domains):
        d = sorted({int(k) for k in dom})
        if len(d) != len(dom):
            raise StructureError(f"domain {ell + 1} has repeated points")
        if d[0] < 0 or d[-1] > M:
            raise StructureError(f"domain {ell + 1} has points outside [0, {M}]")
        if d[0] != 0 or d[-1] != M:
            raise StructureError(f"domain {ell + 1} must contain 0 and {M}")
        out.append(tuple(d))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class DiscreteSubcopula:
    """Values on ``K_1 x ... x K_L`` stored densely over the domain product."""

    M: int
    domains: tuple
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        M, _ = _check_resolution(self.M, 1)
        domains = _normalize_domains(M, len(self.domains), self.domains)
        shape = tuple(len(d) for d in domains)
        values = np.array(self.values, dtype=np.float64)
        if values.size != int(np.prod(shape)):
            raise StructureError(f"subcopula on domains of sizes {shape} needs {int(np.prod(shape))} values")
        values = values.reshape(shape)
        if not np.all(np.isfinite(values)):
            raise StructureError("subcopula values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "domains", domains)
        object.__setattr__(self, "values", values)

    @property
    def L(self) -> int:
        return len(self.domains)

    def __eq__(self, other):
        if not isinstance(other, DiscreteSubcopula):
            return NotImplemented
        return (
            self.M == other.M
            and self.domains == other.domains
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def value_at(self, point: Sequence[int]) -> float:
        """Value at grid coordinates (not domain positions)."""
        pos = tuple(d.index(int(k)) for d, k in zip(self.domains, point))
        return float(self.values[pos])


def check_subcopula(Ds: DiscreteSubcopula, eps: float = DEFAULT_EPS) -> AxiomReport:
    """Check S1 (grounded), S2 (margins on the domains), S3 (adjacent boxes).

    Witnesses are grid coordinates.  S3 is tested on boxes spanned by
    consecutive domain points; any domain box is a sum of those.
    """
    v, doms, L, M = Ds.values, Ds.domains, Ds.L, Ds.M
    found: list[Violation] = []

    def coords(pos):
        return tuple(doms[ell][p] for ell, p in enumerate(pos))

    for pos in np.ndindex(v.shape):
        if 0 in pos and abs(v[pos]) > eps:
            found.append(Violation("S1", coords(pos), float(v[pos]), "== 0"))
    for ell in range(L):
        for p, k in enumerate(doms[ell]):
            pos = [len(d) - 1 for d in doms]
            pos[ell] = p
            pos = tuple(pos)
            if abs(v[pos] - k / M) > eps:
                found.append(Violation("S2", coords(pos), float(v[pos]), f"== {k}/{M}"))
    vols = unit_cell_volumes(v)
    for low in zip(*np.nonzero(vols < -eps)):
        up = tuple(int(p) + 1 for p in low)
        found.append(Violation("S3", (coords(low), coords(up)), float(vols[low]), ">= 0"))
    return AxiomReport(tuple(found))


def restrict(D: GridFunction, domains) -> DiscreteSubcopula:
    """Pointwise restriction of ``D`` to the product of ``domains``."""
    domains = _normalize_domains(D.M, D.L, domains)
    return DiscreteSubcopula(D.M, domains, D.values[np.ix_(*domains)])


def _is_irreducible_sub(Ds: DiscreteSubcopula, eps: float) -> bool:
    scaled = Ds.values * Ds.M
    return bool(np.all(np.abs(scaled - np.rint(scaled)) <= eps * Ds.M))


def block_counts(Ds: DiscreteSubcopula, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Number of ones each block must hold: ``M`` times the block volume.

    Entry ``(s_1, ..., s_L)`` belongs to the block between domain points
    ``s_l`` and ``s_l + 1`` on every axis.
    """
    if not _is_irreducible_sub(Ds, eps):
        raise ExtensionError("subcopula is not irreducible: some value is not a multiple of 1/M")
    raw = Ds.M * unit_cell_volumes(Ds.values)
    counts = np.rint(raw)
    bad = np.abs(raw - counts) >= COUNT_TOL
    if np.any(bad):
        where = tuple(int(i) for i in np.argwhere(bad)[0])
        raise ExtensionError(f"block {where} has non-integral count {raw[where]!r}")
    if np.any(counts < 0):
        where = tuple(int(i) for i in np.argwhere(counts < 0)[0])
        raise ExtensionError(f"block {where} has negative count {int(counts[where])}")
    return counts.astype(np.int64)


def extension_rank_matrix(Ds: DiscreteSubcopula, eps: float = DEFAULT_EPS) -> RankMatrix:
    """Permutation array whose copula extends ``Ds``, as a rank matrix.

    Blocks are visited in lexicographic order.  Each axis keeps, per slab, a
    queue of unused lines in increasing order; a block with count ``c`` takes
    the next ``c`` lines of its slab on every axis and pairs them diagonally.
    """
    counts = block_counts(Ds, eps)
    queues = [
        [deque(range(d[s] + 1, d[s + 1] + 1)) for s in range(len(d) - 1)]
        for d in Ds.domains
    ]
    rows = []
    for block in np.ndindex(counts.shape):
        c = int(counts[block])
        if c == 0:
            continue
        taken = []
        for ell, s in enumerate(block):
            q = queues[ell][s]
            if len(q) < c:
                raise ExtensionError(
                    f"slab {s} of axis {ell + 1} has {len(q)} free lines, block {block} needs {c}"
                )
            taken.append([q.popleft() for _ in range(c)])
        rows.extend(zip(*taken))
    leftover = sum(len(q) for qs in queues for q in qs)
    if leftover or len(rows) != Ds.M:
        raise ExtensionError(f"block counts do not fill every line ({leftover} lines unused)")
    return RankMatrix(np.array(rows, dtype=np.int64))


def extend_irreducible(Ds: DiscreteSubcopula, eps: float = DEFAULT_EPS) -> GridFunction:
    """An irreducible copula on the full grid whose restriction is ``Ds``."""
    report = check_subcopula(Ds, eps)
    if not report.passed:
        raise AxiomError(f"not a discrete subcopula: {report}", report)
    R = extension_rank_matrix(Ds, eps)
    return copula_from_array(permutation_array_from_rank_matrix(R))

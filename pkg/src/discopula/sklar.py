"""Sklar's theorem on the grid: composing and decomposing discrete joint CDFs.

Only joint distributions with finite support and masses that are multiples
of ``1/M`` are handled; these are exactly the joint CDFs whose range lies in
``{0, 1/M, ..., 1}``.  Masses and CDF levels are carried as integer
numerators over ``M`` so that every comparison here is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import AxiomError, NotRepresentableError, ResolutionMismatchError, StructureError
from .grid import DEFAULT_EPS, GridFunction, check_discrete_copula, is_irreducible, unit_cell_volumes
from .subcopula import DiscreteSubcopula, extend_irreducible

MASS_TOL = 1e-9


def _as_numerators(values, M: int, what: str) -> np.ndarray:
    scaled = np.asarray(values, dtype=np.float64) * M
    num = np.rint(scaled)
    if np.any(np.abs(scaled - num) > MASS_TOL * M):
        bad = float(np.asarray(values, dtype=np.float64).ravel()[np.argmax(np.abs(scaled - num).ravel())])
        raise NotRepresentableError(f"{what} {bad!r} is not a multiple of 1/{M}")
    return num.astype(np.int64)


def _strictly_increasing(x: np.ndarray, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise StructureError(f"{what} must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(x)):
        raise StructureError(f"{what} must be finite")
    if np.any(np.diff(x) <= 0):
        raise StructureError(f"{what} must be strictly increasing")
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class StepCDF:
    """Right-continuous step CDF with jumps at ``support``.

    ``levels[j]`` is ``M`` times ``F(support[j])``; levels are non-decreasing
    integers ending at ``M``.
    """

    support: np.ndarray
    levels: np.ndarray
    M: int

    def __post_init__(self):
        support = _strictly_increasing(self.support, "support")
        levels = np.asarray(self.levels)
        if levels.shape != support.shape:
            raise StructureError("support and levels must have equal length")
        if not np.issubdtype(levels.dtype, np.integer):
            if np.any(levels != np.rint(levels)):
                raise StructureError("levels must be integer numerators over M")
        levels = levels.astype(np.int64)
        M = int(self.M)
        if np.any(np.diff(levels) < 0) or levels[0] < 0 or levels[-1] != M:
            raise StructureError(f"levels must be non-decreasing in [0, {M}] and end at {M}")
        levels.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "M", M)

    @classmethod
    def from_probabilities(cls, support, probs, M: int) -> "StepCDF":
        return cls(support, _as_numerators(probs, M, "cdf level"), M)

    def level(self, x):
        """``M * F(x)`` as an integer; accepts arrays and +-inf."""
        pos = np.searchsorted(self.support, np.asarray(x, dtype=np.float64), side="right")
        return np.where(pos > 0, self.levels[np.maximum(pos - 1, 0)], 0)

    def __call__(self, x):
        return self.level(x) / self.M

    def range_levels(self) -> tuple[int, ...]:
        return tuple(sorted({0, *self.levels.tolist()}))


@dataclass(frozen=True, eq=False)
class DiscreteJointDistribution:
    """Point masses on the product of per-axis supports.

    ``counts`` holds ``M`` times the mass of each support-grid point.
    """

    supports: tuple
    counts: np.ndarray = field(repr=False)
    M: int

    def __post_init__(self):
        supports = tuple(_strictly_increasing(s, f"support {ell + 1}") for ell, s in enumerate(self.supports))
        counts = np.asarray(self.counts)
        shape = tuple(s.size for s in supports)
        if counts.shape != shape:
            raise StructureError(f"counts have shape {counts.shape}, expected {shape}")
        counts = counts.astype(np.int64)
        M = int(self.M)
        if np.any(counts < 0):
            raise StructureError("masses must be nonnegative")
        if counts.sum() != M:
            raise StructureError(f"masses must sum to one (numerators sum to {counts.sum()}, expected {M})")
        counts.setflags(write=False)
        object.__setattr__(self, "supports", supports)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "M", M)

    @classmethod
    def from_points(cls, points, masses, M: int) -> "DiscreteJointDistribution":
        """Build from a list of atoms; repeated atoms have their masses added."""
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2:
            raise StructureError("points must be a 2-d array of shape (n_atoms, L)")
        num = _as_numerators(masses, M, "mass")
        if num.shape != (points.shape[0],):
            raise StructureError("need one mass per point")
        supports = [np.unique(points[:, ell]) for ell in range(points.shape[1])]
        counts = np.zeros(tuple(s.size for s in supports), dtype=np.int64)
        idx = tuple(np.searchsorted(s, points[:, ell]) for ell, s in enumerate(supports))
        np.add.at(counts, idx, num)
        return cls(tuple(supports), counts, M)

    @property
    def L(self) -> int:
        return len(self.supports)

    @property
    def mass(self) -> np.ndarray:
        return self.counts / self.M

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        """Support points with positive mass and their numerators."""
        idx = np.nonzero(self.counts)
        pts = np.column_stack([s[i] for s, i in zip(self.supports, idx)])
        return pts, self.counts[idx]

    def margins(self) -> list[StepCDF]:
        axes = tuple(range(self.L))
        out = []
        for ell, s in enumerate(self.supports):
            marg = self.counts.sum(axis=axes[:ell] + axes[ell + 1:])
            out.append(StepCDF(s, np.cumsum(marg), self.M))
        return out

    def cumulative_counts(self) -> np.ndarray:
        """``M * H`` on the support grid, with a leading zero slot per axis for -inf."""
        cum = np.pad(self.counts, [(1, 0)] * self.L)
        for axis in range(self.L):
            cum = np.cumsum(cum, axis=axis)
        return cum

    def cdf(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        pos = tuple(int(np.searchsorted(s, xi, side="right")) for s, xi in zip(self.supports, x))
        return float(self.cumulative_counts()[pos]) / self.M


class JointCDF:
    """``H(x) = D(F_1(x_1), ..., F_L(x_L))`` for an irreducible copula ``D``."""

    def __init__(self, copula: GridFunction, margins: Sequence[StepCDF]):
        self.copula = copula
        self.margins = tuple(margins)
        self._numerators = np.rint(copula.values * copula.M).astype(np.int64)

    @property
    def M(self) -> int:
        return self.copula.M

    def level(self, x) -> int:
        """``M * H(x)`` as an integer."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (len(self.margins),):
            raise StructureError(f"point must have {len(self.margins)} coordinates")
        idx = tuple(int(F.level(xi)) for F, xi in zip(self.margins, x))
        return int(self._numerators[idx])

    def __call__(self, x) -> float:
        return self.level(x) / self.M

    def to_joint_distribution(self) -> DiscreteJointDistribution:
        """Point masses on the product of the margin supports."""
        idx = [F.levels for F in self.margins]
        H = np.pad(self._numerators[np.ix_(*idx)], [(1, 0)] * len(idx))
        return DiscreteJointDistribution(tuple(F.support for F in self.margins), unit_cell_volumes(H), self.M)


def compose(D: GridFunction, margins: Sequence[StepCDF], eps: float = DEFAULT_EPS) -> JointCDF:
    """Joint CDF from an irreducible copula and margins with levels in I_M."""
    if len(margins) != D.L:
        raise StructureError(f"copula has dimension {D.L} but {len(margins)} margins were given")
    for ell, F in enumerate(margins):
        if F.M != D.M:
            raise ResolutionMismatchError(f"margin {ell + 1} has resolution {F.M}, copula has {D.M}")
    report = check_discrete_copula(D, eps)
    if not report.passed:
        raise AxiomError(f"not a discrete copula: {report}", report)
    if not is_irreducible(D, eps):
        raise AxiomError("composition requires an irreducible copula")
    return JointCDF(D, margins)


class SklarResult(NamedTuple):
    copula: GridFunction
    unique: bool


def subcopula_of(J: DiscreteJointDistribution) -> DiscreteSubcopula:
    """The subcopula ``D*(F_1(x_1), ..., F_L(x_L)) = H(x)`` on the margin ranges."""
    margins = J.margins()
    domains, positions = [], []
    for F in margins:
        dom = F.range_levels()
        # slot 0 of the cumulative counts is -inf; support j sits at slot j + 1
        pos = [0] + [int(np.argmax(F.levels == k)) + 1 for k in dom[1:]]
        domains.append(dom)
        positions.append(pos)
    values = J.cumulative_counts()[np.ix_(*positions)] / J.M
    return DiscreteSubcopula(J.M, tuple(domains), values)


def extract_copula(J: DiscreteJointDistribution, eps: float = DEFAULT_EPS) -> SklarResult:
    """An irreducible copula linking ``J`` to its margins.

    ``unique`` is true exactly when every margin takes all values in I_M.
    """
    sub = subcopula_of(J)
    D = extend_irreducible(sub, eps)
    unique = all(len(d) == J.M + 1 for d in sub.domains)
    return SklarResult(D, unique)

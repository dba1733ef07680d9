"""Ranks, empirical copulas and samples realising a given rank pattern."""

from __future__ import annotations

import string
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .arrays import RankMatrix
from .exceptions import StructureError, TieError
from .grid import GridFunction, _check_dense_size

TIE_POLICIES = ("reject", "first", "random")


def column_rng(seed: int, column: int) -> np.random.Generator:
    """Independent generator for one column, derived from ``(seed, column)``.

    Streams do not depend on processing order, so serial and parallel
    per-column work give identical results.
    """
    return np.random.default_rng([int(seed), int(column)])


def _has_ties(col: np.ndarray) -> bool:
    s = np.sort(col)
    return bool(np.any(s[1:] == s[:-1]))


def _rank_column(col: np.ndarray, column: int, ties: str, seed) -> np.ndarray:
    M = col.shape[0]
    if ties == "first":
        order = np.argsort(col, kind="stable")
    elif _has_ties(col):
        if ties == "reject":
            s = np.sort(col)
            raise TieError(column + 1, float(s[1:][s[1:] == s[:-1]][0]))
        order = np.lexsort((column_rng(seed, column).random(M), col))
    else:
        order = np.argsort(col, kind="stable")
    r = np.empty(M, dtype=np.int64)
    r[order] = np.arange(1, M + 1)
    return r


def ranks(points, ties: str = "reject", seed=None) -> RankMatrix:
    """Per-column ranks of an ``M x L`` sample, 1 for the smallest value.

    Parameters
    ----------
    points : array-like of shape (M, L)
    ties : {"reject", "first", "random"}
        ``"reject"`` raises :class:`TieError` on any tie, ``"first"`` ranks tied
        values by order of occurrence, ``"random"`` breaks ties uniformly at
        random using a stream derived from ``seed`` and the column index.
    seed : int, optional
        Required for ``ties="random"``.
    """
    if ties not in TIE_POLICIES:
        raise ValueError(f"unknown tie policy {ties!r}; expected one of {TIE_POLICIES}")
    if ties == "random" and seed is None:
        raise ValueError("the random tie policy requires an explicit seed")
    X = check_array(points, dtype=np.float64, ensure_all_finite=True)
    return RankMatrix(np.column_stack([_rank_column(X[:, j], j, ties, seed) for j in range(X.shape[1])]))


def empirical_copula_from_ranks(R: RankMatrix) -> GridFunction:
    """Indicator counting: ``E(i) = #{m : R[m, l] <= i_l for all l} / M``."""
    M, L = R.M, R.L
    _check_dense_size(M + 1, L)
    if L > len(string.ascii_letters) - 1:
        raise StructureError(f"dimension {L} too large for dense evaluation")
    grid = np.arange(M + 1)
    # below[l][m, i] = 1{rank of member m in column l <= i}
    below = [(R.ranks[:, ell, None] <= grid[None, :]).astype(np.int64) for ell in range(L)]
    letters = string.ascii_letters[1 : L + 1]
    subscripts = ",".join("a" + c for c in letters) + "->" + letters
    counts = np.einsum(subscripts, *below)
    return GridFunction(M, L, counts / M)


def empirical_copula(points, ties: str = "reject", seed=None) -> GridFunction:
    """Empirical copula of an ``M x L`` sample on the grid of resolution ``M``."""
    return empirical_copula_from_ranks(ranks(points, ties=ties, seed=seed))


def sample_set_from_rank_matrix(R: RankMatrix, grids: Sequence[Sequence[float]]) -> np.ndarray:
    """Place the ``R[m, l]``-th smallest value of ``grids[l]`` at ``(m, l)``.

    The result has ranks ``R`` and hence the empirical copula of the
    permutation array encoded by ``R``.
    """
    if len(grids) != R.L:
        raise StructureError(f"need {R.L} value grids, got {len(grids)}")
    cols = []
    for ell, g in enumerate(grids):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != (R.M,):
            raise StructureError(f"grid {ell + 1} must hold {R.M} values, got shape {g.shape}")
        if np.any(np.diff(g) <= 0):
            raise StructureError(f"grid {ell + 1} is not strictly increasing")
        cols.append(g[R.ranks[:, ell] - 1])
    return np.column_stack(cols)


class EmpiricalCopula(TransformerMixin, BaseEstimator):
    """Empirical copula of a multivariate sample.

    ``fit`` ranks the training sample; ``transform`` maps points to grid
    coordinates ``(i_1, ..., i_L)`` through the empirical margins, i.e.
    ``i_l = #{m : x_m^l <= x_l}``.  Dividing by ``M`` gives pseudo-observations.

    Parameters
    ----------
    ties : {"reject", "first", "random"}, default="reject"
    random_state : int, optional
        Seed for ``ties="random"``.

    Attributes
    ----------
    ranks_ : RankMatrix
    n_members_ : int
        Sample size ``M``, the grid resolution.
    n_features_in_ : int
    """

    def __init__(self, ties="reject", random_state=None):
        self.ties = ties
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.ranks_ = ranks(X, ties=self.ties, seed=self.random_state)
        self.sorted_ = np.sort(X, axis=0)
        self.n_members_, self.n_features_in_ = X.shape
        return self

    def transform(self, X):
        check_is_fitted(self, "ranks_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return np.column_stack(
            [np.searchsorted(self.sorted_[:, j], X[:, j], side="right") for j in range(X.shape[1])]
        )

    @property
    def copula_(self) -> GridFunction:
        check_is_fitted(self, "ranks_")
        return empirical_copula_from_ranks(self.ranks_)

    def evaluate(self, index) -> float:
        """Copula value at integer grid coordinates, without a dense grid."""
        check_is_fitted(self, "ranks_")
        index = np.asarray(index)
        return float(np.count_nonzero(np.all(self.ranks_.ranks <= index, axis=1))) / self.n_members_

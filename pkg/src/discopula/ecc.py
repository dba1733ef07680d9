"""Ensemble copula coupling (ECC).

The raw ensemble supplies a rank template: for every margin, the permutation
of members induced by sorting their forecasts.  Samples drawn from calibrated
univariate predictive distributions are then placed so that member ``m`` of
margin ``l`` receives the ``sigma_l(m)``-th smallest sample.  Raw and ECC
ensembles therefore share the same empirical copula.

Nothing here materialises a copula grid; memory stays ``O(M * L)``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .arrays import RankMatrix
from .empirical import _has_ties, column_rng, ranks
from .exceptions import StructureError, TieError
from .normal import ndtr, ndtri

SCHEMES = ("quantiles", "random")


class MarginId(NamedTuple):
    variable: str
    location: str
    lead_time: str

    def __str__(self) -> str:
        return f"{self.variable}/{self.location}/{self.lead_time}"


@dataclass(frozen=True, eq=False)
class EnsembleDataset:
    """``M`` members by ``L`` margins of real-valued forecasts."""

    margins: tuple
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        margins = tuple(MarginId(*m) for m in self.margins)
        if len(set(margins)) != len(margins):
            raise StructureError("margin ids must be unique")
        values = check_array(self.values, dtype=np.float64, copy=True)
        if values.shape[1] != len(margins):
            raise StructureError(f"{values.shape[1]} value columns for {len(margins)} margins")
        values.setflags(write=False)
        object.__setattr__(self, "margins", margins)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, values, margins=None) -> "EnsembleDataset":
        values = np.asarray(values, dtype=np.float64)
        if margins is None:
            margins = [MarginId("x", str(ell + 1), "0") for ell in range(values.shape[1])]
        return cls(tuple(margins), values)

    @property
    def members(self) -> int:
        return self.values.shape[0]

    @property
    def L(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, EnsembleDataset):
            return NotImplemented
        return self.margins == other.margins and np.array_equal(self.values, other.values)

    __hash__ = None


class PredictiveMargin:
    """A univariate predictive distribution exposing ``quantile`` and ``cdf``."""

    def quantile(self, p):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianMargin(PredictiveMargin):
    mean: float
    sd: float

    def __post_init__(self):
        if not (np.isfinite(self.mean) and np.isfinite(self.sd)):
            raise ValueError("gaussian margin parameters must be finite")
        if self.sd <= 0:
            raise ValueError(f"gaussian margin needs sd > 0, got {self.sd}")

    def quantile(self, p):
        return self.mean + self.sd * ndtri(p)

    def cdf(self, x):
        return ndtr((np.asarray(x, dtype=np.float64) - self.mean) / self.sd)


@dataclass(frozen=True, eq=False)
class EmpiricalMargin(PredictiveMargin):
    """Empirical distribution of a finite sample.

    ``quantile(p)`` is the ``ceil(p * N)``-th smallest sample, the left
    inverse of the right-continuous empirical CDF.
    """

    samples: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=np.float64).ravel())
        if s.size == 0 or not np.all(np.isfinite(s)):
            raise ValueError("empirical margin needs at least one finite sample")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def quantile(self, p):
        n = self.samples.size
        k = np.clip(np.ceil(np.asarray(p, dtype=np.float64) * n).astype(np.int64), 1, n)
        return self.samples[k - 1]

    def cdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.samples.size


def _uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    # open interval (0, 1): quantile functions are infinite at the endpoints
    return (rng.integers(0, 2**53, size=n) + 0.5) / 2.0**53


def marginal_samples(F: PredictiveMargin, M: int, scheme: str = "quantiles", rng=None) -> np.ndarray:
    """``M`` sorted samples from ``F``.

    ``"quantiles"`` takes the equally spaced ``(m - 1/2)/M`` quantiles;
    ``"random"`` draws ``M`` inverse-CDF samples from ``rng`` and sorts them.
    """
    if M < 1:
        raise ValueError(f"need at least one sample, got M={M}")
    if scheme == "quantiles":
        p = (np.arange(1, M + 1) - 0.5) / M
    elif scheme == "random":
        if rng is None:
            raise ValueError("the random scheme requires an explicit generator or seed")
        p = _uniforms(np.random.default_rng(rng), M)
    else:
        raise ValueError(f"unknown sampling scheme {scheme!r}; expected one of {SCHEMES}")
    return np.sort(np.asarray(F.quantile(p), dtype=np.float64))


def dependence_template(raw, seed=None) -> RankMatrix:
    """Per-margin ranks of the raw members; ties are broken at random.

    A seed is only needed when some margin contains ties.
    """
    values = raw.values if isinstance(raw, EnsembleDataset) else raw
    if seed is None:
        try:
            return ranks(values, ties="reject")
        except TieError as exc:
            raise ValueError(f"raw ensemble has ties ({exc}); pass a seed to resolve them") from exc
    return ranks(values, ties="random", seed=seed)


def _sample_matrix(samples, M: int, L: int) -> np.ndarray:
    cols = [np.asarray(s, dtype=np.float64) for s in samples]
    if len(cols) != L:
        raise StructureError(f"template has {L} margins but {len(cols)} sample sequences were given")
    for ell, c in enumerate(cols):
        if c.shape != (M,):
            raise StructureError(f"margin {ell + 1} needs {M} samples, got shape {c.shape}")
        if np.any(np.diff(c) < 0):
            raise StructureError(f"samples of margin {ell + 1} are not sorted")
    return np.column_stack(cols)


def _reorder(template: RankMatrix, samples) -> np.ndarray:
    X = _sample_matrix(samples, template.M, template.L)
    return np.take_along_axis(X, template.ranks - 1, axis=0)


def ecc_reorder(template: RankMatrix, samples: Sequence[Sequence[float]], margins=None) -> EnsembleDataset:
    """Member ``m`` of margin ``l`` gets ``samples[l][template[m, l] - 1]``.

    ``samples`` holds one sorted sequence of length ``M`` per margin;
    ``margins`` optionally names the columns (defaults as in
    :meth:`EnsembleDataset.from_array`).
    """
    return EnsembleDataset.from_array(_reorder(template, samples), margins)


@dataclass(frozen=True)
class PreservationReport:
    preserved: bool
    mismatched_margins: tuple = ()
    tied_margins: tuple = ()

    def __bool__(self) -> bool:
        return self.preserved


def verify_copula_preservation(raw, ecc, seed=None) -> PreservationReport:
    """Check that ``ecc`` orders its members exactly like ``raw`` in every margin.

    For tie-free ECC values this is equality of the two rank templates.
    Margins where ECC values tie are listed in ``tied_margins``; they count as
    preserved when the values are non-decreasing along the raw member order.
    """
    raw_v = raw.values if isinstance(raw, EnsembleDataset) else np.asarray(raw, dtype=np.float64)
    ecc_v = ecc.values if isinstance(ecc, EnsembleDataset) else np.asarray(ecc, dtype=np.float64)
    if raw_v.shape != ecc_v.shape:
        raise StructureError(f"raw shape {raw_v.shape} differs from ECC shape {ecc_v.shape}")
    template = dependence_template(raw_v, seed)
    mismatched, tied = [], []
    for ell in range(raw_v.shape[1]):
        col = ecc_v[:, ell]
        if _has_ties(col):
            tied.append(ell)
            by_rank = col[np.argsort(template.ranks[:, ell])]
            ok = bool(np.all(np.diff(by_rank) >= 0))
        else:
            ok = np.array_equal(ranks(col[:, None]).ranks[:, 0], template.ranks[:, ell])
        if not ok:
            mismatched.append(ell)
    return PreservationReport(not mismatched, tuple(mismatched), tuple(tied))


def template_hash(template: RankMatrix) -> str:
    """SHA-256 of the template as little-endian int64, prefixed by its shape."""
    h = hashlib.sha256(f"{template.M}x{template.L}:".encode())
    h.update(np.ascontiguousarray(template.ranks, dtype="<i8").tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class EccReport:
    preserved: bool
    template_hash: str
    per_margin: tuple
    tied_margins: tuple = ()
    scheme: str = "quantiles"

    def to_dict(self) -> dict:
        return {
            "preserved": self.preserved,
            "template_hash": self.template_hash,
            "per_margin": [dict(d) for d in self.per_margin],
            "tied_margins": list(self.tied_margins),
            "scheme": self.scheme,
        }


def _aligned_margins(raw: EnsembleDataset, margins) -> list[PredictiveMargin]:
    if isinstance(margins, Mapping):
        keyed = {MarginId(*k): v for k, v in margins.items()}
        missing = [str(m) for m in raw.margins if m not in keyed]
        extra = [str(k) for k in keyed if k not in set(raw.margins)]
        if missing or extra:
            raise StructureError(f"margin mismatch: missing {missing}, unexpected {extra}")
        return [keyed[m] for m in raw.margins]
    margins = list(margins)
    if len(margins) != raw.L:
        raise StructureError(f"raw ensemble has {raw.L} margins but {len(margins)} distributions were given")
    return margins


def run_ecc(raw: EnsembleDataset, margins, scheme: str = "quantiles", seed=None):
    """Sample every predictive margin and reorder by the raw rank template.

    Returns the ECC ensemble and an :class:`EccReport`.  Random draws use an
    independent stream per margin derived from ``(seed, margin index)``.
    """
    dists = _aligned_margins(raw, margins)
    if scheme == "random" and seed is None:
        raise ValueError("the random scheme requires an explicit seed")
    template = dependence_template(raw, seed)
    M = raw.members
    samples = [
        marginal_samples(F, M, scheme, column_rng(seed, ell) if scheme == "random" else None)
        for ell, F in enumerate(dists)
    ]
    out = ecc_reorder(template, samples, raw.margins)
    check = verify_copula_preservation(raw, out, seed)
    per_margin = tuple(
        {"id": str(m), "min": float(s[0]), "max": float(s[-1])} for m, s in zip(raw.margins, samples)
    )
    tied = tuple(str(raw.margins[ell]) for ell in check.tied_margins)
    return out, EccReport(check.preserved, template_hash(template), per_margin, tied, scheme)


class EnsembleCopulaCoupling(TransformerMixin, BaseEstimator):
    """Reorder postprocessed samples by the rank structure of a raw ensemble.

    ``fit`` takes the raw ensemble (members x margins) and stores its rank
    template.  ``transform`` takes a matrix of the same shape holding ``M``
    postprocessed samples per margin, in any order, and returns them reordered
    so that member ``m`` gets the ``template_[m, l]``-th smallest sample.

    Parameters
    ----------
    scheme : {"quantiles", "random"}, default="quantiles"
        Sampling scheme used by :meth:`sample`.
    random_state : int, optional
        Seed for tie-breaking in the raw ensemble and for random draws.
    """

    def __init__(self, scheme="quantiles", random_state=None):
        self.scheme = scheme
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.template_ = dependence_template(X, self.random_state)
        self.n_members_, self.n_features_in_ = X.shape
        return self

    def transform(self, X):
        check_is_fitted(self, "template_")
        X = check_array(X, dtype=np.float64)
        if X.shape != (self.n_members_, self.n_features_in_):
            raise ValueError(
                f"X has shape {X.shape}, expected {(self.n_members_, self.n_features_in_)}"
            )
        return _reorder(self.template_, np.sort(X, axis=0).T)

    def sample(self, margins: Sequence[PredictiveMargin]) -> np.ndarray:
        """Draw from each predictive margin and reorder (the full ECC step)."""
        check_is_fitted(self, "template_")
        if len(margins) != self.n_features_in_:
            raise ValueError(f"need {self.n_features_in_} margins, got {len(margins)}")
        if self.scheme == "random" and self.random_state is None:
            raise ValueError("the random scheme requires random_state")
        samples = [
            marginal_samples(
                F,
                self.n_members_,
                self.scheme,
                column_rng(self.random_state, ell) if self.scheme == "random" else None,
            )
            for ell, F in enumerate(margins)
        ]
        return _reorder(self.template_, samples)

from fractions import Fraction

import numpy as np
import pytest

import oracles
from discopula import (
    DiscreteSubcopula,
    block_counts,
    check_discrete_copula,
    check_subcopula,
    copula_from_array,
    extend_irreducible,
    is_irreducible,
    min_copula,
    permutation_array_from_rank_matrix,
    product_copula,
    random_rank_matrix,
    restrict,
)
from discopula.exceptions import AxiomError, ExtensionError, StructureError


def assert_exact_irreducible(E):
    """Values are exactly n/M and the integer numerators satisfy every axiom."""
    M, L = E.M, E.L
    n = np.rint(E.values * M).astype(np.int64)
    assert np.array_equal(E.values, n / M)
    for axis in range(L):
        assert not np.take(n, 0, axis=axis).any()
        top = n[tuple(slice(None) if a == axis else M for a in range(L))]
        assert top.tolist() == list(range(M + 1))
    vol = n
    for axis in range(L):
        vol = np.diff(vol, axis=axis)
    assert vol.min() >= 0


def random_domain(M, rng):
    inner = [k for k in range(1, M) if rng.random() < 0.5]
    return [0, *inner, M]


def random_irreducible(M, L, rng):
    return copula_from_array(permutation_array_from_rank_matrix(random_rank_matrix(M, L, rng)))


def test_block_counts_of_restricted_min_copula():
    sub = restrict(min_copula(4, 2), [[0, 2, 4], [0, 2, 4]])
    assert sub.values.tolist() == [[0, 0, 0], [0, 0.5, 0.5], [0, 0.5, 1]]
    assert block_counts(sub).tolist() == [[2, 0], [0, 2]]
    assert extend_irreducible(sub) == min_copula(4, 2)


def _corner(L):
    v = np.zeros((2,) * L)
    v[(1,) * L] = 1.0
    return v


def test_trivial_subcopula_extends_to_min_copula():
    for M in (1, 2, 5):
        for L in (1, 2, 3):
            sub = DiscreteSubcopula(M, [[0, M]] * L, _corner(L))
            assert block_counts(sub).reshape(-1).tolist() == [M]
            assert extend_irreducible(sub) == min_copula(M, L)


def test_full_domain_returns_the_copula():
    rng = np.random.default_rng(2)
    for _ in range(20):
        M, L = int(rng.integers(1, 6)), int(rng.integers(1, 4))
        D = random_irreducible(M, L, rng)
        assert extend_irreducible(restrict(D, [range(M + 1)] * L)) == D


def test_random_restrictions_round_trip():
    rng = np.random.default_rng(9)
    for _ in range(100):
        M, L = int(rng.integers(1, 9)), int(rng.integers(1, 4))
        D = random_irreducible(M, L, rng)
        sub = restrict(D, [random_domain(M, rng) for _ in range(L)])
        assert check_subcopula(sub).passed
        E = extend_irreducible(sub)
        assert_exact_irreducible(E)
        assert check_discrete_copula(E).passed and is_irreducible(E)
        assert restrict(E, sub.domains) == sub


@pytest.mark.parametrize("M", [2, 3, 4])
def test_extension_between_brute_force_bounds(M):
    rng = np.random.default_rng(M)
    for _ in range(15):
        D = random_irreducible(M, 2, rng)
        doms = [random_domain(M, rng) for _ in range(2)]
        sub = restrict(D, doms)
        sub_values = {
            (a, b): Fraction(round(sub.value_at((a, b)) * M), M) for a in doms[0] for b in doms[1]
        }
        all_ext = oracles.extensions_2d(M, doms, sub_values)
        assert all_ext
        E = extend_irreducible(sub)
        as_dict = {k: Fraction(round(v * M), M) for k, v in np.ndenumerate(E.values)}
        assert as_dict in all_ext
        for k in as_dict:
            assert min(x[k] for x in all_ext) <= as_dict[k] <= max(x[k] for x in all_ext)


def test_product_copula_restriction_not_extendable():
    sub = restrict(product_copula(2, 2), [[0, 1, 2], [0, 1, 2]])
    with pytest.raises(ExtensionError):
        extend_irreducible(sub)


def test_fractional_block_count_rejected():
    # value 1/2 on a grid of resolution 4 is fine, but a block of volume 1/8 is not
    v = np.array([[0, 0, 0], [0, 0.125, 0.5], [0, 0.5, 1.0]])
    sub = DiscreteSubcopula(4, [[0, 2, 4], [0, 2, 4]], v)
    with pytest.raises(ExtensionError):
        block_counts(sub)


def test_invalid_subcopula_reports_witnesses():
    v = np.array([[0, 0, 0], [0, 0.75, 0.5], [0, 0.5, 1.0]])
    sub = DiscreteSubcopula(4, [[0, 2, 4], [0, 2, 4]], v)
    report = check_subcopula(sub)
    assert report.axioms() == {"S3"}
    assert {x.witness for x in report.violations} == {((0, 2), (2, 4)), ((2, 0), (4, 2))}
    with pytest.raises(AxiomError):
        extend_irreducible(sub)
    v = v.copy()
    v[0, 2] = 0.25
    v[1, 1] = 0.25
    assert "S1" in check_subcopula(DiscreteSubcopula(4, [[0, 2, 4], [0, 2, 4]], v)).axioms()


def test_domain_validation():
    ok = [[0, 0, 0], [0, 0, 1]]
    with pytest.raises(StructureError):
        DiscreteSubcopula(2, [[0, 1], [0, 2]], ok)
    with pytest.raises(StructureError):
        DiscreteSubcopula(2, [[0, 0, 2], [0, 2]], ok)
    with pytest.raises(StructureError):
        DiscreteSubcopula(2, [[0, 3], [0, 2]], ok)
    with pytest.raises(StructureError):
        DiscreteSubcopula(2, [[0, 2], [0, 2]], [0, 0, 1])
    sub = DiscreteSubcopula(2, [[2, 0], [0, 2]], [[0, 0], [0, 1]])
    assert sub.domains == ((0, 2), (0, 2))
    assert sub.value_at((2, 2)) == 1.0

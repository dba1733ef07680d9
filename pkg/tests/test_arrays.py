import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from discopula import (
    RankMatrix,
    StochasticArray,
    array_from_copula,
    check_discrete_copula,
    check_stochastic,
    copula_from_array,
    is_irreducible,
    is_permutation_array,
    min_copula,
    mixture_array,
    permutation_array_from_rank_matrix,
    product_copula,
    random_rank_matrix,
    random_stochastic_array,
    rank_matrix_from_permutation_array,
)
from discopula.exceptions import AxiomError, StructureError


def uniform_array(M, L):
    return StochasticArray(M, L, np.full((M,) * L, 1.0 / M ** (L - 1)))


def identity_array(M, L):
    a = np.zeros((M,) * L)
    for i in range(M):
        a[(i,) * L] = 1.0
    return StochasticArray(M, L, a)


def test_check_stochastic_examples():
    assert check_stochastic(uniform_array(3, 2)).passed
    assert check_stochastic(identity_array(3, 3)).passed
    report = check_stochastic(StochasticArray(2, 2, [[1, 0], [1, 0]]))
    # the lines through i_2 = 1 and i_2 = 2 (summing over i_1) carry 2 and 0
    assert [(v.axiom, v.witness, v.observed) for v in report.violations] == [
        ("A2", (2, 1), 2.0),
        ("A2", (2, 2), 0.0),
    ]


def test_negative_entry_reported():
    a = np.array([[1.5, -0.5], [-0.5, 1.5]])
    report = check_stochastic(StochasticArray(2, 2, a))
    assert {v.witness for v in report.violations if v.axiom == "A1"} == {(1, 2), (2, 1)}


@pytest.mark.parametrize("M", [2, 3, 4])
@pytest.mark.parametrize("L", [2, 3])
def test_uniform_and_identity_arrays(M, L):
    assert np.abs(copula_from_array(uniform_array(M, L)).values - product_copula(M, L).values).max() < 1e-15
    assert copula_from_array(identity_array(M, L)) == min_copula(M, L)


def test_anti_diagonal_copula_by_hand():
    D = copula_from_array(StochasticArray(2, 2, [[0, 1], [1, 0]]))
    assert D[1, 1] == 0.0
    assert D[1, 2] == D[2, 1] == 0.5
    assert D[2, 2] == 1.0
    expected = oracles.prefix_copula(lambda j: 1 if j in {(1, 2), (2, 1)} else 0, 2, 2)
    for idx, val in expected.items():
        assert D[idx] == float(val)


def test_array_from_copula_examples():
    assert np.all(array_from_copula(product_copula(2, 2)).entries == 0.5)
    assert is_permutation_array(array_from_copula(min_copula(3, 2)))
    assert np.allclose(array_from_copula(min_copula(3, 2)).entries, np.eye(3), atol=1e-15)


def test_array_from_copula_rejects_invalid():
    v = product_copula(2, 2).values.copy()
    v[1, 1] = 0.9
    from discopula import GridFunction

    with pytest.raises(AxiomError):
        array_from_copula(GridFunction(2, 2, v))
    with pytest.raises(AxiomError):
        copula_from_array(StochasticArray(2, 2, [[1, 0], [1, 0]]))


@settings(max_examples=50, deadline=None)
@given(M=st.integers(1, 6), L=st.integers(1, 4), k=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
def test_round_trip(M, L, k, seed):
    D = copula_from_array(random_stochastic_array(M, L, k, seed))
    assert check_discrete_copula(D).passed
    A = array_from_copula(D)
    assert check_stochastic(A).passed
    assert np.abs(copula_from_array(A).values - D.values).max() < 1e-12


@pytest.mark.parametrize("M,L,seed", [(3, 2, 0), (2, 3, 1), (3, 3, 2)])
def test_prefix_sums_match_oracle(M, L, seed):
    A = random_stochastic_array(M, L, 3, seed)
    expected = oracles.prefix_copula(lambda j: A.entries[tuple(i - 1 for i in j)], M, L)
    D = copula_from_array(A)
    for idx, val in expected.items():
        assert D[idx] == pytest.approx(float(val), abs=1e-15)


def test_exact_mode_round_trips_rational_grids():
    for M, L in itertools.product(range(1, 8), (1, 2, 3)):
        for D in (product_copula(M, L), min_copula(M, L)):
            back = copula_from_array(array_from_copula(D, exact=True), exact=True)
            assert np.array_equal(back.values, D.values)
    for seed in range(30):
        D = copula_from_array(random_stochastic_array(5, 3, 1, seed))
        assert copula_from_array(array_from_copula(D, exact=True), exact=True) == D


def test_permutation_detection():
    assert is_permutation_array(identity_array(4, 3))
    assert not is_permutation_array(uniform_array(3, 2))
    assert is_permutation_array(random_stochastic_array(5, 3, k=1, seed=3))


def test_rank_matrix_conversions():
    assert rank_matrix_from_permutation_array(identity_array(3, 2)) == RankMatrix([[1, 1], [2, 2], [3, 3]])
    anti = permutation_array_from_rank_matrix(RankMatrix([[1, 2], [2, 1]]))
    assert np.array_equal(anti.entries, [[0, 1], [1, 0]])


def test_rank_matrix_round_trip_random_latin_hypercubes():
    rng = np.random.default_rng(11)
    for _ in range(100):
        M, L = int(rng.integers(1, 9)), int(rng.integers(1, 5))
        R = random_rank_matrix(M, L, rng).canonical()
        assert rank_matrix_from_permutation_array(permutation_array_from_rank_matrix(R)) == R


def test_rank_matrix_validation():
    with pytest.raises(StructureError):
        RankMatrix([[1, 1], [1, 2]])
    with pytest.raises(StructureError):
        RankMatrix([[1.5, 1], [2, 2]])
    with pytest.raises(StructureError):
        rank_matrix_from_permutation_array(uniform_array(2, 2))


def test_mixture_of_identity_and_anti_diagonal_is_uniform():
    A = mixture_array([RankMatrix([[1, 1], [2, 2]]), RankMatrix([[1, 2], [2, 1]])], [0.5, 0.5])
    assert np.array_equal(A.entries, np.full((2, 2), 0.5))
    assert copula_from_array(A) == product_copula(2, 2)


def test_random_stochastic_array_contract():
    A1 = random_stochastic_array(4, 3, k=1, seed=5)
    assert is_permutation_array(A1)
    assert random_stochastic_array(4, 3, k=3, seed=5) == random_stochastic_array(4, 3, k=3, seed=5)
    for seed in range(20):
        assert check_stochastic(random_stochastic_array(5, 3, k=4, seed=seed)).passed
    with pytest.raises(ValueError):
        random_stochastic_array(3, 2, k=0)


def test_irreducible_iff_permutation_array():
    rng = np.random.default_rng(3)
    for _ in range(50):
        M, L = int(rng.integers(2, 6)), int(rng.integers(2, 4))
        D = copula_from_array(permutation_array_from_rank_matrix(random_rank_matrix(M, L, rng)))
        assert is_irreducible(D) and is_permutation_array(array_from_copula(D))
        comps = [random_rank_matrix(M, L, rng) for _ in range(2)]
        if comps[0].canonical() == comps[1].canonical():
            continue
        w = np.sqrt(2) - 1
        D = copula_from_array(mixture_array(comps, [w, 1 - w]))
        assert not is_irreducible(D) and not is_permutation_array(array_from_copula(D))

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from discopula import (
    GridFunction,
    box_volume,
    check_discrete_copula,
    copula_from_array,
    is_irreducible,
    min_copula,
    product_copula,
    random_stochastic_array,
)
from discopula.exceptions import GridSizeError, StructureError


def as_callable(f):
    return lambda idx: float(f.values[idx])


def test_product_copula_values():
    assert product_copula(2, 2)[1, 1] == 0.25
    assert product_copula(3, 3)[3, 3, 3] == 1.0
    assert product_copula(3, 2)[0, 2] == 0.0


def test_min_copula_values():
    assert min_copula(2, 2)[1, 2] == 0.5
    assert min_copula(4, 3)[2, 3, 1] == 0.25


@pytest.mark.parametrize("M,L", [(1, 1), (2, 2), (3, 2), (4, 3), (2, 5)])
def test_standard_copulas_pass_axioms(M, L):
    assert check_discrete_copula(product_copula(M, L)).passed
    assert check_discrete_copula(min_copula(M, L)).passed


def test_irreducibility():
    assert not is_irreducible(product_copula(2, 2))
    for L in (1, 2, 3, 4):
        assert is_irreducible(product_copula(1, L))
    for M, L in itertools.product(range(1, 6), range(1, 4)):
        assert is_irreducible(min_copula(M, L))


def test_groundedness_violation():
    v = product_copula(2, 2).values.copy()
    v[1, 0] = 0.1
    report = check_discrete_copula(GridFunction(2, 2, v))
    assert not report.passed
    assert [(x.axiom, x.witness) for x in report.violations] == [("D1", (1, 0))]


def test_d3_violation_matches_cell_enumeration():
    # f(1/2,1/2)=0.6, f(1/2,1)=f(1,1/2)=0.5, f(1,1)=1, zeros on the axes
    v = np.zeros((3, 3))
    v[1, 1], v[1, 2], v[2, 1], v[2, 2] = 0.6, 0.5, 0.5, 1.0
    f = GridFunction(2, 2, v)
    report = check_discrete_copula(f)
    assert oracles.margin_violations(as_callable(f), 2, 2) == []
    expected = oracles.negative_cells(as_callable(f), 2, 2)
    # frozen from the enumerator: the two off-diagonal cells have volume -0.1
    assert expected == [((0, 1), (1, 2)), ((1, 0), (2, 1))]
    assert report.axioms() == {"D3"}
    assert sorted(x.witness for x in report.violations) == expected
    for x in report.violations:
        assert x.observed == pytest.approx(-0.1)


def test_margin_violation():
    v = min_copula(3, 2).values.copy()
    v[3, 1] = 0.4
    report = check_discrete_copula(GridFunction(3, 2, v))
    assert ("D2", (3, 1)) in [(x.axiom, x.witness) for x in report.violations]


def test_structural_errors():
    with pytest.raises(StructureError):
        GridFunction(2, 2, [0.0] * 8)
    with pytest.raises(StructureError):
        GridFunction(2, 2, [np.nan] * 9)
    with pytest.raises(StructureError):
        check_discrete_copula(np.zeros((3, 3)))


def test_dense_size_guard():
    with pytest.raises(GridSizeError):
        product_copula(9, 9)  # 10**9 entries
    with pytest.raises(GridSizeError):
        min_copula(1, 30)


def test_box_volume_examples():
    assert box_volume(product_copula(2, 2), (0, 0), (2, 2)) == 1.0
    # min copula corners: M(1,2) - M(0,2) - M(1,1) + M(0,1) = 1/2 - 0 - 1/2 + 0
    assert box_volume(min_copula(2, 2), (0, 1), (1, 2)) == 0.0
    f = product_copula(3, 3)
    assert box_volume(f, (1, 2, 0), (1, 2, 0)) == 0.0


def test_box_volume_errors():
    f = product_copula(2, 2)
    with pytest.raises(StructureError):
        box_volume(f, (0, 0), (3, 1))
    with pytest.raises(StructureError):
        box_volume(f, (2, 0), (1, 1))
    with pytest.raises(StructureError):
        box_volume(f, (0,), (1,))


@settings(max_examples=60, deadline=None)
@given(
    M=st.integers(1, 5),
    L=st.integers(1, 3),
    k=st.integers(1, 4),
    seed=st.integers(0, 2**32 - 1),
    data=st.data(),
)
def test_box_volume_matches_difference_operators(M, L, k, seed, data):
    f = copula_from_array(random_stochastic_array(M, L, k, seed))
    lower = tuple(data.draw(st.integers(0, M)) for _ in range(L))
    upper = tuple(data.draw(st.integers(lo, M)) for lo in lower)
    expected = oracles.box_volume(as_callable(f), lower, upper)
    assert box_volume(f, lower, upper) == pytest.approx(expected, abs=1e-12)


def test_random_boxes_nonnegative_and_mass_conservation(rng):
    for trial in range(20):
        M, L = int(rng.integers(1, 6)), int(rng.integers(1, 4))
        f = copula_from_array(random_stochastic_array(M, L, 3, seed=trial))
        assert check_discrete_copula(f).passed
        assert box_volume(f, (0,) * L, (M,) * L) == pytest.approx(1.0, abs=1e-12)
        cells = sum(box_volume(f, c, tuple(i + 1 for i in c)) for c in itertools.product(range(M), repeat=L))
        assert cells == pytest.approx(1.0, abs=1e-9)
        for _ in range(100):
            lo = rng.integers(0, M + 1, size=L)
            hi = np.array([rng.integers(a, M + 1) for a in lo])
            assert box_volume(f, lo, hi) >= -1e-12


def test_unit_cells_vs_general_boxes():
    # unit-cell nonnegativity and nonnegativity of every box agree on random candidates
    rng = np.random.default_rng(7)
    for _ in range(200):
        v = rng.uniform(0, 1, size=(3, 3))
        v[0, :] = v[:, 0] = 0
        v[2, :] = v[:, 2] = [0, 0.5, 1]
        f = GridFunction(2, 2, v)
        cells_ok = "D3" not in check_discrete_copula(f).axioms()
        boxes_ok = all(
            box_volume(f, (a, b), (c, d)) >= -1e-9
            for a, c in itertools.combinations_with_replacement(range(3), 2)
            for b, d in itertools.combinations_with_replacement(range(3), 2)
        )
        assert cells_ok == boxes_ok


def test_immutable_values():
    f = product_copula(2, 2)
    with pytest.raises(ValueError):
        f.values[1, 1] = 0.3


def test_report_serialisation():
    v = product_copula(2, 2).values.copy()
    v[0, 1] = 0.2
    d = check_discrete_copula(GridFunction(2, 2, v)).to_dict()
    assert d["passed"] is False
    assert d["violations"][0]["axiom"] == "D1"
    assert d["violations"][0]["witness"] == [0, 1]

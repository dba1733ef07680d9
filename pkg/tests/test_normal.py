import json

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import oracles
from discopula.normal import ndtr, ndtri


def load_oracle(fixtures_dir):
    d = json.loads((fixtures_dir / "ndtri_oracle.json").read_text())
    return np.array([float.fromhex(x) for x in d["p"]]), np.array([float(x) for x in d["q"]])


def test_frozen_oracle_agreement(fixtures_dir):
    p, q = load_oracle(fixtures_dir)
    assert p.size == 1000
    assert np.max(np.abs(ndtri(p) - q)) < 1e-12


@pytest.mark.parametrize(
    "p,q",
    [(0.5, 0.0), (0.25, -0.6744897501960817), (0.975, 1.959963984540054), (1e-10, -6.361340902404056)],
)
def test_known_values(p, q):
    assert ndtri(p) == pytest.approx(q, abs=1e-14)


def test_edges_and_invalid():
    assert ndtri(0.0) == -np.inf and ndtri(1.0) == np.inf
    assert np.isnan(ndtri(-0.1)) and np.isnan(ndtri(1.5)) and np.isnan(ndtri(np.nan))
    assert ndtri([0.5, 0.5]).shape == (2,)
    assert isinstance(ndtri(0.3), float)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-300, 1 - 1e-16))
def test_against_multiprecision(p):
    assert ndtri(p) == pytest.approx(oracles.ndtri(p, dps=400), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-12, 1 - 1e-12))
def test_symmetry_and_inverse(p):
    assume(1 - (1 - p) == p)
    assert ndtri(p) == pytest.approx(-ndtri(1 - p), abs=1e-12)
    assert ndtr(ndtri(p)) == pytest.approx(p, rel=1e-12)


def test_monotone_on_fine_grid():
    p = np.linspace(1e-6, 1 - 1e-6, 20001)
    assert np.all(np.diff(ndtri(p)) > 0)

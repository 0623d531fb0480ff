import numpy as np
import pytest
from scipy.optimize import linprog

from facered.approx import (DIAG, DIAG_DOM, SCALED_DIAG_DOM, factor_width, generators, parse_family,
                            require_search)
from facered.errors import BadParams, UnsupportedApproximation
from facered.model import smat


def test_diag_generators():
    g = generators(DIAG, 3)
    assert len(g) == 3
    assert np.array_equal(g.generators, np.eye(3))


def test_diagdom_d2_order():
    g = generators(DIAG_DOM, 2)
    assert g.generators.tolist() == [[1, 0], [0, 1], [1, 1], [1, -1]]


@pytest.mark.parametrize("d", range(1, 13))
def test_diagdom_count_and_dominance(d):
    g = generators(DIAG_DOM, d)
    assert len(g) == d * d
    for w in g.generators:
        assert np.any(w)
        M = np.outer(w, w)
        off = np.abs(M).sum(axis=1) - np.abs(np.diag(M))
        assert np.all(np.diag(M) >= off)


def test_sdd_selectors():
    g = generators(SCALED_DIAG_DOM, 3)
    assert len(g) == 3
    assert not g.search_supported
    supports = sorted(tuple(np.flatnonzero(W.any(axis=1))) for W in g.generators)
    assert supports == [(0, 1), (0, 2), (1, 2)]
    with pytest.raises(UnsupportedApproximation):
        g.outer_products()


def test_factor_width_identities():
    assert factor_width(1) == DIAG
    assert factor_width(2) == SCALED_DIAG_DOM
    a = generators(factor_width(2), 4).generators
    b = generators(SCALED_DIAG_DOM, 4).generators
    assert sorted(map(lambda W: W.tobytes(), a)) == sorted(map(lambda W: W.tobytes(), b))
    assert len(generators(factor_width(3), 5)) == 10


def test_outer_products_columns():
    g = generators(DIAG_DOM, 3)
    P = g.outer_products().toarray()
    for k, w in enumerate(g.generators):
        assert np.allclose(smat(P[:, k]), np.outer(w, w))


def test_parse_and_require():
    assert parse_family("d") is DIAG
    assert parse_family("DD") is DIAG_DOM
    assert parse_family("fw2") is SCALED_DIAG_DOM
    with pytest.raises(ValueError):
        parse_family("socp")
    with pytest.raises(UnsupportedApproximation, match="second-order"):
        require_search(parse_family("sdd"))
    with pytest.raises(BadParams):
        generators(DIAG, 0)


def test_diag_cone_inside_diagdom_cone():
    rng = np.random.default_rng(0)
    for d in (2, 3, 4):
        dd = generators(DIAG_DOM, d).outer_products().toarray()
        for _ in range(5):
            target = np.diag(rng.uniform(0, 2, size=d))
            from facered.model import svec
            res = linprog(np.zeros(dd.shape[1]), A_eq=dd, b_eq=svec(target),
                          bounds=[(0, None)] * dd.shape[1], method="highs")
            assert res.status == 0

import numpy as np
import pytest

from facered import fixtures
from facered.errors import BadParams
from facered.model import problem_dims, smat, validate
from facered.reduce import reduce


def all_small():
    return fixtures.worked_examples() + [fixtures.cprank(power=1), fixtures.cprank(power=1, form="primal"),
                                        fixtures.planted(0), fixtures.planted(1, n=8, d=3, extra_rows=2)]


@pytest.mark.parametrize("fx", all_small(), ids=lambda fx: fx.name)
def test_valid_and_feasible(fx):
    p = fx.problem
    assert validate(p) == []
    for y in fx.feasible_y:
        z = p.slack(y)
        for k, blk in enumerate(p.blocks):
            part = z[p.block_slice(k)]
            if blk.kind.value == "psd":
                assert np.linalg.eigvalsh(smat(part)).min() >= -1e-9
            else:
                assert part.min(initial=0.0) >= -1e-9
    for x in fx.feasible_x:
        assert np.abs(p.A @ x - p.b).max() <= 1e-9


def test_deterministic():
    for name in ("motivating", "diag5", "dd4", "recovery3"):
        assert fixtures.build(name).problem.equals(fixtures.build(name).problem)
    assert fixtures.planted(5).problem.equals(fixtures.planted(5).problem)
    assert not fixtures.planted(5).problem.equals(fixtures.planted(6).problem)


def test_bad_params():
    with pytest.raises(BadParams):
        fixtures.planted(0, n=4, d=4)
    with pytest.raises(BadParams):
        fixtures.planted(0, n=4, d=0)
    with pytest.raises(BadParams):
        fixtures.build("nope")
    with pytest.raises(BadParams):
        fixtures.cprank(power=0)
    with pytest.raises(BadParams):
        fixtures.cprank(form="both")


def test_planted_small_reaches_target():
    fx = fixtures.planted(1, n=5, d=2)
    res = reduce(fx.problem, "dual", max_iters=None)
    assert res.report.reduced_face_dims[0] <= 2


def test_cprank_power1_facts():
    fx = fixtures.cprank(power=1)
    assert fx.facts["sizes"] == (9, 10, 9)
    assert fx.facts["r"] == 37
    dims = problem_dims(fx.problem, "dual")
    assert dims.sizes == (9, 10, 9) and dims.r == 37
    primal = fixtures.cprank(power=1, form="primal")
    assert problem_dims(primal.problem, "primal").r == 37


@pytest.mark.large
def test_cprank_power2_construction():
    fx = fixtures.cprank(power=2)
    dims = problem_dims(fx.problem, "dual")
    assert dims.sizes == (81, 82, 81)
    assert dims.r == fx.facts["r"] == 2026


@pytest.mark.large
def test_cprank_power3_construction():
    fx = fixtures.cprank(power=3)
    dims = problem_dims(fx.problem, "dual")
    assert dims.sizes == (729, 730, 729)
    assert dims.r == fx.facts["r"]

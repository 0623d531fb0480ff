import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from facered import fixtures
from facered.certsearch import (build_certificate_lp, find_certificate, replay_certificate,
                                search_certificate, verify_certificate)
from facered.errors import UnsupportedApproximation, UnsupportedCone
from facered.faces import BlockFace, FaceState
from facered.lp import HighsSolver
from facered.model import PSD, ConicProblem, Quad, svec
from helpers import max_rank_oracle, random_certificate_instance


def test_motivating_certificate():
    p = fixtures.motivating().problem
    cert = find_certificate(p, "dual")
    assert np.allclose(cert.blocks[0], np.diag([1.0, 1.0, 0.0]))
    assert verify_certificate(p, FaceState.initial(p), cert) == []
    assert cert.ranks() == [2]


def test_diag5_iterations():
    p = fixtures.diag5().problem
    s0 = FaceState.initial(p)
    first = find_certificate(p, "dual", s0)
    assert np.allclose(first.compressions[0], np.diag([1.0, 1.0, 0.0, 0.0, 0.0]))
    s1 = FaceState((BlockFace.psd(np.eye(5)[:, 2:]),))
    second = find_certificate(p, "dual", s1)
    assert np.allclose(second.compressions[0], np.diag([1.0, 1.0, 0.0]))
    s2 = FaceState((BlockFace.psd(np.eye(5)[:, 4:]),))
    assert find_certificate(p, "dual", s2) is None


def test_explicit_lp_size_on_diag5():
    clp = build_certificate_lp(fixtures.diag5().problem, "dual")
    assert clp.lp.shape == (19, 25)


def test_dd4_certificate_nullspace():
    fx = fixtures.dd4()
    cert = find_certificate(fx.problem, "dual", family="dd")
    G = cert.compressions[0]
    assert np.linalg.matrix_rank(G) == 2
    null = fx.facts["certificate_null"]
    assert np.abs(G @ null).max() <= 1e-9
    assert find_certificate(fx.problem, "dual", family="d") is None


@pytest.mark.parametrize("formulation", ["explicit", "condensed"])
@pytest.mark.parametrize("name", ["motivating", "diag5", "dd4", "recovery3"])
def test_formulations_agree_on_rank(name, formulation):
    fx = fixtures.build(name)
    cert = find_certificate(fx.problem, "dual", family=fx.family, formulation=formulation)
    ref = find_certificate(fx.problem, "dual", family=fx.family)
    assert cert.ranks() == ref.ranks()
    assert verify_certificate(fx.problem, FaceState.initial(fx.problem), cert) == []


def test_identity_objective_without_constraints_has_no_certificate():
    p = ConicProblem(0, [PSD(3)], [], svec(np.eye(3)), [], [], [])
    assert find_certificate(p, "dual") is None


def test_strictly_feasible_has_no_certificate():
    rng = np.random.default_rng(0)
    A = sp.csr_matrix(rng.normal(size=(2, 6)))
    p = ConicProblem.from_matrix([PSD(3)], A, np.zeros(2), svec(np.eye(3)))
    assert find_certificate(p, "dual") is None
    assert find_certificate(p, "dual", family="dd") is None


def test_scale_invariance():
    p = fixtures.diag5().problem
    a = find_certificate(p, "dual")
    b = find_certificate(p.scaled(10.0), "dual")
    assert a.ranks() == b.ranks()
    assert np.allclose(a.compressions[0], b.compressions[0])


def test_primal_side_certificate():
    fx = fixtures.cprank(power=1, form="primal")
    cert = find_certificate(fx.problem, "primal")
    assert cert.yhat is not None
    assert verify_certificate(fx.problem, FaceState.initial(fx.problem), cert) == []
    assert abs(fx.problem.b @ cert.yhat) <= 1e-9


def test_quad_block_rejected():
    p = ConicProblem.from_matrix([Quad(3)], sp.csr_matrix((0, 3)), np.zeros(0), np.array([1.0, 0.0, 0.0]))
    with pytest.raises(UnsupportedCone):
        find_certificate(p, "dual")


def test_sdd_search_rejected():
    with pytest.raises(UnsupportedApproximation):
        find_certificate(fixtures.diag5().problem, "dual", family="sdd")


def test_tampered_certificate_fails_replay():
    p = fixtures.diag5().problem
    faces = FaceState.initial(p)
    cert = find_certificate(p, "dual", faces)
    assert replay_certificate(p, faces, cert) == []
    blocks = (cert.blocks[0] + np.diag([0.0, 0.0, 1.0, 0.0, 0.0]),)
    bad = type(cert)(cert.side, blocks, cert.compressions, cert.lam, cert.t, cert.yhat)
    assert replay_certificate(p, faces, bad)


def test_highs_backend_same_rank():
    p = fixtures.diag5().problem
    a = find_certificate(p, "dual")
    b = find_certificate(p, "dual", solver=HighsSolver())
    assert a.ranks() == b.ranks()


def test_search_stats_recorded():
    _, stats = search_certificate(fixtures.diag5().problem, "dual", formulation="explicit")
    assert (stats.lp_rows, stats.lp_cols) == (19, 25)
    assert stats.lp_status == "optimal"


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.sampled_from(["d", "dd"]), st.integers(0, 2**32 - 1))
def test_max_rank_matches_oracle(n, family, seed):
    rng = np.random.default_rng(seed)
    p = random_certificate_instance(rng, n, family)
    cert = find_certificate(p, "dual", family=family)
    rank = 0 if cert is None else cert.ranks()[0]
    assert rank == max_rank_oracle(p, family)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_certificate_orthogonal_to_data(seed):
    rng = np.random.default_rng(seed)
    p = random_certificate_instance(rng, int(rng.integers(2, 6)), "dd")
    cert = find_certificate(p, "dual", family="dd")
    if cert is None:
        return
    s = cert.vector(p)
    assert abs(p.c @ s) <= 1e-8 * (1 + np.linalg.norm(p.c))
    assert np.abs(p.A @ s).max(initial=0.0) <= 1e-8 * (1 + abs(p.A).max())
    assert np.linalg.eigvalsh(cert.compressions[0]).min() >= -1e-9

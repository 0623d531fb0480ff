import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from facered import fixtures
from facered.errors import BadPackedLength, InvalidProblem, NonSymmetricInput
from facered.model import (ConeBlock, ConeKind, ConicProblem, Free, NonNeg, PSD, Quad, Side,
                           packed_index, packed_length, problem_dims, side_length, smat, svec,
                           validate)


def sym_matrices(max_n=8):
    def build(args):
        n, seed = args
        rng = np.random.default_rng(seed)
        M = rng.normal(size=(n, n))
        return (M + M.T) / 2
    return st.tuples(st.integers(1, max_n), st.integers(0, 2**32 - 1)).map(build)


def test_svec_identity():
    assert np.array_equal(svec(np.eye(2)), [1.0, 0.0, 1.0])
    assert np.array_equal(smat(np.array([1.0, 0.0, 1.0])), np.eye(2))


def test_svec_offdiagonal_norm():
    E = np.array([[0.0, 1.0], [1.0, 0.0]])
    v = svec(E)
    assert v @ v == pytest.approx(2.0) == np.trace(E @ E)


def test_packed_order_is_column_major_upper():
    # (0,0), (0,1), (1,1), (0,2), (1,2), (2,2)
    M = np.array([[1.0, 2.0, 4.0], [2.0, 3.0, 5.0], [4.0, 5.0, 6.0]])
    r2 = np.sqrt(2.0)
    assert np.allclose(svec(M), [1, 2 * r2, 3, 4 * r2, 5 * r2, 6])
    assert [packed_index(i, j) for j in range(3) for i in range(j + 1)] == list(range(6))
    assert packed_index(2, 0) == packed_index(0, 2)


def test_random_trace_inner_product():
    rng = np.random.default_rng(7)
    A = rng.normal(size=(4, 4))
    B = rng.normal(size=(4, 4))
    A, B = A + A.T, B + B.T
    assert abs(svec(A) @ svec(B) - np.trace(A @ B)) <= 1e-12 * np.linalg.norm(A) * np.linalg.norm(B)


@settings(max_examples=60, deadline=None)
@given(sym_matrices(), sym_matrices())
def test_inner_product_preserved(A, B):
    if A.shape != B.shape:
        B = np.eye(A.shape[0])
    bound = 1e-12 * (1 + np.linalg.norm(A) * np.linalg.norm(B))
    assert abs(svec(A) @ svec(B) - np.trace(A @ B)) <= bound


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 50), st.integers(0, 2**32 - 1))
def test_round_trip_up_to_50(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n))
    M = M + M.T
    assert np.abs(smat(svec(M)) - M).max() <= 1e-14 * max(1.0, np.abs(M).max())


def test_nonsymmetric_rejected():
    with pytest.raises(NonSymmetricInput):
        svec(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_bad_packed_length():
    with pytest.raises(BadPackedLength):
        smat(np.zeros(4))
    assert side_length(10) == 4
    assert packed_length(4) == 10


def test_block_lengths():
    assert PSD(3).length == 6
    assert NonNeg(4).length == 4
    assert Free(2).length == 2
    assert Quad(3).length == 3
    p = fixtures.cprank(power=1).problem
    assert p.N == 9 + 55 + 45


def test_validate_ok_on_fixtures():
    for fx in fixtures.worked_examples() + [fixtures.cprank(power=1), fixtures.planted(3)]:
        assert validate(fx.problem) == []


def test_validate_column_out_of_range():
    p = ConicProblem(1, [PSD(2)], [0.0], np.zeros(3), [0], [3], [1.0])
    assert any("column out of range" in msg for msg in validate(p))
    with pytest.raises(InvalidProblem):
        p.check()


def test_validate_short_packed_c():
    p = ConicProblem(0, [PSD(3)], [], np.zeros(5), [], [], [])
    problems = validate(p)
    assert any("c has length 5" in msg for msg in problems)


def test_validate_lists_every_violation():
    p = ConicProblem(1, [PSD(2), ConeBlock(ConeKind.NONNEG, 0)], [0.0, 1.0], np.zeros(2),
                     [3], [0], [np.nan])
    assert len(validate(p)) >= 4


def test_dims_small_pair():
    # 3x3 PSD block with two independent constraints
    A = np.zeros((2, 6))
    A[0, 0] = 1.0
    A[1, 2] = 1.0
    p = ConicProblem.from_matrix([PSD(3)], A, np.zeros(2), np.zeros(6))
    assert problem_dims(p, Side.PRIMAL).r == 4
    assert problem_dims(p, Side.DUAL).r == 2


def test_dims_empty_map():
    p = ConicProblem(0, [PSD(3)], [], np.zeros(6), [], [], [])
    assert problem_dims(p, "primal").r == 6
    assert problem_dims(p, "dual").r == 0


def test_dims_cprank():
    dims = problem_dims(fixtures.cprank(power=1).problem, "dual")
    assert dims.sizes == (9, 10, 9)
    assert dims.r == 37
    assert str(dims) == "(9,10,9); r=37"


def test_dims_ignore_free_equations_on_dual_side():
    # a free block fixes y1 + y2 = 0, so only one direction is left
    A = sp.csr_matrix(np.array([[1.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0]]))
    p = ConicProblem.from_matrix([PSD(2), Free(1)], A, np.zeros(2), np.zeros(4))
    assert problem_dims(p, "dual").r == 1
    assert problem_dims(p, "dual").sizes == (2,)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dims_invariant_under_row_permutation_and_duplicates(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 6)), int(rng.integers(2, 5))
    N = packed_length(n)
    A = rng.normal(size=(m, N)) * (rng.random((m, N)) < 0.5)
    p = ConicProblem.from_matrix([PSD(n)], A, np.zeros(m), np.zeros(N))
    perm = rng.permutation(m)
    q = ConicProblem.from_matrix([PSD(n)], np.vstack([A[perm], A[:1]]), np.zeros(m + 1), np.zeros(N))
    for side in ("primal", "dual"):
        assert problem_dims(p, side) == problem_dims(q, side)


def test_generator_form_signs():
    fx = fixtures.motivating()
    y = np.array([2.0, 3.0, 5.0])
    L = smat(fx.problem.slack(y))
    expected = np.array([[2.0, 0.0, 0.0], [0.0, -2.0, 3.0], [0.0, 3.0, 8.0]])
    assert np.allclose(L, expected)


def test_problem_equality_and_scaling():
    p = fixtures.diag5().problem
    assert p.equals(p)
    assert not p.equals(p.scaled(2.0))
    assert p.scaled(2.0).equals(p.scaled(2.0))


def test_side_parse():
    assert Side.parse("Primal") is Side.PRIMAL
    assert Side.parse(Side.DUAL) is Side.DUAL
    with pytest.raises(ValueError):
        Side.parse("both")

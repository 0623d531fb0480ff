import numpy as np
from hypothesis import given, settings, strategies as st

from facered import fixtures
from facered.faces import BlockFace, FaceState, congruence_map, cross_map
from facered.linalg import orthonormal_complement, orthonormalize
from facered.model import ConeKind, packed_length, smat, svec
from helpers import random_sym


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_maps_are_orthonormal_and_complete(n, seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(0, n + 1))
    U = orthonormalize(rng.normal(size=(n, d))) if d else np.zeros((n, 0))
    V = orthonormal_complement(U)
    face = BlockFace.psd(U, V)
    full = np.hstack([face.inner_map.toarray(), face.outer_map.toarray()])
    assert full.shape == (packed_length(n), packed_length(n))
    assert np.allclose(full.T @ full, np.eye(full.shape[1]), atol=1e-12)


def test_congruence_map_matches_matrix_product():
    rng = np.random.default_rng(0)
    U = orthonormalize(rng.normal(size=(5, 2)))
    W = random_sym(rng, 2)
    assert np.allclose(smat(congruence_map(U) @ svec(W)), U @ W @ U.T)
    X = random_sym(rng, 5)
    assert np.allclose(smat(congruence_map(U).T @ svec(X)), U.T @ X @ U)


def test_cross_map_convention():
    U = np.eye(3)[:, :1]
    V = np.eye(3)[:, 1:]
    Z = np.array([[2.0, -1.0]])
    z = np.sqrt(2.0) * Z.ravel()
    M = smat(cross_map(U, V) @ z)
    assert np.allclose(M, U @ Z @ V.T + V @ Z.T @ U.T)


def test_full_face_compress_is_identity():
    rng = np.random.default_rng(1)
    X = random_sym(rng, 4)
    face = BlockFace.full(ConeKind.PSD, 4)
    assert np.array_equal(face.compress(X), X)
    assert face.dim == 4 and face.inner_length == 10
    nn = BlockFace.full(ConeKind.NONNEG, 3)
    assert np.array_equal(nn.compress(np.array([1.0, 2.0, 3.0])), [1, 2, 3])


def test_nonneg_face_maps():
    face = BlockFace.nonneg(5, [3, 1])
    assert face.support.tolist() == [1, 3]
    assert face.off_support.tolist() == [0, 2, 4]
    v = np.arange(5.0)
    assert np.array_equal(face.inner_map.T @ v, [1, 3])
    assert np.array_equal(face.outer_map.T @ v, [0, 2, 4])


def test_face_state():
    state = FaceState.initial(fixtures.cprank(power=1).problem)
    assert state.dims == (9, 10, 9)
    assert state.total_dim == 28
    assert state.check() == []

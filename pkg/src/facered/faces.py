"""Faces of the cone blocks and the linear maps they induce.

A PSD face is ``{U W U' : W psd}`` for ``U`` with orthonormal columns; ``V``
spans the orthogonal complement.  A nonnegative-orthant face is the set of
vectors supported on an index set.  Elements of the dual of a PSD face are
matrices ``X = [U V] [[W, Z], [Z', R]] [U V]'`` with only ``W`` constrained,
so the maps below split ambient coordinates into an "inner" part (``W``, or the
support coordinates) and an "outer" part (``Z`` and ``R``, or the
off-support coordinates).

All maps act on packed coordinates and have orthonormal columns, so their
transposes are the corresponding compressions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from .linalg import orthonormal_complement
from .model import SQRT2, ConeKind, packed_length, upper_indices


@lru_cache(maxsize=64)
def _vec_to_packed(n):
    """Sparse map from row-major ``vec(M)`` to ``svec((M + M')/2)``."""
    rows, cols = upper_indices(n)
    k = np.arange(rows.size)
    off = rows != cols
    data = np.concatenate([np.where(off, SQRT2 / 2, 1.0), np.full(off.sum(), SQRT2 / 2)])
    r = np.concatenate([k, k[off]])
    c = np.concatenate([rows * n + cols, (cols * n + rows)[off]])
    return sp.csr_matrix((data, (r, c)), shape=(rows.size, n * n))


@lru_cache(maxsize=64)
def _packed_to_vec(n):
    rows, cols = upper_indices(n)
    k = np.arange(rows.size)
    off = rows != cols
    data = np.concatenate([np.where(off, 1 / SQRT2, 1.0), np.full(off.sum(), 1 / SQRT2)])
    r = np.concatenate([rows * n + cols, (cols * n + rows)[off]])
    c = np.concatenate([k, k[off]])
    return sp.csr_matrix((data, (r, c)), shape=(n * n, rows.size))


def _sparse(U):
    U = np.where(np.abs(U) < 1e-15, 0.0, U)
    return sp.csr_matrix(U)


def congruence_map(U):
    """Packed map ``svec(W) -> svec(U W U')``; its transpose compresses by ``U``."""
    n, d = U.shape
    if d == 0:
        return sp.csr_matrix((packed_length(n), 0))
    Us = _sparse(U)
    return (_vec_to_packed(n) @ sp.kron(Us, Us) @ _packed_to_vec(d)).tocsr()


def cross_map(U, V):
    """Packed map ``z -> svec(U Z V' + V Z' U')`` with ``z = sqrt2 vec(Z)``.

    Columns are the orthonormal basis ``(u_a v_b' + v_b u_a')/sqrt 2``;
    ``Z`` is vectorized row-major.
    """
    n, d = U.shape
    if d == 0 or V.shape[1] == 0:
        return sp.csr_matrix((packed_length(n), d * V.shape[1]))
    return (SQRT2 * (_vec_to_packed(n) @ sp.kron(_sparse(U), _sparse(V)))).tocsr()


def selection_map(n, idx):
    idx = np.asarray(idx, dtype=int)
    return sp.csr_matrix((np.ones(idx.size), (idx, np.arange(idx.size))), shape=(n, idx.size))


@dataclass(frozen=True, eq=False)
class BlockFace:
    """Face of one cone block.

    ``U``/``V`` are set for PSD blocks, ``support`` for nonnegative blocks;
    other kinds carry neither and never change.
    """

    kind: ConeKind
    n: int
    U: np.ndarray | None = None
    V: np.ndarray | None = None
    support: np.ndarray | None = None

    @classmethod
    def full(cls, kind, n):
        kind = ConeKind(kind)
        if kind is ConeKind.PSD:
            return cls(kind, n, U=np.eye(n), V=np.zeros((n, 0)))
        if kind is ConeKind.NONNEG:
            return cls(kind, n, support=np.arange(n))
        return cls(kind, n)

    @classmethod
    def psd(cls, U, V=None):
        U = np.asarray(U, dtype=float)
        if V is None:
            V = orthonormal_complement(U)
        return cls(ConeKind.PSD, U.shape[0], U=U, V=np.asarray(V, dtype=float))

    @classmethod
    def nonneg(cls, n, support):
        return cls(ConeKind.NONNEG, n, support=np.asarray(sorted(set(int(i) for i in support)), dtype=int))

    @property
    def reducible(self):
        return self.kind in (ConeKind.PSD, ConeKind.NONNEG)

    @property
    def dim(self):
        """Face dimension ``d`` (matrix side for PSD, support size for NonNeg)."""
        if self.kind is ConeKind.PSD:
            return self.U.shape[1]
        if self.kind is ConeKind.NONNEG:
            return int(self.support.size)
        return self.n

    @property
    def inner_length(self):
        return packed_length(self.dim) if self.kind is ConeKind.PSD else self.dim

    @cached_property
    def off_support(self):
        mask = np.ones(self.n, dtype=bool)
        mask[self.support] = False
        return np.flatnonzero(mask)

    @cached_property
    def inner_map(self):
        """Ambient coordinates of the face's own parametrization."""
        if self.kind is ConeKind.PSD:
            return congruence_map(self.U)
        if self.kind is ConeKind.NONNEG:
            return selection_map(self.n, self.support)
        return sp.identity(self.n, format="csr")

    @cached_property
    def cross(self):
        """PSD only: the ``Z`` part of the dual-face coordinates."""
        return cross_map(self.U, self.V)

    @cached_property
    def complement(self):
        """PSD: the ``R`` part; NonNeg: the off-support coordinates."""
        if self.kind is ConeKind.PSD:
            return congruence_map(self.V)
        return selection_map(self.n, self.off_support)

    @cached_property
    def outer_map(self):
        """All dual-face coordinates left unconstrained by the face."""
        if self.kind is ConeKind.PSD:
            return sp.hstack([self.cross, self.complement], format="csr")
        if self.kind is ConeKind.NONNEG:
            return self.complement
        return sp.csr_matrix((self.n, 0))

    def compress(self, block_value):
        """``U' X U`` (PSD, as a matrix) or the support entries (NonNeg)."""
        if self.kind is ConeKind.PSD:
            return self.U.T @ block_value @ self.U
        if self.kind is ConeKind.NONNEG:
            return np.asarray(block_value)[self.support]
        return np.asarray(block_value)


@dataclass(frozen=True, eq=False)
class FaceState:
    blocks: tuple

    @classmethod
    def initial(cls, problem):
        return cls(tuple(BlockFace.full(blk.kind, blk.size) for blk in problem.blocks))

    @property
    def dims(self):
        return tuple(face.dim for face in self.blocks)

    @property
    def total_dim(self):
        return sum(face.dim for face in self.blocks if face.reducible)

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.blocks)

    def __getitem__(self, k):
        return self.blocks[k]

    def check(self, tol=1e-10):
        """Orthonormality diagnostics for PSD faces; empty list when fine."""
        out = []
        for k, face in enumerate(self.blocks):
            if face.kind is not ConeKind.PSD:
                continue
            U, V = face.U, face.V
            if U.shape[1] + V.shape[1] != face.n:
                out.append(f"block {k}: U and V do not span the block")
            if np.abs(U.T @ U - np.eye(U.shape[1])).max(initial=0) > tol:
                out.append(f"block {k}: U not orthonormal")
            if np.abs(V.T @ V - np.eye(V.shape[1])).max(initial=0) > tol:
                out.append(f"block {k}: V not orthonormal")
            if np.abs(U.T @ V).max(initial=0) > tol:
                out.append(f"block {k}: U and V not orthogonal")
        return out

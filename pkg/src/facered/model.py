"""Conic problem data, cone blocks and the scaled symmetric vectorization.

A single :class:`ConicProblem` record serves two readings of the same data:

* primal (equality form): minimize ``c @ x`` subject to ``A @ x == b``, ``x in K``;
* dual (generator form): maximize ``b @ y`` subject to ``c - A.T @ y in K*``.

``K`` is a product of blocks.  A ``free`` block is an unrestricted primal
variable, so on the dual side its slack must vanish.

PSD blocks are stored with :func:`svec`: the upper triangle in column-major
order (``(0,0), (0,1), (1,1), (0,2), ...``) with off-diagonal entries scaled by
``sqrt(2)``, so Euclidean inner products equal trace inner products.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import BadPackedLength, DimensionMismatch, InvalidProblem, NonSymmetricInput

SQRT2 = math.sqrt(2.0)
SYMMETRY_TOL = 1e-12


class ConeKind(str, enum.Enum):
    FREE = "free"
    NONNEG = "nonneg"
    QUAD = "quad"
    PSD = "psd"


class Side(str, enum.Enum):
    """Which reading of a :class:`ConicProblem` is being reduced."""

    PRIMAL = "primal"
    DUAL = "dual"

    @classmethod
    def parse(cls, value):
        if isinstance(value, Side):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown side {value!r}; expected 'primal' or 'dual'") from None


@dataclass(frozen=True)
class ConeBlock:
    kind: ConeKind
    size: int

    def __post_init__(self):
        object.__setattr__(self, "kind", ConeKind(self.kind))
        object.__setattr__(self, "size", int(self.size))

    @property
    def length(self):
        """Number of vector coordinates used by this block."""
        if self.kind is ConeKind.PSD:
            return packed_length(self.size)
        return self.size

    def __str__(self):
        return f"{self.kind.value}({self.size})"


def Free(n):
    return ConeBlock(ConeKind.FREE, n)


def NonNeg(n):
    return ConeBlock(ConeKind.NONNEG, n)


def Quad(n):
    return ConeBlock(ConeKind.QUAD, n)


def PSD(n):
    return ConeBlock(ConeKind.PSD, n)


# ---------------------------------------------------------------------------
# scaled symmetric vectorization


def packed_length(n):
    return n * (n + 1) // 2


def side_length(length):
    """Inverse of :func:`packed_length`; raises :class:`BadPackedLength`."""
    n = int((math.isqrt(8 * length + 1) - 1) // 2)
    if packed_length(n) != length:
        raise BadPackedLength(f"length {length} is not n(n+1)/2 for any integer n")
    return n


def packed_index(i, j):
    """Position of entry ``(i, j)`` (either order) in the packed vector."""
    if i > j:
        i, j = j, i
    return j * (j + 1) // 2 + i


def upper_indices(n):
    """Row and column index arrays in packed order."""
    cols = np.repeat(np.arange(n), np.arange(1, n + 1))
    starts = np.repeat(np.cumsum(np.arange(n + 1))[:-1], np.arange(1, n + 1))
    rows = np.arange(packed_length(n)) - starts
    return rows, cols


def packed_weights(n):
    """Scaling applied to each packed coordinate (1 on the diagonal, sqrt 2 off it)."""
    rows, cols = upper_indices(n)
    return np.where(rows == cols, 1.0, SQRT2)


def check_symmetric(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonSymmetricInput(f"{name} must be square, got shape {M.shape}")
    scale = np.max(np.abs(M)) if M.size else 0.0
    if M.size and np.max(np.abs(M - M.T)) > SYMMETRY_TOL * max(scale, 1e-300):
        raise NonSymmetricInput(f"{name} is not symmetric")
    return M


def svec(M):
    M = check_symmetric(M)
    rows, cols = upper_indices(M.shape[0])
    return M[rows, cols] * packed_weights(M.shape[0])


def smat(v):
    v = np.asarray(v, dtype=float).ravel()
    n = side_length(v.size)
    rows, cols = upper_indices(n)
    vals = v / packed_weights(n)
    M = np.zeros((n, n))
    M[rows, cols] = vals
    M[cols, rows] = vals
    return M


# ---------------------------------------------------------------------------
# problem record


@dataclass(frozen=True, eq=False)
class ConicProblem:
    """Sparse conic program.

    ``A`` is kept as coordinate triplets so that :func:`validate` can report
    malformed data instead of failing on construction.  Duplicate triplets are
    summed when the matrix is materialized.
    """

    m: int
    blocks: tuple
    b: np.ndarray
    c: np.ndarray
    A_rows: np.ndarray
    A_cols: np.ndarray
    A_vals: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "blocks", tuple(self.blocks))
        for name, dtype in (("b", float), ("c", float), ("A_rows", np.int64),
                            ("A_cols", np.int64), ("A_vals", float)):
            arr = np.array(getattr(self, name), dtype=dtype).ravel()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_matrix(cls, blocks, A, b, c, meta=None):
        """Build from a dense or sparse ``m x N`` matrix."""
        A = sp.coo_matrix(A)
        A.sum_duplicates()
        keep = A.data != 0
        return cls(m=A.shape[0], blocks=blocks, b=b, c=c, A_rows=A.row[keep],
                   A_cols=A.col[keep], A_vals=A.data[keep], meta=dict(meta or {}))

    @classmethod
    def from_generator_form(cls, blocks, C_blocks, A_blocks, b, meta=None):
        """Build from per-block data of the generator form ``C - sum_j y_j A_j``.

        ``C_blocks[k]`` and ``A_blocks[j][k]`` are matrices for PSD blocks and
        vectors otherwise; ``None`` stands for zero.
        """
        blocks = tuple(blocks)
        c = np.concatenate([_pack_block(blk, C) for blk, C in zip(blocks, C_blocks)]) \
            if blocks else np.zeros(0)
        rows = [np.concatenate([_pack_block(blk, Aj[k]) for k, blk in enumerate(blocks)])
                for Aj in A_blocks]
        A = np.vstack(rows) if rows else np.zeros((0, c.size))
        return cls.from_matrix(blocks, sp.csr_matrix(A), b, c, meta=meta)

    # -- derived quantities ----------------------------------------------

    @property
    def N(self):
        return int(sum(blk.length for blk in self.blocks))

    @cached_property
    def offsets(self):
        return np.concatenate([[0], np.cumsum([blk.length for blk in self.blocks])]).astype(int)

    def block_slice(self, k):
        return slice(int(self.offsets[k]), int(self.offsets[k + 1]))

    @cached_property
    def A(self):
        """The constraint matrix as CSR (requires valid data)."""
        return sp.csr_matrix((self.A_vals, (self.A_rows, self.A_cols)), shape=(self.m, self.N))

    @cached_property
    def AT(self):
        return self.A.T.tocsr()

    def block_matrix(self, vec, k):
        """Unpack the ``k``-th block of a length-N vector (matrix for PSD)."""
        part = np.asarray(vec, dtype=float)[self.block_slice(k)]
        return smat(part) if self.blocks[k].kind is ConeKind.PSD else part.copy()

    def slack(self, y):
        """``c - A.T y`` for the generator form."""
        return self.c - self.AT @ np.asarray(y, dtype=float)

    def has_kind(self, kind):
        return any(blk.kind is kind for blk in self.blocks)

    def check(self):
        problems = validate(self)
        if problems:
            raise InvalidProblem(problems)
        return self

    def scaled(self, factor):
        return ConicProblem(self.m, self.blocks, self.b * factor, self.c * factor, self.A_rows,
                            self.A_cols, self.A_vals * factor, dict(self.meta))

    def with_b(self, b):
        return ConicProblem(self.m, self.blocks, b, self.c, self.A_rows, self.A_cols,
                            self.A_vals, dict(self.meta))

    def with_c(self, c):
        return ConicProblem(self.m, self.blocks, self.b, c, self.A_rows, self.A_cols,
                            self.A_vals, dict(self.meta))

    def equals(self, other, tol=0.0):
        """Data equality (duplicate triplets summed, explicit zeros ignored)."""
        if (self.m, self.blocks) != (other.m, other.blocks):
            return False
        if self.b.shape != other.b.shape or self.c.shape != other.c.shape:
            return False
        diff = abs(self.A - other.A)
        worst = diff.max() if diff.nnz else 0.0
        return (worst <= tol and np.all(np.abs(self.b - other.b) <= tol)
                and np.all(np.abs(self.c - other.c) <= tol))

    def __repr__(self):
        kinds = ", ".join(str(blk) for blk in self.blocks)
        return f"ConicProblem(m={self.m}, N={self.N}, blocks=[{kinds}], nnz={self.A_vals.size})"


def _pack_block(blk, data):
    if data is None:
        return np.zeros(blk.length)
    if blk.kind is ConeKind.PSD:
        data = np.asarray(data, dtype=float)
        if data.shape != (blk.size, blk.size):
            raise DimensionMismatch(f"expected {blk.size}x{blk.size} matrix, got {data.shape}")
        return svec(data)
    data = np.asarray(data, dtype=float).ravel()
    if data.size != blk.size:
        raise DimensionMismatch(f"expected vector of length {blk.size}, got {data.size}")
    return data


def validate(p):
    """Return a list of human-readable problems; an empty list means valid."""
    out = []
    if p.m < 0:
        out.append(f"m must be nonnegative, got {p.m}")
    for k, blk in enumerate(p.blocks):
        if not isinstance(blk, ConeBlock):
            out.append(f"block {k}: not a ConeBlock")
        elif blk.size < 1:
            out.append(f"block {k}: size must be at least 1, got {blk.size}")
    expected = int(sum(max(blk.length, 0) for blk in p.blocks if isinstance(blk, ConeBlock)))
    if p.c.size != expected:
        out.append(f"c has length {p.c.size} but the blocks need {expected} packed entries")
    if p.b.size != p.m:
        out.append(f"b has length {p.b.size} but m = {p.m}")
    if not (p.A_rows.size == p.A_cols.size == p.A_vals.size):
        out.append("A triplet arrays have different lengths")
    else:
        if p.A_rows.size and (p.A_rows.min() < 0 or p.A_rows.max() >= p.m):
            out.append("A: row out of range")
        if p.A_cols.size and (p.A_cols.min() < 0 or p.A_cols.max() >= expected):
            out.append("A: column out of range")
    for name, arr in (("b", p.b), ("c", p.c), ("A", p.A_vals)):
        if arr.size and not np.all(np.isfinite(arr)):
            out.append(f"{name} contains non-finite values")
    return out


# ---------------------------------------------------------------------------
# dimension accounting


@dataclass(frozen=True)
class Dims:
    """Cone sizes (free blocks omitted) and affine-subspace dimension."""

    sizes: tuple
    r: int

    def __str__(self):
        return f"({','.join(str(n) for n in self.sizes)}); r={self.r}"


def problem_dims(p, side):
    """Block sizes and the dimension ``r`` of the affine set being reduced.

    Dual side: ``r = rank(A) - rank(A restricted to free columns)``, the
    dimension of the ``y``-space after the zero-slack equations of free blocks
    are imposed; this is ``rank(A)`` when there are no free blocks.  Primal
    side: ``r = N - rank(A)``.
    """
    from .linalg import sparse_rank

    side = Side.parse(side)
    p.check()
    sizes = tuple(blk.size for blk in p.blocks if blk.kind is not ConeKind.FREE)
    rank = sparse_rank(p.A)
    if side is Side.PRIMAL:
        return Dims(sizes, p.N - rank)
    free_cols = np.concatenate([np.arange(p.offsets[k], p.offsets[k + 1])
                                for k, blk in enumerate(p.blocks) if blk.kind is ConeKind.FREE]
                               or [np.zeros(0, dtype=int)])
    if free_cols.size == 0:
        return Dims(sizes, rank)
    return Dims(sizes, rank - sparse_rank(p.A[:, free_cols]))

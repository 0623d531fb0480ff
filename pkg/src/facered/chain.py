"""Face chains and the coordinate layout of reduced problems.

A reduced problem keeps every original block in order, replacing PSD and
nonnegative blocks by their faces (blocks whose face is empty are dropped).
When the generator form is reduced, one extra free block is appended that
holds the equations the face imposes on the slack:

* for a PSD block, the ``U'L(y)V`` entries (scaled by ``sqrt 2``, row-major)
  followed by ``svec(V'L(y)V)``, unless the cross equations were dropped
  after Condition 2 held;
* for a nonnegative block, the off-support slack entries.

The multipliers of that block are the ``Z``/``R`` parts (or off-support
entries) of the lifted equality-form point, which is what makes recovery
possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch
from .faces import FaceState
from .model import ConeBlock, ConeKind, Free, Side
from .settings import DEFAULT_TOLERANCES, Tolerances


@dataclass(frozen=True, eq=False)
class ChainStep:
    faces: FaceState
    certificate: object


@dataclass(frozen=True)
class Segment:
    block: int
    part: str        # "inner", "cross", "complement" or "off"
    start: int
    length: int


@dataclass(frozen=True, eq=False)
class ReducedLayout:
    blocks: tuple            # ConeBlocks of the reduced problem
    source: tuple            # original block index of each reduced block (None = equations)
    segments: tuple          # Segments in reduced-vector coordinates

    @cached_property
    def length(self):
        return int(sum(blk.length for blk in self.blocks))


@dataclass(frozen=True, eq=False)
class FaceChain:
    problem: object
    side: Side
    family: object
    steps: tuple
    final: FaceState
    condition2_applied: bool = False
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES)

    def __len__(self):
        return len(self.steps)

    @cached_property
    def layout(self):
        return build_layout(self.problem, self.final, self.side, self.condition2_applied)

    @cached_property
    def operator(self):
        """Sparse ``N x N_reduced`` map from reduced to original coordinates."""
        return layout_operator(self.problem, self.final, self.layout)


def build_layout(problem, final, side, drop_cross=False):
    side = Side.parse(side)
    blocks, source, segments = [], [], []
    pos = 0
    for k, face in enumerate(final):
        d = face.dim
        if face.kind in (ConeKind.PSD, ConeKind.NONNEG):
            if d == 0:
                continue
            blk = ConeBlock(face.kind, d)
        else:
            blk = problem.blocks[k]
        blocks.append(blk)
        source.append(k)
        segments.append(Segment(k, "inner", pos, blk.length))
        pos += blk.length
    if side is Side.DUAL:
        eq_start = pos
        for k, face in enumerate(final):
            if face.kind is ConeKind.PSD:
                if not drop_cross and face.cross.shape[1]:
                    segments.append(Segment(k, "cross", pos, face.cross.shape[1]))
                    pos += face.cross.shape[1]
                if face.complement.shape[1]:
                    segments.append(Segment(k, "complement", pos, face.complement.shape[1]))
                    pos += face.complement.shape[1]
            elif face.kind is ConeKind.NONNEG and face.off_support.size:
                segments.append(Segment(k, "off", pos, face.off_support.size))
                pos += face.off_support.size
        if pos > eq_start:
            blocks.append(Free(pos - eq_start))
            source.append(None)
    return ReducedLayout(tuple(blocks), tuple(source), tuple(segments))


def segment_map(face, part):
    """Sparse map from a segment's coordinates to ambient block coordinates."""
    if part == "inner":
        return face.inner_map
    if part == "cross":
        return face.cross
    return face.complement


def layout_operator(problem, final, layout):
    """Sparse ``N x N_reduced`` matrix taking reduced coordinates to ambient ones."""
    cols = []
    for seg in layout.segments:
        face = final[seg.block]
        local = segment_map(face, seg.part).tocoo()
        start = problem.offsets[seg.block]
        cols.append(sp.coo_matrix((local.data, (local.row + start, local.col + seg.start)),
                                  shape=(problem.N, layout.length)))
    if not cols:
        return sp.csr_matrix((problem.N, layout.length))
    total = cols[0]
    for extra in cols[1:]:
        total = total + extra
    return total.tocsr()


def to_ambient(chain, reduced_vec):
    """Map a reduced-coordinate vector into the original coordinates."""
    reduced_vec = np.asarray(reduced_vec, dtype=float).ravel()
    if reduced_vec.size != chain.layout.length:
        raise DimensionMismatch(f"reduced point has length {reduced_vec.size}, "
                                f"expected {chain.layout.length}")
    return chain.operator @ reduced_vec


def to_reduced(chain, ambient_vec):
    """Adjoint of :func:`to_ambient` (exact inverse on the image, as the maps are orthonormal)."""
    ambient_vec = np.asarray(ambient_vec, dtype=float).ravel()
    if ambient_vec.size != chain.problem.N:
        raise DimensionMismatch(f"point has length {ambient_vec.size}, expected {chain.problem.N}")
    return chain.operator.T @ ambient_vec

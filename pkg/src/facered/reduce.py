"""Partial facial reduction driver.

``reduce`` alternates certificate search and face updates until no
certificate is found, then rewrites the problem over the final faces.  The
reduction is exact: the reduced problem has the same optimal value and its
solutions lift back to the original one (see :mod:`facered.recover`).
Infeasible inputs are reduced like any other; detecting infeasibility is not
attempted.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .approx import DIAG, parse_family, require_search
from .certsearch import search_certificate
from .chain import ChainStep, FaceChain, build_layout, layout_operator
from .errors import UnsupportedCone
from .faces import BlockFace, FaceState
from .linalg import affine_implies, is_coordinate_frame, nullspace_basis, orthonormal_complement, orthonormalize
from .model import ConeKind, ConicProblem, Dims, Side, problem_dims
from .settings import DEFAULT_TOLERANCES

NOTES = (
    "infeasibility is not detected; an infeasible input yields an equivalent infeasible reduction",
    "r is a numerical rank with relative cutoff 1e-10; on the dual side the equations "
    "imposed by free blocks are subtracted",
)


@dataclass
class IterationRecord:
    index: int
    certificate_found: bool
    ranks: list
    face_dims: list
    lp_time: float
    search_time: float
    lp_rows: int = 0
    lp_cols: int = 0

    def as_dict(self):
        return {"index": self.index, "certificate_found": self.certificate_found,
                "ranks": list(self.ranks), "face_dims": list(self.face_dims),
                "lp_time": self.lp_time, "search_time": self.search_time,
                "lp_size": [self.lp_rows, self.lp_cols]}


@dataclass
class ReductionReport:
    side: Side
    approximation: str
    original: Dims
    reduced: Dims
    original_face_dims: list
    reduced_face_dims: list
    iterations: list = field(default_factory=list)
    final_search: IterationRecord | None = None
    stop_reason: str = ""
    total_lp_time: float = 0.0
    total_time: float = 0.0
    tolerances: dict = field(default_factory=dict)
    condition2_applied: bool = False
    notes: list = field(default_factory=list)

    def summary(self):
        before = ",".join(str(n) for n in self.original_face_dims)
        after = ",".join(str(n) for n in self.reduced_face_dims)
        return (f"({before});{self.original.r} -> ({after});{self.reduced.r}  "
                f"[{len(self.iterations)} iteration(s), LP {self.total_lp_time:.3f}s]")


@dataclass(frozen=True, eq=False)
class ReductionResult:
    reduced: ConicProblem
    chain: FaceChain
    report: ReductionReport

    @property
    def condition2_applied(self):
        return self.chain.condition2_applied


def face_update(state, cert, tol=DEFAULT_TOLERANCES):
    """Intersect every block's face with the certificate's orthogonal complement."""
    new = []
    for k, face in enumerate(state):
        G = cert.compressions[k] if k < len(cert.compressions) else None
        if not face.reducible or G is None or face.dim == 0:
            new.append(face)
            continue
        if face.kind is ConeKind.PSD:
            B = nullspace_basis(G, tol.null_rel)
            if B.shape[1] == face.dim:
                new.append(face)
                continue
            U = face.U @ B
            if not is_coordinate_frame(U):
                U = orthonormalize(U)
            new.append(BlockFace.psd(U, orthonormal_complement(U)))
        else:
            lam = np.asarray(G, dtype=float)
            cut = tol.support * max(1.0, lam.max(initial=0.0))
            new.append(BlockFace.nonneg(face.n, face.support[lam <= cut]))
    return FaceState(tuple(new))


def reduced_problem(problem, final, side, drop_cross=False):
    """The problem restricted to the faces in ``final`` (see :mod:`facered.chain`)."""
    layout = build_layout(problem, final, side, drop_cross)
    op = layout_operator(problem, final, layout)
    A = (problem.A @ op).tocsr()
    A.data[np.abs(A.data) < 1e-15 * (1.0 + np.abs(A.data).max(initial=0.0))] = 0.0
    c = op.T @ problem.c
    c[np.abs(c) < 1e-15 * (1.0 + np.abs(c).max(initial=0.0))] = 0.0
    return ConicProblem.from_matrix(layout.blocks, A, problem.b.copy(), c,
                                    meta={"reduced_from": problem.meta.get("name", "")})


def equation_rows(problem, final, parts):
    """Rows ``(M, rhs)`` of the slack equations ``map' (c - A'y) = 0`` for the given segment parts."""
    rows, rhs = [], []
    AT = problem.AT.tocsr()
    for k, face in enumerate(final):
        sl = problem.block_slice(k)
        for part in parts:
            if part == "free" and face.kind is ConeKind.FREE:
                rows.append(AT[sl])
                rhs.append(problem.c[sl])
            elif part == "cross" and face.kind is ConeKind.PSD and face.cross.shape[1]:
                rows.append((face.cross.T @ AT[sl]).tocsr())
                rhs.append(face.cross.T @ problem.c[sl])
            elif part == "complement" and face.reducible and face.complement.shape[1]:
                rows.append((face.complement.T @ AT[sl]).tocsr())
                rhs.append(face.complement.T @ problem.c[sl])
    if not rows:
        return sp.csr_matrix((0, problem.m)), np.zeros(0)
    return sp.vstack(rows, format="csr"), np.concatenate(rhs)


def cross_equations_implied(problem, final, tol_rel=1e-7):
    """Condition 2 for all PSD blocks at once: do the remaining slack equations imply the cross ones?"""
    keep, keep_rhs = equation_rows(problem, final, ("free", "complement"))
    test, test_rhs = equation_rows(problem, final, ("cross",))
    return affine_implies(keep, keep_rhs, test, test_rhs, tol_rel)


def reduce(problem, side, family=DIAG, max_iters=10, tol=DEFAULT_TOLERANCES,
           drop_equations_via_condition2=False, solver=None, formulation="condensed"):
    """Run partial facial reduction on one side of ``problem``.

    ``max_iters=None`` runs until no certificate exists; this always stops
    since every certificate lowers the total face dimension.
    """
    side = Side.parse(side)
    family = parse_family(family)
    require_search(family)
    problem.check()
    for k, blk in enumerate(problem.blocks):
        if blk.kind is ConeKind.QUAD:
            raise UnsupportedCone(f"block {k} is a second-order cone; it cannot be reduced")
    start = time.perf_counter()
    state = FaceState.initial(problem)
    original_dims = problem_dims(problem, side)
    steps, records = [], []
    total_lp = 0.0
    stop = "no-certificate"
    final_search = None
    while True:
        if state.total_dim == 0:
            stop = "empty-face"
            break
        if max_iters is not None and len(steps) >= max_iters:
            stop = "max-iters"
            break
        cert, stats = search_certificate(problem, side, state, family, tol, solver, formulation)
        total_lp += stats.lp_time
        if cert is None:
            final_search = IterationRecord(len(steps) + 1, False, [], list(_reported_dims(state)),
                                           stats.lp_time, stats.search_time,
                                           stats.lp_rows, stats.lp_cols)
            break
        steps.append(ChainStep(state, cert))
        state = face_update(state, cert, tol)
        records.append(IterationRecord(len(steps), True, _reported_ranks(cert, problem, tol),
                                       list(_reported_dims(state)), stats.lp_time,
                                       stats.search_time, stats.lp_rows, stats.lp_cols))
    drop = False
    if drop_equations_via_condition2 and side is Side.DUAL:
        drop, _ = cross_equations_implied(problem, state)
    reduced = reduced_problem(problem, state, side, drop)
    chain = FaceChain(problem, side, family, tuple(steps), state, drop, tol)
    report = ReductionReport(
        side=side, approximation=str(family), original=original_dims,
        reduced=problem_dims(reduced, side),
        original_face_dims=list(_reported_dims(FaceState.initial(problem))),
        reduced_face_dims=list(_reported_dims(state)), iterations=records,
        final_search=final_search, stop_reason=stop, total_lp_time=total_lp,
        total_time=time.perf_counter() - start, tolerances=tol.as_dict(),
        condition2_applied=drop, notes=list(NOTES))
    return ReductionResult(reduced, chain, report)


def _reported_dims(state):
    return [face.dim for face in state if face.kind is not ConeKind.FREE]


def _reported_ranks(cert, problem, tol):
    ranks = cert.ranks(tol.null_rel)
    return [r for r, blk in zip(ranks, problem.blocks) if blk.kind is not ConeKind.FREE]

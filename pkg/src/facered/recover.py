"""Post-processing of reduced solutions.

A reduction keeps one side's solutions intact: they lift straight back
through the face maps.  The other side (the *counterpart*) is solved over
the dual of the final face, which is larger than the original cone, so its
solution has to be walked back along the certificates.  Step ``i`` adds a
multiple of the certificate ``S_i``; since ``S_i`` is orthogonal to the
data, this changes neither feasibility of the equations nor the objective.

Besides the walk-back, this module checks the single-step recovery
conditions and assembles extended-dual certificates for generator-form
(dual-side) reductions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import to_ambient
from .errors import AssemblyFailed, BadParams, DimensionMismatch, NotPSDDirection
from .linalg import LineSearchResult, affine_implies, min_eig, min_psd_shift, nullspace_basis
from .model import ConeKind, Side, smat, svec

SUCCESS = "Success"
FAIL = "Fail"

FEASIBILITY_TOL = 1e-6
OBJECTIVE_TOL = 1e-7


@dataclass
class RecoveryOutcome:
    """Result of :func:`recover_counterpart`.

    For dual-side chains ``x`` is the recovered equality-form point; for
    primal-side chains ``y`` and its slack ``z = c - A'y`` are set.
    ``alphas[i]`` is the multiple of certificate ``i`` that was added (steps
    that were never reached are ``None``).
    """

    status: str
    side: Side
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    alphas: list = field(default_factory=list)
    failed_step: int | None = None
    failed_block: int | None = None
    witness: str | None = None
    detail: str = ""
    objective: float | None = None
    reduced_objective: float | None = None
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return self.status == SUCCESS

    def blocks(self, problem):
        """The recovered cone point split per block (matrices for PSD blocks)."""
        point = self.x if self.side is Side.DUAL else self.z
        if point is None:
            return []
        return [smat(point[problem.block_slice(k)]) if blk.kind is ConeKind.PSD
                else point[problem.block_slice(k)].copy()
                for k, blk in enumerate(problem.blocks)]


def lift_solution(chain, reduced_point):
    """Map a point of the reduced equality form back to the original coordinates.

    PSD parts become ``U W U'``, nonnegative parts are scattered onto the
    support and, for dual-side chains, the equation multipliers fill the
    off-face entries.  Objective and equality residuals are preserved
    because ``<A, U W U'> = <U'AU, W>``.  (A reduced generator-form solution
    ``y`` needs no lifting: ``b`` and ``y`` are shared with the original.)
    """
    return to_ambient(chain, reduced_point)


def _cone_violations(problem, point, tol=FEASIBILITY_TOL, zero_free=False):
    out = []
    for k, blk in enumerate(problem.blocks):
        v = point[problem.block_slice(k)]
        scale = 1.0 + float(np.abs(v).max(initial=0.0))
        if blk.kind is ConeKind.PSD:
            lo = min_eig(smat(v))
            if lo < -tol * scale:
                out.append(f"block {k}: minimum eigenvalue {lo:.3e}")
        elif blk.kind is ConeKind.NONNEG:
            lo = float(v.min(initial=0.0))
            if lo < -tol * scale:
                out.append(f"block {k}: entry {lo:.3e} is negative")
        elif blk.kind is ConeKind.FREE and zero_free:
            big = float(np.abs(v).max(initial=0.0))
            if big > tol * (1.0 + float(np.abs(problem.c).max(initial=0.0))):
                out.append(f"block {k}: free-block slack {big:.3e} is not zero")
    return out


def _block_shift(face, x_block, s_block, tol):
    """Smallest ``alpha >= 0`` putting ``x + alpha s`` in the dual of ``face`` (one block)."""
    if face.kind is ConeKind.PSD:
        if face.dim == 0:
            return min_psd_shift(np.zeros((0, 0)), np.zeros((0, 0)))
        U = face.U
        X = smat(x_block)
        S = smat(s_block)
        A = U.T @ X @ U
        M = U.T @ S @ U
        try:
            return min_psd_shift((A + A.T) / 2, (M + M.T) / 2, tol.null_rel)
        except NotPSDDirection as exc:
            return LineSearchResult("infeasible", witness="nullspace-negative", detail=str(exc))
    sup = face.support
    xs = x_block[sup]
    ss = s_block[sup]
    scale = 1.0 + float(np.abs(xs).max(initial=0.0))
    need = xs < -tol.null_rel * scale
    if not np.any(need):
        return LineSearchResult("found", 0.0)
    stuck = need & (ss <= tol.null_rel * max(1.0, float(ss.max(initial=0.0))))
    if np.any(stuck):
        k = int(sup[np.argmax(stuck)])
        return LineSearchResult("infeasible", witness="nullspace-negative",
                                detail=f"coordinate {k} is negative and the certificate vanishes there")
    return LineSearchResult("found", float(np.max(-xs[need] / ss[need])))


def recover_counterpart(chain, counterpart_point):
    """Walk a counterpart solution back along the chain's certificates.

    Dual-side chains: ``counterpart_point`` is a solution of the reduced
    equality form (reduced coordinates); it is lifted and then repaired by
    ``x <- x + alpha_i S_i`` for ``i = N-1, ..., 0``.  Primal-side chains:
    it is a solution ``y`` of the reduced generator form and the update is
    ``y <- y - alpha_i yhat_i`` (the slack moves by ``+alpha_i S_i``).

    Each ``alpha_i`` is the largest of the per-block minimal shifts.  The
    final point is checked against the original cone and equations.
    """
    problem = chain.problem
    tol = chain.tolerances
    steps = chain.steps
    alphas = [None] * len(steps)
    point = np.asarray(counterpart_point, dtype=float).ravel()
    if chain.side is Side.DUAL:
        x = lift_solution(chain, point)
        reduced_obj = float(problem.c @ x)
        current = x
    else:
        if point.size != problem.m:
            raise DimensionMismatch(f"y has length {point.size}, expected {problem.m}")
        y = point.copy()
        current = problem.slack(y)
        reduced_obj = float(problem.b @ y)

    def outcome(status, **kw):
        if chain.side is Side.DUAL:
            return RecoveryOutcome(status, chain.side, x=current, alphas=alphas,
                                   reduced_objective=reduced_obj, **kw)
        return RecoveryOutcome(status, chain.side, y=y, z=current, alphas=alphas,
                               reduced_objective=reduced_obj, **kw)

    for i in range(len(steps) - 1, -1, -1):
        step = steps[i]
        S = step.certificate.vector(problem)
        alpha = 0.0
        for k, face in enumerate(step.faces):
            if not face.reducible or face.dim == 0:
                continue
            sl = problem.block_slice(k)
            res = _block_shift(face, current[sl], S[sl], tol)
            if not res.found:
                return outcome(FAIL, failed_step=i, failed_block=k, witness=res.witness,
                               detail=res.detail)
            alpha = max(alpha, res.alpha)
        alphas[i] = alpha
        if alpha:
            current = current + alpha * S
            if chain.side is Side.PRIMAL:
                y = y - alpha * step.certificate.yhat

    if chain.side is Side.DUAL:
        violations = _cone_violations(problem, current)
        resid = problem.A @ current - problem.b
        scale = 1.0 + float(np.abs(problem.b).max(initial=0.0)) + float(np.abs(current).max(initial=0.0))
        if np.abs(resid).max(initial=0.0) > FEASIBILITY_TOL * scale:
            violations.append(f"equality residual {np.abs(resid).max():.3e}")
        objective = float(problem.c @ current)
    else:
        violations = _cone_violations(problem, current, zero_free=True)
        objective = float(problem.b @ y)
    scale = 1.0 + abs(reduced_obj)
    if abs(objective - reduced_obj) > OBJECTIVE_TOL * scale * 10:
        violations.append(f"objective moved from {reduced_obj:.9g} to {objective:.9g}")
    if violations:
        return outcome(FAIL, failed_step=0, witness="final-check", detail="; ".join(violations),
                       objective=objective, violations=violations)
    return outcome(SUCCESS, objective=objective)


# ---------------------------------------------------------------------------
# single-step conditions


def check_condition1(X, U, V, tol_rel=1e-7):
    """Can ``X`` (in the dual of the face ``U S U'``) be pushed into the cone?

    True iff ``null(U'XU)`` lies inside ``null((U'XV)')``.
    """
    X = np.asarray(X, dtype=float)
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    W = U.T @ X @ U
    Z = U.T @ X @ V
    if Z.size == 0 or W.shape[0] == 0:
        return True
    scale = max(1.0, float(np.abs(X).max(initial=0.0)))
    P = nullspace_basis((W + W.T) / 2, 1e-8)
    if P.shape[1] == 0:
        return True
    return float(np.linalg.norm(Z.T @ P)) <= tol_rel * scale


def condition2_report(problem, U, V, block=None, tol_rel=1e-7):
    """``(holds, reason)`` for Condition 2 on one PSD block of a generator-form problem.

    Holds when every solution of ``V'L(y)V = 0`` also solves ``V'L(y)U = 0``.
    An unsolvable ``V'L(y)V = 0`` system is reported as not holding.
    """
    if block is None:
        psd = [k for k, blk in enumerate(problem.blocks) if blk.kind is ConeKind.PSD]
        if len(psd) != 1:
            raise BadParams("problem has several PSD blocks; pass block=")
        block = psd[0]
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    sl = problem.block_slice(block)
    Ablk = problem.A[:, sl].toarray()
    cblk = smat(problem.c[sl])
    mats = [smat(row) for row in Ablk]

    def system(L, R):
        rows = np.array([(L.T @ Aj @ R).ravel() for Aj in mats]).T if mats else np.zeros((L.shape[1] * R.shape[1], 0))
        rhs = (L.T @ cblk @ R).ravel()
        return rows.reshape(-1, problem.m), rhs

    keep, keep_rhs = system(V, V)
    test, test_rhs = system(V, U)
    return affine_implies(keep, keep_rhs, test, test_rhs, tol_rel)


def check_condition2(problem, U, V, block=None, tol_rel=1e-7):
    """Does ``V'L(y)V = 0`` imply ``V'L(y)U = 0``?  (See :func:`condition2_report`.)"""
    return condition2_report(problem, U, V, block, tol_rel)[0]


# ---------------------------------------------------------------------------
# extended dual


@dataclass
class ExtendedDualCertificate:
    """Feasible point of the extended dual built from a chain and a reduced solution.

    Per block ``k`` (PSD blocks as matrices, nonnegative blocks as vectors):
    ``X = Xbar + W_N + W_N'`` and ``S_i = Sbar_i + W_i + W_i'`` with
    ``Sbar_i, Xbar >= 0``; ``alphas[i]`` makes
    ``[[sum_{j<=i} Sbar_j, W_{i+1}], [W_{i+1}', alpha_i I]]`` semidefinite.
    Index ``i`` runs over the padded chain (leading zero certificates).
    """

    problem: object
    X: np.ndarray                 # ambient vector
    Xbar: list
    WN: list
    S: list                       # per step: list of per-block arrays
    Sbar: list
    W: list
    alphas: list
    padding: int = 0
    split: str = "range"

    @property
    def length(self):
        return len(self.S)

    @property
    def objective(self):
        return float(self.problem.c @ self.X)


def _pad(chain, N):
    M = len(chain.steps)
    if N is None:
        N = M
    if N < M:
        raise BadParams(f"chain has {M} steps; cannot pad to {N}")
    return N, N - M


def _decompose(kind, T_full, U, V, split):
    """Split ``T`` (already ``T - Tbar``) into ``W`` with ``W + W' = T``."""
    if kind is ConeKind.NONNEG:
        return 0.5 * T_full
    if split == "symmetric":
        return 0.5 * T_full
    if V.shape[1] == 0:
        return np.zeros_like(T_full)
    PV = V @ V.T
    PU = U @ U.T
    return PV @ T_full @ PU + 0.5 * PV @ T_full @ PV


def _block_alpha(kind, P, W):
    """Minimal ``alpha`` with ``[[P, W], [W', alpha I]] >= 0`` (``None`` if none exists)."""
    if kind is ConeKind.NONNEG:
        w = np.asarray(W)
        p = np.asarray(P)
        live = np.abs(w) > 1e-12 * (1.0 + np.abs(w).max(initial=0.0))
        if not np.any(live):
            return 0.0, None
        if np.any(p[live] <= 1e-12 * (1.0 + p.max(initial=0.0))):
            return None, "range-coupling"
        return float(np.max(w[live] ** 2 / p[live])), None
    n = P.shape[0]
    if n == 0 or not np.any(W):
        return 0.0, None
    big = np.block([[P, W], [W.T, np.zeros((n, n))]])
    direction = np.block([[np.zeros((n, n)), np.zeros((n, n))], [np.zeros((n, n)), np.eye(n)]])
    res = min_psd_shift((big + big.T) / 2, direction)
    if not res.found:
        return None, res.witness
    return res.alpha, None


def assemble_extended_dual(chain, reduced_point, N=None, split="range"):
    """Build an extended-dual certificate from a dual-side chain and a reduced solution.

    ``reduced_point`` is a solution of the reduced equality form.  The chain
    is padded at the front with zero certificates up to length ``N``.
    ``Sbar_i = U_i U_i' S_i U_i U_i'`` and ``Xbar = U_N U_N' X U_N U_N'``.

    ``split="range"`` (default) writes the remainder ``T = S_i - Sbar_i`` as
    ``W_i = V V' T U U' + V V' T V V' / 2``, whose range lies in the span of
    the face complement ``V``, as the semidefinite constraint requires.
    ``split="symmetric"`` uses ``W_i = T / 2``, which violates that range
    condition whenever ``U' S_i V`` is nonzero; it raises
    :class:`AssemblyFailed` in that case.
    """
    if chain.side is not Side.DUAL:
        raise BadParams("extended duals are assembled for generator-form (dual-side) reductions")
    if split not in ("range", "symmetric"):
        raise BadParams(f"unknown split {split!r}")
    problem = chain.problem
    for k, blk in enumerate(problem.blocks):
        if blk.kind is ConeKind.QUAD:
            raise BadParams(f"block {k} is a second-order cone")
    N, pad = _pad(chain, N)
    X = lift_solution(chain, reduced_point)
    kinds = [blk.kind for blk in problem.blocks]

    def parts(vec):
        out = []
        for k, kind in enumerate(kinds):
            v = vec[problem.block_slice(k)]
            out.append(smat(v) if kind is ConeKind.PSD else v.copy())
        return out

    def projectors(faces):
        out = []
        for face in faces:
            if face.kind is ConeKind.PSD:
                out.append((face.U, face.V))
            elif face.kind is ConeKind.NONNEG:
                mask = np.zeros(face.n)
                mask[face.support] = 1.0
                out.append((mask, 1.0 - mask))
            else:
                out.append(None)
        return out

    def inner(kind, proj, T):
        if proj is None:
            return None
        U, V = proj
        if kind is ConeKind.PSD:
            return U @ (U.T @ T @ U) @ U.T
        return U * T

    zero_parts = [np.zeros((blk.size, blk.size)) if blk.kind is ConeKind.PSD else np.zeros(blk.size)
                  for blk in problem.blocks]
    S_list, Sbar_list, W_list = [], [], []
    frames = []
    for _ in range(pad):
        S_list.append([z.copy() for z in zero_parts])
        Sbar_list.append([z.copy() for z in zero_parts])
        W_list.append([z.copy() for z in zero_parts])
        frames.append(None)
    for step in chain.steps:
        S = parts(step.certificate.vector(problem))
        proj = projectors(step.faces)
        Sbar, W = [], []
        for k, kind in enumerate(kinds):
            if proj[k] is None:
                Sbar.append(np.zeros_like(S[k]))
                W.append(np.zeros_like(S[k]))
                continue
            sb = inner(kind, proj[k], S[k])
            Sbar.append(sb)
            W.append(_decompose(kind, S[k] - sb, proj[k][0], proj[k][1], split))
        S_list.append(S)
        Sbar_list.append(Sbar)
        W_list.append(W)
        frames.append(proj)
    final_proj = projectors(chain.final)
    Xp = parts(X)
    Xbar, WN = [], []
    for k, kind in enumerate(kinds):
        if final_proj[k] is None:
            Xbar.append(Xp[k].copy())
            WN.append(np.zeros_like(Xp[k]))
            continue
        xb = inner(kind, final_proj[k], Xp[k])
        Xbar.append(xb)
        WN.append(_decompose(kind, Xp[k] - xb, final_proj[k][0], final_proj[k][1], split))

    alphas = []
    running = [np.zeros_like(z) for z in zero_parts]
    for i in range(N):
        running = [r + s for r, s in zip(running, Sbar_list[i])]
        nxt = W_list[i + 1] if i + 1 < N else WN
        alpha = 0.0
        for k, kind in enumerate(kinds):
            if kind not in (ConeKind.PSD, ConeKind.NONNEG):
                continue
            a, witness = _block_alpha(kind, running[k], nxt[k])
            if a is None:
                raise AssemblyFailed(
                    f"step {i}, block {k}: no alpha makes the semidefinite constraint hold "
                    f"({witness}); split={split!r}")
            alpha = max(alpha, a)
        alphas.append(alpha)
    if N == 0:
        # No certificates: X itself must be in the cone.
        for k, kind in enumerate(kinds):
            if kind in (ConeKind.PSD, ConeKind.NONNEG) and np.any(WN[k]):
                raise AssemblyFailed("chain is empty but X has components outside the face")
    return ExtendedDualCertificate(problem, X, Xbar, WN, S_list, Sbar_list, W_list, alphas,
                                   padding=pad, split=split)


def verify_extended_dual(cert, tol=FEASIBILITY_TOL):
    """List every violated extended-dual constraint (empty list = feasible)."""
    problem = cert.problem
    kinds = [blk.kind for blk in problem.blocks]
    out = []

    def psd_violation(kind, M):
        if kind is ConeKind.PSD:
            if M.size == 0:
                return 0.0
            return -min_eig((M + M.T) / 2)
        return -float(np.min(M, initial=0.0))

    def flat(kind, M):
        return svec((M + M.T) / 2) if kind is ConeKind.PSD else M

    scale = 1.0 + float(np.abs(cert.X).max(initial=0.0))
    resid = problem.A @ cert.X - problem.b
    if np.abs(resid).max(initial=0.0) > tol * (scale + float(np.abs(problem.b).max(initial=0.0))):
        out.append(f"A X = b violated by {np.abs(resid).max():.3e}")
    for k, kind in enumerate(kinds):
        if kind not in (ConeKind.PSD, ConeKind.NONNEG):
            continue
        Xk = cert.X[problem.block_slice(k)]
        rebuilt = cert.Xbar[k] + cert.WN[k] + (cert.WN[k].T if kind is ConeKind.PSD else cert.WN[k])
        if np.abs(flat(kind, rebuilt) - Xk).max(initial=0.0) > tol * scale:
            out.append(f"block {k}: X != Xbar + W_N + W_N'")
        if psd_violation(kind, cert.Xbar[k]) > tol * scale:
            out.append(f"block {k}: Xbar is not semidefinite")
    for i, (S, Sbar, W) in enumerate(zip(cert.S, cert.Sbar, cert.W)):
        vec = np.zeros(problem.N)
        for k, kind in enumerate(kinds):
            vec[problem.block_slice(k)] = flat(kind, S[k]) if kind is ConeKind.PSD else S[k]
        sscale = 1.0 + float(np.abs(vec).max(initial=0.0))
        cscale = sscale * (1.0 + float(np.abs(problem.c).max(initial=0.0)))
        if abs(float(problem.c @ vec)) > tol * cscale:
            out.append(f"step {i}: <C, S_i> = {problem.c @ vec:.3e}")
        ortho = problem.A @ vec
        ascale = sscale * (1.0 + float(abs(problem.A).max() if problem.A.nnz else 0.0))
        if np.abs(ortho).max(initial=0.0) > tol * ascale:
            out.append(f"step {i}: <A_j, S_i> up to {np.abs(ortho).max():.3e}")
        for k, kind in enumerate(kinds):
            if kind not in (ConeKind.PSD, ConeKind.NONNEG):
                continue
            rebuilt = Sbar[k] + W[k] + (W[k].T if kind is ConeKind.PSD else W[k])
            if np.abs(flat(kind, rebuilt) - flat(kind, S[k])).max(initial=0.0) > tol * sscale:
                out.append(f"step {i}, block {k}: S_i != Sbar_i + W_i + W_i'")
            if psd_violation(kind, Sbar[k]) > tol * sscale:
                out.append(f"step {i}, block {k}: Sbar_i is not semidefinite")
        if i == 0:
            for k, kind in enumerate(kinds):
                if kind in (ConeKind.PSD, ConeKind.NONNEG) and np.any(np.abs(W[k]) > tol * sscale):
                    out.append(f"block {k}: W_0 is not zero")
    N = len(cert.S)
    running = None
    for i in range(N):
        running = cert.Sbar[i] if running is None else [r + s for r, s in zip(running, cert.Sbar[i])]
        nxt = cert.W[i + 1] if i + 1 < N else cert.WN
        a = cert.alphas[i]
        for k, kind in enumerate(kinds):
            if kind is ConeKind.PSD:
                n = running[k].shape[0]
                big = np.block([[running[k], nxt[k]], [nxt[k].T, a * np.eye(n)]])
                s = 1.0 + float(np.abs(big).max(initial=0.0))
                if n and min_eig((big + big.T) / 2) < -tol * s:
                    out.append(f"step {i}, block {k}: semidefinite coupling constraint fails")
            elif kind is ConeKind.NONNEG:
                p, w = running[k], nxt[k]
                s = 1.0 + float(np.abs(w).max(initial=0.0)) ** 2 + float(np.abs(p).max(initial=0.0)) * (1 + a)
                if np.any(p * a - w ** 2 < -tol * s) or np.any(p < -tol * s):
                    out.append(f"step {i}, block {k}: diagonal coupling constraint fails")
    return out

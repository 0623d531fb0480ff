"""Maximum-rank reducing certificates via linear programming.

Given the current face of every block, a reducing certificate is a vector ``s``
in the dual of the face, orthogonal to the problem's affine set, with a
compression ``G_b = U_b' S_b U_b`` that is nonzero.  Restricting each ``G_b``
to the polyhedral cone generated by ``w w'`` (``w`` from the chosen
approximation family) makes the search a linear program:

    maximize  sum_k t_k
    s.t.      G_b = sum_k lambda_k w_k w_k'      (per block)
              orthogonality of s
              0 <= t_k <= 1,  t_k <= lambda_k

The weights are carried as ``lambda = t + excess`` with ``excess >= 0``, so the
LP has only equality rows and bounds.  An optimal solution puts ``t_k = 1`` on
every generator that any certificate can use, so its compression has maximum
rank among all certificates.

Two formulations are available.  The explicit one keeps the ambient
certificate entries (dual side) or the multipliers ``yhat`` (primal side) as LP
variables.  The condensed one, used by default, projects those variables out
with a left-nullspace computation so the LP only involves the weights; the
eliminated part is recovered afterwards by a least-squares solve.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .approx import DIAG, generators, parse_family, require_search
from .errors import NumericalFailure, UnsupportedCone
from .faces import FaceState
from .linalg import ComponentSplit, min_eig
from .lp import LPProblem, LPStatus, solve_lp
from .model import ConeKind, Side, smat, svec
from .settings import DEFAULT_TOLERANCES


@dataclass(frozen=True, eq=False)
class Certificate:
    """One reducing certificate across all blocks.

    ``blocks[k]`` is the ambient certificate block (matrix for PSD, vector
    for NonNeg, ``None`` for blocks that cannot carry one).  ``compressions``
    holds ``U' S U`` (PSD) or the support entries (NonNeg).
    """

    side: Side
    blocks: tuple
    compressions: tuple
    lam: tuple
    t: tuple
    yhat: np.ndarray | None = None

    def vector(self, problem):
        """Ambient certificate as a packed vector of length ``problem.N``."""
        out = np.zeros(problem.N)
        for k, S in enumerate(self.blocks):
            if S is None:
                continue
            out[problem.block_slice(k)] = svec(S) if problem.blocks[k].kind is ConeKind.PSD else S
        return out

    @property
    def total_trace(self):
        total = 0.0
        for G in self.compressions:
            if G is None:
                continue
            total += float(np.trace(G)) if np.ndim(G) == 2 else float(np.sum(G))
        return total

    def ranks(self, tol_rel=DEFAULT_TOLERANCES.null_rel):
        """Numerical rank of every compression (``None`` for non-reducible blocks)."""
        out = []
        for G in self.compressions:
            if G is None:
                out.append(None)
            elif np.ndim(G) == 2:
                if G.size == 0:
                    out.append(0)
                    continue
                w = np.linalg.eigvalsh((G + G.T) / 2)
                out.append(int(np.count_nonzero(w > tol_rel * max(1.0, w[-1]))))
            else:
                g = np.asarray(G)
                out.append(int(np.count_nonzero(g > tol_rel * max(1.0, g.max(initial=0.0)))))
        return out


@dataclass
class SearchStats:
    lp_time: float = 0.0
    search_time: float = 0.0
    lp_rows: int = 0
    lp_cols: int = 0
    lp_iterations: int = 0
    lp_status: str = ""


@dataclass(eq=False)
class CertificateLP:
    """An LP together with the location of each variable group."""

    lp: LPProblem
    varmap: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# shared pieces


def _check_blocks(problem):
    for k, blk in enumerate(problem.blocks):
        if blk.kind is ConeKind.QUAD:
            raise UnsupportedCone(f"block {k} is a second-order cone; reduction supports "
                                  "free, nonnegative and PSD blocks only")


def _generator_sets(faces, family):
    """Per block: the generator set and the sparse matrix of ``w w'`` columns."""
    out = []
    for face in faces:
        if not face.reducible or face.dim == 0:
            out.append(None)
        elif face.kind is ConeKind.PSD:
            gens = generators(family, face.dim)
            out.append((gens, gens.outer_products()))
        else:
            gens = generators(DIAG, face.dim)
            out.append((gens, sp.identity(face.dim, format="csr")))
    return out


def _generator_offsets(gensets):
    counts = [0 if g is None else g[1].shape[1] for g in gensets]
    return np.concatenate([[0], np.cumsum(counts)]).astype(int)


def _data_rows(problem, side):
    """Rows a dual-side certificate must be orthogonal to: ``[c; A]``."""
    return sp.vstack([sp.csr_matrix(problem.c.reshape(1, -1)), problem.A], format="csc")


def _free_columns(problem):
    cols = [np.arange(problem.offsets[k], problem.offsets[k + 1])
            for k, blk in enumerate(problem.blocks) if blk.kind is ConeKind.FREE]
    return np.concatenate(cols) if cols else np.zeros(0, dtype=int)


def _weights_to_compression(face, gen_matrix, lam):
    if face.kind is ConeKind.PSD:
        return smat(gen_matrix @ lam)
    return np.asarray(lam, dtype=float).copy()


def _assemble(problem, side, faces, gensets, lam_all, t_all, ambient, yhat):
    """Build a normalized :class:`Certificate` from weights and ambient parts."""
    offs = _generator_offsets(gensets)
    blocks, comps, lams, ts = [], [], [], []
    for k, face in enumerate(faces):
        part = ambient[problem.block_slice(k)]
        if face.kind is ConeKind.PSD:
            blocks.append(smat(part))
        elif face.kind is ConeKind.NONNEG:
            blocks.append(part.copy())
        else:
            blocks.append(None)
        gs = gensets[k]
        if gs is None:
            comps.append(None if not face.reducible else
                         (np.zeros((0, 0)) if face.kind is ConeKind.PSD else np.zeros(0)))
            lams.append(np.zeros(0))
            ts.append(np.zeros(0))
            continue
        lam = lam_all[offs[k]:offs[k + 1]]
        comps.append(_weights_to_compression(face, gs[1], lam))
        lams.append(lam.copy())
        ts.append(t_all[offs[k]:offs[k + 1]].copy())
    return Certificate(side, tuple(blocks), tuple(comps), tuple(lams), tuple(ts), yhat)


def _max_weight(lam_all):
    return float(lam_all.max(initial=0.0))


# ---------------------------------------------------------------------------
# explicit formulation


def build_certificate_lp(problem, side, faces=None, family=DIAG):
    """The certificate LP with ambient certificate variables.

    Dual side: variables are the full ambient entries of every reducible
    block, then ``t`` and ``excess`` per generator.  Rows are the per-block
    compression identities followed by the orthogonality rows ``<c,S> = 0``
    and ``<A_j,S> = 0``; rows with no nonzero coefficient are omitted.

    Primal side: variables are ``yhat``, ``t`` and ``excess``; rows are the
    compression identities of ``A' yhat``, then ``b' yhat = 0`` and zero
    certificate on free blocks.
    """
    side = Side.parse(side)
    family = parse_family(family)
    require_search(family)
    problem.check()
    _check_blocks(problem)
    faces = faces or FaceState.initial(problem)
    gensets = _generator_sets(faces, family)
    offs = _generator_offsets(gensets)
    G = int(offs[-1])
    if side is Side.DUAL:
        D = _data_rows(problem, side)
        red = [k for k, f in enumerate(faces) if f.reducible]
        amb_offsets = np.concatenate([[0], np.cumsum([problem.blocks[k].length for k in red])]).astype(int)
        n_amb = int(amb_offsets[-1])
        comp_rows = []
        for pos, k in enumerate(red):
            face = faces[k]
            if gensets[k] is None:
                continue
            left = sp.csr_matrix((face.inner_length, n_amb))
            left = sp.lil_matrix(left)
            left[:, amb_offsets[pos]:amb_offsets[pos + 1]] = face.inner_map.T
            Wpad = sp.lil_matrix((face.inner_length, G))
            Wpad[:, offs[k]:offs[k + 1]] = gensets[k][1]
            comp_rows.append(sp.hstack([left.tocsr(), -Wpad.tocsr(), -Wpad.tocsr()]))
        amb_cols = np.concatenate([np.arange(problem.offsets[k], problem.offsets[k + 1]) for k in red]) \
            if red else np.zeros(0, dtype=int)
        orth = D[:, amb_cols].tocsr()
        orth = orth[np.diff(orth.indptr) > 0]
        orth_rows = sp.hstack([orth, sp.csr_matrix((orth.shape[0], 2 * G))])
        E = sp.vstack(comp_rows + [orth_rows], format="csr")
        n_first = n_amb
        varmap = {"ambient": slice(0, n_amb), "ambient_blocks": red,
                  "ambient_offsets": amb_offsets}
    else:
        m = problem.m
        AT = problem.AT.tocsr()
        comp_rows = []
        for k, face in enumerate(faces):
            if gensets[k] is None:
                continue
            block_AT = AT[problem.block_slice(k)]
            left = (face.inner_map.T @ block_AT).tocsr()
            Wpad = sp.lil_matrix((face.inner_length, G))
            Wpad[:, offs[k]:offs[k + 1]] = gensets[k][1]
            comp_rows.append(sp.hstack([left, -Wpad.tocsr(), -Wpad.tocsr()]))
        extra = sp.vstack([sp.csr_matrix(problem.b.reshape(1, -1)), AT[_free_columns(problem)]],
                          format="csr")
        extra = extra[np.diff(extra.indptr) > 0]
        extra_rows = sp.hstack([extra, sp.csr_matrix((extra.shape[0], 2 * G))])
        E = sp.vstack(comp_rows + [extra_rows], format="csr")
        n_first = m
        varmap = {"yhat": slice(0, m)}
    n_var = n_first + 2 * G
    c = np.zeros(n_var)
    c[n_first:n_first + G] = 1.0
    lower = np.full(n_var, -np.inf)
    upper = np.full(n_var, np.inf)
    lower[n_first:] = 0.0
    upper[n_first:n_first + G] = 1.0
    varmap.update({"t": slice(n_first, n_first + G), "excess": slice(n_first + G, n_var),
                   "generator_offsets": offs, "gensets": gensets})
    lp = LPProblem(c, E.tocsr(), np.zeros(E.shape[0]), lower, upper)
    return CertificateLP(lp, varmap)


def _certificate_from_explicit(problem, side, faces, clp, x, tol):
    vm = clp.varmap
    t_all = x[vm["t"]]
    lam_all = t_all + x[vm["excess"]]
    scale = _max_weight(lam_all)
    if _trace_of(faces, vm["gensets"], lam_all) <= tol.zero_trace:
        return None
    lam_all = lam_all / scale
    if side is Side.DUAL:
        ambient = np.zeros(problem.N)
        amb = x[vm["ambient"]] / scale
        offs = vm["ambient_offsets"]
        for pos, k in enumerate(vm["ambient_blocks"]):
            ambient[problem.block_slice(k)] = amb[offs[pos]:offs[pos + 1]]
        yhat = None
    else:
        yhat = x[vm["yhat"]] / scale
        ambient = problem.AT @ yhat
        ambient[_free_columns(problem)] = 0.0
    return _assemble(problem, side, faces, vm["gensets"], lam_all, t_all, ambient, yhat)


def _trace_of(faces, gensets, lam_all):
    offs = _generator_offsets(gensets)
    total = 0.0
    for k, gs in enumerate(gensets):
        if gs is None:
            continue
        lam = lam_all[offs[k]:offs[k + 1]]
        if faces[k].kind is ConeKind.PSD:
            norms = np.sum(gs[0].generators ** 2, axis=1)
            total += float(norms @ lam)
        else:
            total += float(lam.sum())
    return total


# ---------------------------------------------------------------------------
# condensed formulation


def _condensed_system(problem, side, faces, gensets, tol):
    """Constraint rows on the weights plus a solver for the eliminated part.

    Returns ``(K_rows, K, elim_split, rhs_builder)`` where ``K_rows`` is a
    dense matrix with orthonormal rows such that weights ``lam`` are feasible
    iff ``K_rows @ lam = 0``.
    """
    offs = _generator_offsets(gensets)
    G = int(offs[-1])
    if side is Side.DUAL:
        D = _data_rows(problem, side)
        K_parts, L_parts = [], []
        for k, face in enumerate(faces):
            if not face.reducible:
                continue
            Dk = D[:, problem.block_slice(k)]
            if gensets[k] is not None:
                K_parts.append((k, (Dk @ face.inner_map @ gensets[k][1]).tocsc()))
            L_parts.append((k, (Dk @ face.outer_map).tocsc()))
        K = _hstack_by_offsets(K_parts, offs, D.shape[0])
        L = sp.hstack([part for _, part in L_parts] or [sp.csr_matrix((D.shape[0], 0))], format="csr")
        split = ComponentSplit(L, tol.rank_rel)
        Q = split.left_null_space()
        constraint = (Q.T @ K).tocsr()
        return constraint, K, split, L_parts
    AT = problem.AT.tocsr()
    H_parts, W_parts = [], []
    row = 0
    for k, face in enumerate(faces):
        if gensets[k] is None:
            continue
        H_parts.append((face.inner_map.T @ AT[problem.block_slice(k)]).tocsr())
        W_parts.append((row, k))
        row += face.inner_length
    n_comp = row
    extra = sp.vstack([sp.csr_matrix(problem.b.reshape(1, -1)), AT[_free_columns(problem)]], format="csr")
    H = sp.vstack(H_parts + [extra], format="csr") if H_parts else extra
    split = ComponentSplit(H, tol.rank_rel)
    Q = split.left_null_space().tocsr()[:n_comp]
    Wbig = sp.lil_matrix((n_comp, G))
    for start, k in W_parts:
        gm = gensets[k][1]
        Wbig[start:start + gm.shape[0], offs[k]:offs[k + 1]] = gm
    Wbig = Wbig.tocsr()
    constraint = (Q.T @ Wbig).tocsr()
    return constraint, Wbig, split, n_comp


def _hstack_by_offsets(parts, offs, nrows):
    G = int(offs[-1])
    if not parts:
        return sp.csr_matrix((nrows, G))
    out = sp.lil_matrix((nrows, G))
    for k, mat in parts:
        out[:, offs[k]:offs[k + 1]] = mat
    return out.tocsr()


def _solve_weight_lp(constraint, G, tol, solver, stats):
    """Maximize the number of active generators subject to ``constraint @ lam = 0``."""
    if constraint.shape[0]:
        basis = ComponentSplit(constraint, tol.rank_rel).row_basis()
    else:
        basis = np.zeros((0, G))
    E = sp.csr_matrix(np.hstack([basis, basis]))
    c = np.concatenate([np.ones(G), np.zeros(G)])
    lower = np.zeros(2 * G)
    upper = np.concatenate([np.ones(G), np.full(G, np.inf)])
    lp = LPProblem(c, E, np.zeros(E.shape[0]), lower, upper)
    start = time.perf_counter()
    outcome = solve_lp(lp, solver)
    stats.lp_time += time.perf_counter() - start
    stats.lp_rows, stats.lp_cols = lp.shape
    stats.lp_iterations = outcome.iterations
    stats.lp_status = outcome.status.value
    if outcome.status is not LPStatus.OPTIMAL:
        raise NumericalFailure(f"certificate LP ended with status {outcome.status.value}")
    t = outcome.x[:G]
    lam = outcome.x[:G] + outcome.x[G:]
    # Generators outside the attainable set come back at round-off level.
    lam = np.where(lam > 1e-9 * max(1.0, lam.max(initial=0.0)), lam, 0.0)
    return lam, t


def search_certificate(problem, side, faces=None, family=DIAG, tol=DEFAULT_TOLERANCES,
                       solver=None, formulation="condensed"):
    """Like :func:`find_certificate` but also returns :class:`SearchStats`."""
    side = Side.parse(side)
    family = parse_family(family)
    require_search(family)
    problem.check()
    _check_blocks(problem)
    faces = faces or FaceState.initial(problem)
    stats = SearchStats()
    start = time.perf_counter()
    if formulation == "explicit":
        clp = build_certificate_lp(problem, side, faces, family)
        t0 = time.perf_counter()
        outcome = solve_lp(clp.lp, solver)
        stats.lp_time = time.perf_counter() - t0
        stats.lp_rows, stats.lp_cols = clp.lp.shape
        stats.lp_iterations = outcome.iterations
        stats.lp_status = outcome.status.value
        if outcome.status is not LPStatus.OPTIMAL:
            raise NumericalFailure(f"certificate LP ended with status {outcome.status.value}")
        cert = _certificate_from_explicit(problem, side, faces, clp, outcome.x, tol)
    elif formulation == "condensed":
        cert = _search_condensed(problem, side, faces, family, tol, solver, stats)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    if cert is not None:
        problems = verify_certificate(problem, faces, cert, tol)
        if problems:
            raise NumericalFailure("certificate failed verification: " + "; ".join(problems))
    stats.search_time = time.perf_counter() - start
    return cert, stats


def _search_condensed(problem, side, faces, family, tol, solver, stats):
    gensets = _generator_sets(faces, family)
    offs = _generator_offsets(gensets)
    G = int(offs[-1])
    if G == 0:
        return None
    constraint, K, split, extra = _condensed_system(problem, side, faces, gensets, tol)
    lam, t = _solve_weight_lp(constraint, G, tol, solver, stats)
    if _trace_of(faces, gensets, lam) <= tol.zero_trace:
        return None
    scale = _max_weight(lam)
    lam = lam / scale
    if side is Side.DUAL:
        e, resid = split.lstsq(-(K @ lam))
        _check_residual(resid, K @ lam, "orthogonality")
        ambient = np.zeros(problem.N)
        pos = 0
        for k, outer in extra:
            face = faces[k]
            sl = problem.block_slice(k)
            part = outer.shape[1]
            amb = face.outer_map @ e[pos:pos + part]
            if gensets[k] is not None:
                amb = amb + face.inner_map @ (gensets[k][1] @ lam[offs[k]:offs[k + 1]])
            ambient[sl] = amb
            pos += part
        yhat = None
    else:
        n_comp = extra
        rhs = np.concatenate([K @ lam, np.zeros(split.shape[0] - n_comp)])
        yhat, resid = split.lstsq(rhs)
        _check_residual(resid, rhs, "compression")
        ambient = problem.AT @ yhat
        ambient[_free_columns(problem)] = 0.0
    return _assemble(problem, side, faces, gensets, lam, t, ambient, yhat)


def _check_residual(resid, rhs, what):
    if resid > 1e-8 * (1.0 + float(np.linalg.norm(rhs))):
        raise NumericalFailure(f"{what} system inconsistent after LP solve (residual {resid:.2e})")


def find_certificate(problem, side, faces=None, family=DIAG, tol=DEFAULT_TOLERANCES, solver=None,
                     formulation="condensed"):
    """A maximum-rank reducing certificate for the current faces, or ``None``."""
    cert, _ = search_certificate(problem, side, faces, family, tol, solver, formulation)
    return cert


# ---------------------------------------------------------------------------
# independent verification


def verify_certificate(problem, faces, cert, tol=DEFAULT_TOLERANCES):
    """Check a certificate against the problem data; returns a list of violations."""
    out = []
    s = cert.vector(problem)
    s_norm = float(np.linalg.norm(s))
    for k, blk in enumerate(problem.blocks):
        if blk.kind is ConeKind.FREE and cert.blocks[k] is not None and np.any(cert.blocks[k]):
            out.append(f"block {k}: free block carries a certificate")
    if cert.side is Side.DUAL:
        rows = _data_rows(problem, Side.DUAL).tocsr()
        resid = np.abs(rows @ s)
        norms = np.sqrt(np.asarray(rows.multiply(rows).sum(axis=1)).ravel())
        bound = tol.orthogonality * (1.0 + norms) * (1.0 + s_norm)
        bad = np.flatnonzero(resid > bound)
        for j in bad[:5]:
            label = "c" if j == 0 else f"A_{j}"
            out.append(f"<{label}, S> = {resid[j]:.3e} is not zero")
    else:
        y = cert.yhat
        if y is None:
            out.append("primal-side certificate without multipliers")
        else:
            if abs(problem.b @ y) > tol.orthogonality * (1 + np.linalg.norm(problem.b)) * (1 + np.linalg.norm(y)):
                out.append(f"b'yhat = {problem.b @ y:.3e} is not zero")
            expect = problem.AT @ y
            free = _free_columns(problem)
            if free.size and np.abs(expect[free]).max() > tol.orthogonality * (1 + np.abs(expect).max()):
                out.append("A'yhat does not vanish on free blocks")
            expect[free] = 0.0
            if np.abs(expect - s).max(initial=0.0) > 1e-9 * (1 + np.abs(s).max(initial=0.0)):
                out.append("certificate differs from A'yhat")
    for k, face in enumerate(faces):
        if not face.reducible or cert.blocks[k] is None:
            continue
        G = cert.compressions[k]
        comp = face.compress(cert.blocks[k])
        if np.size(G) and np.abs(comp - G).max() > 1e-8 * (1.0 + np.abs(G).max()):
            out.append(f"block {k}: compression identity violated")
        if np.any(cert.lam[k] < -1e-12):
            out.append(f"block {k}: negative generator weight")
        if face.kind is ConeKind.PSD and np.size(G) and min_eig(G) < -1e-8 * (1 + np.abs(G).max()):
            out.append(f"block {k}: compression is not PSD")
        if face.kind is ConeKind.NONNEG and np.size(G) and np.min(G) < -1e-8:
            out.append(f"block {k}: compression has negative entries")
    return out


def replay_certificate(problem, faces, cert, tol=DEFAULT_TOLERANCES):
    """Like :func:`verify_certificate` but recomputes the compressions from the blocks."""
    comps = []
    for k, face in enumerate(faces):
        S = cert.blocks[k]
        comps.append(None if (S is None or not face.reducible) else face.compress(S))
    rebuilt = Certificate(cert.side, cert.blocks, tuple(comps), cert.lam, cert.t, cert.yhat)
    return verify_certificate(problem, faces, rebuilt, tol)

"""Independent oracles and random instance builders shared by the tests."""

import dataclasses

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from facered import fixtures
from facered.approx import generators, parse_family
from facered.chain import to_reduced
from facered.model import ConeKind, ConicProblem, NonNeg, svec, smat
from facered.reduce import reduce


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    G = rng.normal(size=(n, rank))
    return G @ G.T


def random_sym(rng, n, scale=1.0):
    M = rng.normal(size=(n, n)) * scale
    return (M + M.T) / 2


def with_problem(chain, problem):
    """The same chain attached to a problem that differs only in ``b`` (or ``c`` on the primal side)."""
    return dataclasses.replace(chain, problem=problem)


def random_reduced_point(reduced, rng, low_rank=False):
    """A point of the reduced equality form with every cone block strictly or weakly inside its cone."""
    parts = []
    for blk in reduced.blocks:
        if blk.kind is ConeKind.PSD:
            rank = int(rng.integers(0, blk.size + 1)) if low_rank else blk.size
            parts.append(svec(random_psd(rng, blk.size, rank)))
        elif blk.kind is ConeKind.NONNEG:
            v = rng.uniform(0.0, 2.0, size=blk.size)
            if low_rank:
                v[rng.random(blk.size) < 0.4] = 0.0
            parts.append(v)
        else:
            parts.append(rng.normal(size=blk.size))
    return np.concatenate(parts) if parts else np.zeros(0)


def consistent_dual_chain(result, xhat):
    """Redefine ``b := A_hat xhat`` so ``xhat`` is feasible; dual-side chains do not depend on ``b``."""
    b = result.reduced.A @ xhat
    original = result.chain.problem.with_b(b)
    return with_problem(result.chain, original), result.reduced.with_b(b)


# ---------------------------------------------------------------------------
# maximum-rank oracle


def max_rank_oracle(problem, family, tol=1e-7):
    """Rank of the sum of ``w w'`` over generators that some certificate can use.

    Works on a single-PSD-block generator-form problem at the full cone.  The
    certificate is ``S = sum_k lam_k w_k w_k'`` with ``<C,S> = <A_j,S> = 0``
    and ``lam >= 0``; generator ``k`` is attainable iff ``lam_k`` can be
    positive (maximized over the box ``0 <= lam <= 1``).  Attainable sets are
    closed under addition, so the sum over attainable generators has the
    largest possible rank.
    """
    assert len(problem.blocks) == 1 and problem.blocks[0].kind is ConeKind.PSD
    n = problem.blocks[0].size
    gens = generators(parse_family(family), n).generators
    data = [smat(problem.c)] + [smat(row) for row in problem.A.toarray()]
    E = np.array([[w @ M @ w for w in gens] for M in data])
    keep = np.abs(E).max(axis=1) > 0
    E = E[keep]
    attainable = []
    for k in range(len(gens)):
        cost = np.zeros(len(gens))
        cost[k] = -1.0
        res = linprog(cost, A_eq=E if E.size else None, b_eq=np.zeros(E.shape[0]) if E.size else None,
                      bounds=[(0, 1)] * len(gens), method="highs")
        if res.status == 0 and -res.fun > tol:
            attainable.append(k)
    if not attainable:
        return 0
    total = sum(np.outer(gens[k], gens[k]) for k in attainable)
    w = np.linalg.eigvalsh(total)
    return int(np.count_nonzero(w > tol * max(1.0, w[-1])))


def random_certificate_instance(rng, n, family, m=None):
    """Single PSD block problem whose data are orthogonal to a random generator combination."""
    gens = generators(parse_family(family), n).generators
    count = int(rng.integers(1, max(2, n)))
    chosen = rng.choice(len(gens), size=count, replace=False)
    S = sum(rng.uniform(0.5, 2.0) * np.outer(gens[k], gens[k]) for k in chosen)
    s = svec(S)
    s /= np.linalg.norm(s)
    m = int(rng.integers(1, n + 2)) if m is None else m
    rows = rng.normal(size=(m + 1, s.size))
    rows[:, rng.random(s.size) < 0.3] = 0.0
    rows -= np.outer(rows @ s, s)
    rows[np.abs(rows) < 1e-14] = 0.0
    c, A = rows[0], rows[1:]
    return ConicProblem.from_matrix([fixtures.PSD(n)], sp.csr_matrix(A), np.zeros(m), c)


# ---------------------------------------------------------------------------
# polyhedral instances


def polyhedral_instance(rng, sizes=None, steps=None, m_extra=None):
    """All-nonnegative problem whose data annihilate a random chain of nonnegative certificates.

    Step ``i`` picks a vector that is positive on a few coordinates still in
    the face (and arbitrary on coordinates already removed), so each step of a
    reduction has something to remove.
    """
    sizes = sizes or [int(s) for s in rng.integers(2, 6, size=int(rng.integers(1, 4)))]
    N = sum(sizes)
    steps = steps or int(rng.integers(1, 4))
    alive = np.ones(N, dtype=bool)
    certs = []
    for _ in range(steps):
        idx = np.flatnonzero(alive)
        if idx.size <= 1:
            break
        pick = rng.choice(idx, size=int(rng.integers(1, max(2, idx.size // 2 + 1))), replace=False)
        s = np.zeros(N)
        s[pick] = rng.uniform(0.5, 2.0, size=pick.size)
        dead = np.flatnonzero(~alive)
        if dead.size:
            s[dead] = rng.normal(size=dead.size)
        alive[pick] = False
        certs.append(s)
    Q = np.linalg.qr(np.array(certs).T)[0]
    m = len(certs) + (int(rng.integers(1, 4)) if m_extra is None else m_extra)
    rows = rng.normal(size=(m + 1, N))
    rows -= (rows @ Q) @ Q.T
    rows[np.abs(rows) < 1e-13] = 0.0
    blocks = [NonNeg(s) for s in sizes]
    return ConicProblem.from_matrix(blocks, sp.csr_matrix(rows[1:]), np.zeros(m), rows[0])


def primal_polyhedral_instance(rng):
    """All-nonnegative equality form ``Ax = b`` whose ``b`` forces some coordinates to zero."""
    sizes = [int(s) for s in rng.integers(2, 5, size=int(rng.integers(1, 3)))]
    N = sum(sizes)
    zero = rng.random(N) < 0.4
    zero[rng.integers(N)] = True
    x0 = np.where(zero, 0.0, rng.uniform(0.5, 2.0, size=N))
    m = int(rng.integers(2, N + 1))
    A = rng.normal(size=(m, N))
    # one row that is nonnegative and supported exactly on the forced-zero set, with zero rhs
    A[0] = np.where(zero, rng.uniform(0.5, 2.0, size=N), 0.0)
    b = A @ x0
    c = rng.normal(size=N)
    return ConicProblem.from_matrix([NonNeg(s) for s in sizes], sp.csr_matrix(A), b, c), x0


# ---------------------------------------------------------------------------
# single-step instances for the recovery condition


def single_step_instance(seed):
    """Planted generator-form problem reduced by exactly one certificate."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    d = int(rng.integers(1, n))
    fx = fixtures.planted(seed, n=n, d=d, m=int(rng.integers(0, 3)))
    return fx, reduce(fx.problem, "dual", "d", max_iters=1)


def condition1_point(result, rng, mode):
    """Reduced dual point whose lifted ``W`` is singular; ``Z`` lies in ``range(W)`` or not.

    Returns the reduced point.  ``mode`` is ``"range"`` (condition holds),
    ``"outside"`` (coupling on the nullspace of ``W``) or ``"zero"`` (``Z = 0``).
    """
    chain = result.chain
    face = chain.final[0]
    step_face = chain.steps[0].faces[0]
    U, V = face.U, face.V
    d = U.shape[1]
    rank = int(rng.integers(0, d + 1)) if mode != "outside" else int(rng.integers(0, d))
    W = random_psd(rng, d, rank)
    k = V.shape[1]
    if mode == "zero":
        Z = np.zeros((d, k))
    elif mode == "range":
        Z = W @ rng.normal(size=(d, k))
    else:
        evals, evecs = np.linalg.eigh(W)
        null = evecs[:, evals <= 1e-9 * max(1.0, evals[-1])]
        Z = W @ rng.normal(size=(d, k)) + null @ rng.normal(size=(null.shape[1], k))
    R = random_sym(rng, k)
    X = U @ W @ U.T + U @ Z @ V.T + V @ Z.T @ U.T + V @ R @ V.T
    assert step_face.dim == U.shape[0]
    return to_reduced(chain, svec(X)), X

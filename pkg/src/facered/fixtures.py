"""Deterministic example problems with known reduction behaviour.

Each builder returns a :class:`Fixture`: the problem plus the facts a test
can assert (expected face dimensions, iteration counts, feasible points).
Generator-form data are written as ``L(y) = C + sum_j y_j B_j``; the stored
constraint rows are ``A_j = -B_j`` so that ``c - A'y = L(y)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import BadParams
from .model import SQRT2, ConicProblem, NonNeg, PSD, packed_index, packed_length, svec

CPRANK_Z = np.array([[4.0, 0.0, 1.0], [0.0, 4.0, 1.0], [1.0, 1.0, 3.0]])


@dataclass(eq=False)
class Fixture:
    name: str
    problem: ConicProblem
    side: str = "dual"
    family: str = "d"
    facts: dict = field(default_factory=dict)
    feasible_y: list = field(default_factory=list)
    feasible_x: list = field(default_factory=list)
    dual_points: dict = field(default_factory=dict)


def _sym(n, entries):
    M = np.zeros((n, n))
    for (i, j), v in entries.items():
        M[i, j] = M[j, i] = v
    return M


def _generator_form(name, blocks, C, Bs, b, **kwargs):
    A_blocks = [[None if B is None else -np.asarray(B, dtype=float) for B in Bj] for Bj in Bs]
    p = ConicProblem.from_generator_form(blocks, C, A_blocks, b, meta={"name": name})
    return Fixture(name, p, **kwargs)


def motivating():
    """``[[y1,0,0],[0,-y1,y2],[0,y2,y2+y3]] >= 0``; feasible set y1 = y2 = 0, y3 >= 0."""
    B1 = np.diag([1.0, -1.0, 0.0])
    B2 = _sym(3, {(1, 2): 1.0, (2, 2): 1.0})
    B3 = _sym(3, {(2, 2): 1.0})
    return _generator_form(
        "motivating", [PSD(3)], [None], [[B1], [B2], [B3]], np.zeros(3),
        facts={"face_dims": [3, 1], "iterations": 1, "final_dim": 1,
               "reduced_solution_set": "y1 = y2 = 0, y3 >= 0"},
        feasible_y=[np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, 2.5])])


def diag5():
    """Five-by-five generator form that needs two diagonal reduction steps."""
    B1 = np.diag([1.0, -1.0, 0.0, 0.0, 0.0])
    B2 = _sym(5, {(1, 2): 1.0, (2, 2): 1.0})
    B3 = np.diag([0.0, 0.0, -1.0, 1.0, 0.0])
    B4 = np.diag([0.0, 0.0, 0.0, 0.0, 1.0])
    return _generator_form(
        "diag5", [PSD(5)], [None], [[B1], [B2], [B3], [B4]], np.zeros(4),
        facts={"face_dims": [5, 3, 1], "iterations": 2, "final_dim": 1, "final_U": np.eye(5)[:, 4:]},
        feasible_y=[np.array([0.0, 0.0, 0.0, 1.0])])


def dd4():
    """Four-by-four example reduced in one diagonally dominant step to the point y = (1,1,0)."""
    C = np.diag([1.0, -1.0, -1.0, 1.0])
    B1 = _sym(4, {(0, 1): -1.0, (2, 2): 2.0})
    B2 = _sym(4, {(1, 1): 2.0, (2, 3): -1.0})
    B3 = _sym(4, {(0, 3): -1.0, (1, 2): 1.0})
    null = np.array([[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, -1.0]]).T / SQRT2
    return _generator_form(
        "dd4", [PSD(4)], [C], [[B1], [B2], [B3]], np.zeros(3), family="dd",
        facts={"face_dims": [4, 2], "iterations": 1, "final_dim": 2,
               "unique_y": np.array([1.0, 1.0, 0.0]), "certificate_null": null},
        feasible_y=[np.array([1.0, 1.0, 0.0])])


def recovery3():
    """Three-by-three pair where recovery succeeds for one dual solution and fails for another.

    maximize ``y3 + 2 y2`` subject to ``[[y1,y2,0],[y2,-y3,y2],[0,y2,y3]] >= 0``.
    """
    B1 = _sym(3, {(0, 0): 1.0})
    B2 = _sym(3, {(0, 1): 1.0, (1, 2): 1.0})
    B3 = np.diag([0.0, -1.0, 1.0])
    success = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, -1.0, -1.0]])
    failure = np.array([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    return _generator_form(
        "recovery3", [PSD(3)], [None], [[B1], [B2], [B3]], np.array([0.0, 2.0, 1.0]),
        facts={"face_dims": [3, 1], "iterations": 1, "final_dim": 1,
               "certificate": np.diag([0.0, 1.0, 1.0]), "alpha_success": (1 + 5 ** 0.5) / 2,
               "U": np.eye(3)[:, :1], "V": np.eye(3)[:, 1:]},
        feasible_y=[np.array([1.0, 0.0, 0.0])],
        dual_points={"success": success, "failure": failure})


# ---------------------------------------------------------------------------
# cp-rank relaxation


def _orbit_key(p, q, n):
    i, j = divmod(p, n)
    k, l = divmod(q, n)
    return (min(i, k), max(i, k), min(j, l), max(j, l))


def _cprank_orbits(n):
    """Orbits of the packed ``X`` entries under ``X_{ij,kl} = X_{kj,il} = X_{il,kj}``."""
    N = n * n
    orbits = {}
    for q in range(N):
        for p in range(q + 1):
            orbits.setdefault(_orbit_key(p, q, n), []).append((p, q))
    return list(orbits.values())


def _cp_decomposition(Z):
    """Nonnegative vectors ``v`` with ``Z = sum v v'`` for the built-in matrix."""
    if not np.array_equal(Z, CPRANK_Z):
        return None
    return [np.array([2.0, 0.0, 0.5]), np.array([0.0, 2.0, 0.5]), np.array([0.0, 0.0, 2.5 ** 0.5])]


def cprank(Z=CPRANK_Z, power=1, form="dual"):
    """Relaxation of the cp-rank of ``A = Z^{(x) power}``.

    Variables are ``t`` and ``X`` (indexed by pairs ``(i,j)``), with

    * ``A_ij^2 - X_{ij,ij} >= 0`` (nonnegative block of size ``n^2``),
    * ``[[t, vec(A)'], [vec(A), X]] >= 0`` (PSD block ``n^2 + 1``),
    * ``A (x) A - X >= 0`` (PSD block ``n^2``),
    * ``X_{ij,kl} = X_{kj,il} = X_{il,kj}``,

    and ``t`` is minimized.  ``form="dual"`` builds the generator form with
    one variable per symmetry orbit of ``X`` (plus ``t``); ``form="primal"``
    builds the equality form over the three cone blocks.
    """
    if power not in (1, 2, 3):
        raise BadParams(f"power must be 1, 2 or 3, got {power}")
    if form not in ("dual", "primal"):
        raise BadParams(f"form must be 'dual' or 'primal', got {form!r}")
    Z = np.asarray(Z, dtype=float)
    A = Z.copy()
    for _ in range(power - 1):
        A = np.kron(A, Z)
    n = A.shape[0]
    N2 = n * n
    vecA = A.ravel()
    AA = np.kron(A, A)
    orbits = _cprank_orbits(n)
    blocks = [NonNeg(N2), PSD(N2 + 1), PSD(N2)]
    len1, len2 = N2, packed_length(N2 + 1)
    off2, off3 = len1, len1 + len2
    N = off3 + packed_length(N2)

    def w(p, q):
        return 1.0 if p == q else SQRT2

    facts = {"sizes": (N2, N2 + 1, N2), "r": 1 + len(orbits), "power": power}
    if power == 1:
        facts.update(reduced_sizes=(7, 8, 9), reduced_r=20)
    elif power == 2:
        facts.update(reduced_sizes=(49, 50, 81), reduced_r=464)
    elif power == 3:
        facts.update(reduced_sizes=(343, 344, 729), reduced_r=13262)
    decomposition = _cp_decomposition(Z)
    points = []
    if decomposition is not None:
        vecs = decomposition
        for _ in range(power - 1):
            vecs = [np.kron(a, b) for a in vecs for b in decomposition]
        X = sum(np.outer(np.kron(v, v), np.kron(v, v)) for v in vecs)
        t = float(vecA @ np.linalg.lstsq(X, vecA, rcond=None)[0]) + 1.0
        points.append((t, X))

    if form == "dual":
        rows, cols, vals = [], [], []
        c = np.zeros(N)
        c[:len1] = vecA ** 2
        for p in range(N2):
            c[off2 + packed_index(0, p + 1)] = SQRT2 * vecA[p]
        c[off3:] = svec(AA)
        rows.append(0)
        cols.append(off2 + packed_index(0, 0))
        vals.append(-1.0)
        for r, orbit in enumerate(orbits, start=1):
            for p, q in orbit:
                if p == q:
                    rows.append(r)
                    cols.append(p)
                    vals.append(1.0)
                rows.append(r)
                cols.append(off2 + packed_index(p + 1, q + 1))
                vals.append(-w(p, q))
                rows.append(r)
                cols.append(off3 + packed_index(p, q))
                vals.append(w(p, q))
        m = 1 + len(orbits)
        Amat = sp.csr_matrix((vals, (rows, cols)), shape=(m, N))
        b = np.zeros(m)
        b[0] = -1.0
        problem = ConicProblem.from_matrix(blocks, Amat, b, c, meta={"name": f"cprank{power}"})
        feas_y = []
        for t, X in points:
            y = np.zeros(m)
            y[0] = t
            for r, orbit in enumerate(orbits, start=1):
                p, q = orbit[0]
                y[r] = X[p, q]
            feas_y.append(y)
        return Fixture(f"cprank{power}", problem, side="dual", family="d", facts=facts,
                       feasible_y=feas_y)
    if form != "primal":
        raise BadParams(f"unknown cprank form {form!r}")
    rows, cols, vals, rhs = [], [], [], []

    def add(entries, value):
        r = len(rhs)
        for col, v in entries:
            rows.append(r)
            cols.append(col)
            vals.append(v)
        rhs.append(value)

    for p in range(N2):
        add([(off2 + packed_index(0, p + 1), 1.0)], SQRT2 * vecA[p])
    for q in range(N2):
        for p in range(q + 1):
            add([(off3 + packed_index(p, q), 1.0), (off2 + packed_index(p + 1, q + 1), 1.0)],
                w(p, q) * AA[p, q])
    for p in range(N2):
        add([(p, 1.0), (off2 + packed_index(p + 1, p + 1), 1.0)], vecA[p] ** 2)
    for orbit in orbits:
        p0, q0 = orbit[0]
        for p, q in orbit[1:]:
            add([(off2 + packed_index(p0 + 1, q0 + 1), 1.0 / w(p0, q0)),
                 (off2 + packed_index(p + 1, q + 1), -1.0 / w(p, q))], 0.0)
    c = np.zeros(N)
    c[off2 + packed_index(0, 0)] = 1.0
    Amat = sp.csr_matrix((vals, (rows, cols)), shape=(len(rhs), N))
    problem = ConicProblem.from_matrix(blocks, Amat, np.array(rhs), c,
                                       meta={"name": f"cprank{power}-primal"})
    feas_x = []
    for t, X in points:
        M2 = np.zeros((N2 + 1, N2 + 1))
        M2[0, 0] = t
        M2[0, 1:] = M2[1:, 0] = vecA
        M2[1:, 1:] = X
        feas_x.append(np.concatenate([vecA ** 2 - np.diag(X), svec(M2), svec(AA - X)]))
    return Fixture(f"cprank{power}-primal", problem, side="primal", family="d", facts=facts,
                   feasible_x=feas_x)


# ---------------------------------------------------------------------------
# planted instances


def planted(seed, n=6, d=2, m=2, extra_rows=0):
    """Generator form with a diagonal certificate chain down to a planted face.

    The complement of a random ``d``-subset of coordinates is split into
    levels.  Level 0 coordinates are tied in groups by ``+-y`` diagonal
    patterns (or left with identically zero slack when alone); each later
    coordinate couples off-diagonally to one coordinate of the previous level,
    so it can only be removed once that coordinate is gone.  ``m`` random
    generators live inside the face, whose slack at ``y = 0`` is the identity,
    so the planted face is exactly the minimal one.  ``extra_rows`` adds
    duplicates of random existing rows (rank-neutral).
    """
    if not (1 <= d < n):
        raise BadParams(f"need 1 <= d < n, got n={n}, d={d}")
    if m < 0 or extra_rows < 0:
        raise BadParams("m and extra_rows must be nonnegative")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    face = np.sort(perm[:d])
    rest = list(perm[d:])
    levels = []
    first = max(1, min(len(rest), int(rng.integers(1, len(rest) + 1))))
    levels.append(rest[:first])
    rest = rest[first:]
    while rest:
        size = int(rng.integers(1, len(rest) + 1))
        levels.append(rest[:size])
        rest = rest[size:]
    Bs = []
    level0 = levels[0]
    if len(level0) >= 2:
        for a, b in zip(level0[:-1], level0[1:]):
            Bs.append(np.diag(_unit(n, a) * rng.uniform(0.5, 2.0) - _unit(n, b) * rng.uniform(0.5, 2.0)))
    for prev, cur in zip(levels[:-1], levels[1:]):
        for a in cur:
            partner = prev[int(rng.integers(len(prev)))]
            Bs.append(_sym(n, {(a, partner): rng.uniform(0.5, 2.0), (a, a): rng.uniform(0.5, 2.0)}))
        for a, b in zip(cur[:-1], cur[1:]):
            Bs.append(np.diag(_unit(n, a) * rng.uniform(0.5, 2.0) - _unit(n, b) * rng.uniform(0.5, 2.0)))
    for _ in range(m):
        R = rng.normal(size=(d, d)) * 0.3
        B = np.zeros((n, n))
        B[np.ix_(face, face)] = (R + R.T) / 2
        Bs.append(B)
    for _ in range(extra_rows):
        Bs.append(Bs[int(rng.integers(len(Bs)))].copy())
    C = np.zeros((n, n))
    C[face, face] = 1.0
    fixture = _generator_form(
        f"planted-{seed}", [PSD(n)], [C], [[B] for B in Bs], np.zeros(len(Bs)),
        facts={"planted_face": face, "levels": [list(map(int, lv)) for lv in levels],
               "final_dim": d},
        feasible_y=[np.zeros(len(Bs))])
    return fixture


def _unit(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


BUILDERS = {
    "motivating": motivating,
    "diag5": diag5,
    "dd4": dd4,
    "recovery3": recovery3,
    "cprank": cprank,
    "planted": planted,
}


def build(name, **params):
    """Build a fixture by name, e.g. ``build("cprank", power=2)``."""
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise BadParams(f"unknown fixture {name!r}; choose from {sorted(BUILDERS)}") from None
    return builder(**params)


def worked_examples():
    return [motivating(), diag5(), dd4(), recovery3()]

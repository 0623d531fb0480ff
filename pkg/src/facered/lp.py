"""Linear programs in the form ``max c'x  s.t.  E x = f,  l <= x <= u``.

The built-in solver is a dense bounded-variable revised simplex method with an
artificial-basis Phase I, Dantzig pricing and a switch to Bland's rule once
degenerate pivots pile up.  Anything with a ``solve(LPProblem) -> LPOutcome``
method can be passed instead; :class:`HighsSolver` wraps SciPy's HiGHS.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True, eq=False)
class LPProblem:
    c: np.ndarray
    E: sp.csr_matrix
    f: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        E = sp.csr_matrix(self.E, dtype=float)
        f = np.asarray(self.f, dtype=float).ravel()
        lo = np.asarray(self.lower, dtype=float).ravel()
        hi = np.asarray(self.upper, dtype=float).ravel()
        n = c.size
        if E.shape != (f.size, n) or lo.size != n or hi.size != n:
            raise ValueError(f"inconsistent LP dimensions: E {E.shape}, f {f.size}, c {n}, "
                             f"bounds {lo.size}/{hi.size}")
        if np.isnan(c).any() or np.isnan(f).any() or np.isnan(E.data).any() \
                or np.isnan(lo).any() or np.isnan(hi).any():
            raise ValueError("LP data contains NaN")
        if np.any(lo > hi):
            raise ValueError("a lower bound exceeds its upper bound")
        for name, val in (("c", c), ("E", E), ("f", f), ("lower", lo), ("upper", hi)):
            object.__setattr__(self, name, val)

    @property
    def shape(self):
        return self.E.shape


@dataclass(frozen=True, eq=False)
class LPOutcome:
    status: LPStatus
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0

    @property
    def optimal(self):
        return self.status is LPStatus.OPTIMAL


_BASIC, _AT_LOWER, _AT_UPPER, _FREE_ZERO = -1, 0, 1, 2


class RevisedSimplex:
    """Dense bounded-variable revised simplex (deterministic)."""

    def __init__(self, feas_tol=FEAS_TOL, opt_tol=OPT_TOL, refactor_every=50, max_iter=None):
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.refactor_every = refactor_every
        self.max_iter = max_iter

    def solve(self, p):
        return _SimplexRun(p, self).run()


class _SimplexRun:
    def __init__(self, p, opts):
        self.p = p
        self.opts = opts
        E = p.E.toarray()
        f = p.f.copy()
        zero_rows = ~np.any(E != 0, axis=1)
        self.trivially_infeasible = bool(np.any(np.abs(f[zero_rows]) > opts.feas_tol * (1 + np.abs(f).max(initial=0))))
        E, f = E[~zero_rows], f[~zero_rows]
        m, n = E.shape
        self.m, self.n = m, n
        self.f = f
        lo = np.concatenate([p.lower, np.zeros(m)])
        hi = np.concatenate([p.upper, np.full(m, np.inf)])
        x = np.where(np.isfinite(p.lower), p.lower, np.where(np.isfinite(p.upper), p.upper, 0.0))
        status = np.where(np.isfinite(p.lower), _AT_LOWER,
                          np.where(np.isfinite(p.upper), _AT_UPPER, _FREE_ZERO))
        resid = f - E @ x
        sign = np.where(resid >= 0, 1.0, -1.0)
        self.A = np.hstack([E, np.diag(sign)])
        self.lo, self.hi = lo, hi
        self.x = np.concatenate([x, np.abs(resid)])
        self.status = np.concatenate([status, np.full(m, _BASIC)])
        self.basis = np.arange(n, n + m)
        self.Binv = np.diag(sign)
        self.iterations = 0
        cap = opts.max_iter
        self.max_iter = cap if cap is not None else 50 * (m + n) + 1000

    # -- helpers -----------------------------------------------------------

    def refactor(self):
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        nonbasic = self.status != _BASIC
        rhs = self.f - self.A[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.Binv @ rhs
        return True

    def iterate(self, cost):
        opts = self.opts
        m, ntot = self.m, self.A.shape[1]
        fixed = self.lo == self.hi
        degenerate = 0
        bland = False
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iter:
                return LPStatus.NUMERICAL_FAILURE
            if since_refactor >= opts.refactor_every:
                if not self.refactor():
                    return LPStatus.NUMERICAL_FAILURE
                since_refactor = 0
            y = cost[self.basis] @ self.Binv if m else np.zeros(0)
            d = cost - y @ self.A if m else cost.copy()
            st = self.status
            eligible = (((st == _AT_LOWER) & (d < -opts.opt_tol))
                        | ((st == _AT_UPPER) & (d > opts.opt_tol))
                        | ((st == _FREE_ZERO) & (np.abs(d) > opts.opt_tol))) & ~fixed
            candidates = np.flatnonzero(eligible)
            if candidates.size == 0:
                return LPStatus.OPTIMAL
            q = candidates[0] if bland else candidates[np.argmax(np.abs(d[candidates]))]
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = self.Binv @ self.A[:, q] if m else np.zeros(0)
            delta = direction * alpha
            xb = self.x[self.basis]
            lb, ub = self.lo[self.basis], self.hi[self.basis]
            ratios = np.full(m, np.inf)
            dec = delta > PIVOT_TOL
            inc = delta < -PIVOT_TOL
            with np.errstate(invalid="ignore", divide="ignore"):
                ratios[dec] = (xb[dec] - lb[dec]) / delta[dec]
                ratios[inc] = (ub[inc] - xb[inc]) / -delta[inc]
            ratios = np.where(np.isnan(ratios), np.inf, np.maximum(ratios, 0.0))
            theta_row = ratios.min(initial=np.inf)
            theta_flip = self.hi[q] - self.lo[q]
            if not np.isfinite(theta_row) and not np.isfinite(theta_flip):
                return LPStatus.UNBOUNDED
            self.iterations += 1
            since_refactor += 1
            if theta_flip <= theta_row:
                theta = theta_flip
                self.x[self.basis] = xb - theta * delta
                self.x[q] += direction * theta
                self.status[q] = _AT_UPPER if direction > 0 else _AT_LOWER
            else:
                theta = theta_row
                ties = np.flatnonzero(ratios <= theta + 1e-12 * (1 + theta))
                if bland:
                    r = ties[np.argmin(self.basis[ties])]
                else:
                    r = ties[np.argmax(np.abs(delta[ties]))]
                self.x[self.basis] = xb - theta * delta
                self.x[q] += direction * theta
                leaving = self.basis[r]
                if delta[r] > 0:
                    self.x[leaving], self.status[leaving] = self.lo[leaving], _AT_LOWER
                else:
                    self.x[leaving], self.status[leaving] = self.hi[leaving], _AT_UPPER
                if not np.isfinite(self.x[leaving]):
                    self.x[leaving], self.status[leaving] = 0.0, _FREE_ZERO
                self.basis[r] = q
                self.status[q] = _BASIC
                piv = alpha[r]
                row = self.Binv[r] / piv
                self.Binv -= np.outer(alpha, row)
                self.Binv[r] = row
            if theta <= opts.feas_tol:
                degenerate += 1
                if degenerate > 3 * (m + ntot):
                    bland = True
            else:
                degenerate = 0

    def run(self):
        p, opts = self.p, self.opts
        if self.trivially_infeasible:
            return LPOutcome(LPStatus.INFEASIBLE, iterations=0)
        n, m = self.n, self.m
        scale = 1.0 + np.abs(self.f).max(initial=0.0)
        if self.x[n:].sum() > opts.feas_tol * scale:
            cost = np.concatenate([np.zeros(n), np.ones(m)])
            status = self.iterate(cost)
            if status is not LPStatus.OPTIMAL:
                return LPOutcome(LPStatus.NUMERICAL_FAILURE, iterations=self.iterations)
            self.refactor()
            if self.x[n:].sum() > 1e-7 * scale:
                return LPOutcome(LPStatus.INFEASIBLE, iterations=self.iterations)
        self.hi[n:] = 0.0
        nonbasic_art = np.flatnonzero(self.status[n:] != _BASIC) + n
        self.x[nonbasic_art] = 0.0
        self.status[nonbasic_art] = _AT_LOWER
        cost = np.concatenate([-p.c, np.zeros(m)])
        status = self.iterate(cost)
        if status is not LPStatus.OPTIMAL:
            return LPOutcome(status, iterations=self.iterations)
        if not self.refactor():
            return LPOutcome(LPStatus.NUMERICAL_FAILURE, iterations=self.iterations)
        x = self.x[:n].copy()
        x = np.clip(x, p.lower, p.upper)
        resid = np.abs(p.E @ x - p.f).max(initial=0.0)
        if resid > 1e-8 * (1 + np.abs(p.f).max(initial=0.0)) or np.abs(self.x[n:]).max(initial=0) > 1e-7 * scale:
            return LPOutcome(LPStatus.NUMERICAL_FAILURE, iterations=self.iterations)
        return LPOutcome(LPStatus.OPTIMAL, x, float(p.c @ x), self.iterations)


class HighsSolver:
    """Adapter for SciPy's HiGHS interface with the same contract."""

    def solve(self, p):
        from scipy.optimize import linprog

        bounds = np.column_stack([p.lower, p.upper])
        bounds = [(None if not np.isfinite(a) else a, None if not np.isfinite(b) else b)
                  for a, b in bounds]
        res = linprog(-p.c, A_eq=p.E if p.E.shape[0] else None,
                      b_eq=p.f if p.E.shape[0] else None, bounds=bounds, method="highs")
        mapping = {0: LPStatus.OPTIMAL, 2: LPStatus.INFEASIBLE, 3: LPStatus.UNBOUNDED}
        status = mapping.get(res.status, LPStatus.NUMERICAL_FAILURE)
        iters = int(getattr(res, "nit", 0) or 0)
        if status is not LPStatus.OPTIMAL:
            return LPOutcome(status, iterations=iters)
        return LPOutcome(status, np.asarray(res.x), float(p.c @ res.x), iters)


DEFAULT_SOLVER = RevisedSimplex()


def solve_lp(p, solver=None):
    return (solver or DEFAULT_SOLVER).solve(p)

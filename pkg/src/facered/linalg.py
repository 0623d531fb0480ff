"""Symmetric linear algebra and the PSD line search.

Dense kernels work on face-sized matrices.  The sparse helpers at the bottom
split a matrix into the connected components of its row/column incidence
graph, so rank, left nullspaces and least-squares solves of large but
loosely coupled constraint systems reduce to many small dense problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ConvergenceFailure, NotPSD, NotPSDDirection, RankDeficient
from .model import check_symmetric

NULL_TOL = 1e-8
COUPLING_TOL = 1e-7


@dataclass(frozen=True)
class EigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eig(M):
    """Full spectrum of a symmetric matrix, eigenvalues ascending."""
    M = check_symmetric(M)
    if M.shape[0] == 0:
        return EigResult(np.zeros(0), np.zeros((0, 0)))
    try:
        w, V = np.linalg.eigh((M + M.T) / 2)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"symmetric eigensolver did not converge: {exc}") from exc
    return EigResult(w, V)


def min_eig(M):
    if M.shape[0] == 0:
        return 0.0
    return float(np.linalg.eigvalsh((M + M.T) / 2)[0])


def _is_diagonal(M):
    return not np.any(M - np.diag(np.diag(M)))


def nullspace_basis(M, tol_rel=NULL_TOL):
    """Orthonormal basis of the numerical nullspace of a PSD matrix.

    Eigenvalues at most ``tol_rel * max(1, lambda_max)`` count as zero.
    Exactly diagonal input yields coordinate vectors, which keeps faces of
    diagonal reductions exactly sparse.
    """
    M = check_symmetric(M)
    d = M.shape[0]
    if d == 0:
        return np.zeros((0, 0))
    if _is_diagonal(M):
        diag = np.diag(M)
        thresh = tol_rel * max(1.0, diag.max())
        if diag.min() < -thresh:
            raise NotPSD(f"smallest eigenvalue {diag.min():.3e} is below -{thresh:.1e}")
        return np.eye(d)[:, diag <= thresh]
    eig = sym_eig(M)
    thresh = tol_rel * max(1.0, eig.eigenvalues[-1])
    if eig.eigenvalues[0] < -thresh:
        raise NotPSD(f"smallest eigenvalue {eig.eigenvalues[0]:.3e} is below -{thresh:.1e}")
    return eig.eigenvectors[:, eig.eigenvalues <= thresh]


def orthonormalize(U, tol_rel=1e-10):
    """Orthonormal columns spanning ``range(U)``, in Gram-Schmidt orientation."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2:
        raise ValueError("expected a matrix")
    if U.shape[1] == 0:
        return U.copy()
    if U.shape[1] > U.shape[0]:
        raise RankDeficient(f"{U.shape[1]} columns cannot be independent in dimension {U.shape[0]}")
    s = np.linalg.svd(U, compute_uv=False)
    if s[-1] <= tol_rel * s[0]:
        raise RankDeficient(f"columns are dependent (singular values {s[0]:.3e} .. {s[-1]:.3e})")
    Q, R = np.linalg.qr(U)
    diag = np.diag(R)
    Q = Q * np.where(diag < 0, -1.0, 1.0)
    Q[np.abs(Q) < 1e-15] = 0.0
    return Q


def is_coordinate_frame(U):
    """True when every column of ``U`` is a signed unit coordinate vector."""
    if U.size == 0:
        return True
    nz = U != 0
    return bool(np.all(nz.sum(axis=0) == 1) and np.all(np.abs(U[nz]) == 1.0)
                and np.all(nz.sum(axis=1) <= 1))


def orthonormal_complement(U):
    """Orthonormal basis of ``null(U.T)``; coordinate frames get coordinate complements."""
    n, d = U.shape
    if d == 0:
        return np.eye(n)
    if is_coordinate_frame(U):
        used = np.any(U != 0, axis=1)
        return np.eye(n)[:, ~used]
    V = sla.null_space(U.T, rcond=1e-10)
    if V.shape[1] != n - d:
        raise RankDeficient("face basis does not have full column rank")
    V = orthonormalize(V)
    return V


# ---------------------------------------------------------------------------
# line search


@dataclass(frozen=True)
class LineSearchResult:
    """Outcome of :func:`min_psd_shift`.

    ``status`` is ``"found"`` (with ``alpha``) or ``"infeasible"`` (with a
    ``witness`` naming the violated condition: ``"nullspace-negative"`` or
    ``"range-coupling"``).
    """

    status: str
    alpha: float | None = None
    witness: str | None = None
    detail: str = ""

    @property
    def found(self):
        return self.status == "found"


def min_psd_shift(A, M, tol_rel=NULL_TOL, coupling_tol=COUPLING_TOL):
    """Smallest ``alpha >= 0`` with ``A + alpha M`` positive semidefinite.

    Write ``P`` for a basis of ``null(M)`` and ``Q`` for the eigenvectors of
    ``M`` with positive eigenvalues ``mu``.  A shift exists iff ``P'AP`` is
    PSD and the coupling ``Q'AP`` vanishes on ``null(P'AP)``; the minimal
    shift is then the largest eigenvalue of ``-D^{-1/2} S D^{-1/2}`` where
    ``S`` is the Schur complement of ``P'AP`` and ``D = diag(mu)``.
    """
    A = check_symmetric(A, "coefficient matrix")
    M = check_symmetric(M, "direction")
    if A.shape != M.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {M.shape}")
    n = A.shape[0]
    if n == 0:
        return LineSearchResult("found", 0.0)
    A = (A + A.T) / 2
    scale_a = max(1.0, float(np.linalg.norm(A, 2)))
    mu, basis = np.linalg.eigh((M + M.T) / 2)
    scale_m = max(1.0, float(mu[-1]))
    if mu[0] < -tol_rel * scale_m:
        raise NotPSDDirection(f"direction has eigenvalue {mu[0]:.3e}")
    if min_eig(A) >= -tol_rel * scale_a:
        return LineSearchResult("found", 0.0)
    null = mu <= tol_rel * scale_m
    P, Q, mu_q = basis[:, null], basis[:, ~null], mu[~null]
    App = P.T @ A @ P
    Aqp = Q.T @ A @ P
    if P.shape[1]:
        nu, W = np.linalg.eigh((App + App.T) / 2)
        if nu[0] < -tol_rel * scale_a:
            return LineSearchResult("infeasible", witness="nullspace-negative",
                                    detail=f"eigenvalue {nu[0]:.3e} on the nullspace of the direction")
        zero = nu <= tol_rel * scale_a
        coupling = Aqp @ W[:, zero]
        size = float(np.linalg.norm(coupling)) if coupling.size else 0.0
        if size > coupling_tol * scale_a:
            return LineSearchResult("infeasible", witness="range-coupling",
                                    detail=f"coupling norm {size:.3e} on null(P'AP)")
        Wr = W[:, ~zero]
        pinv_part = Aqp @ Wr
        schur = Q.T @ A @ Q - (pinv_part / nu[~zero]) @ pinv_part.T
    else:
        schur = Q.T @ A @ Q
    root = 1.0 / np.sqrt(mu_q)
    G = -(schur * root[:, None]) * root[None, :]
    alpha = max(0.0, float(np.linalg.eigvalsh((G + G.T) / 2)[-1])) if G.size else 0.0
    # Round-off can leave the shifted matrix marginally indefinite; nudge up.
    norm_a = float(np.linalg.norm(A))
    norm_m = float(np.linalg.norm(M))
    for step in range(40):
        slack = -1e-9 * (1.0 + norm_a + alpha * norm_m)
        if min_eig(A + alpha * M) >= slack:
            return LineSearchResult("found", alpha)
        alpha += 1e-12 * (1.0 + alpha) * 2.0 ** step
    return LineSearchResult("infeasible", witness="range-coupling",
                            detail="no shift passed the eigenvalue check")


# ---------------------------------------------------------------------------
# sparse systems split into connected components


class ComponentSplit:
    """Connected components of a sparse matrix's row/column incidence graph.

    Each component carries the dense SVD of its submatrix.  Thresholds are
    relative to the largest singular value over all components, so the
    decomposition gives the same numerical rank as a dense SVD would.
    """

    def __init__(self, H, tol_rel=1e-10):
        H = sp.csr_matrix(H)
        H.eliminate_zeros()
        self.shape = H.shape
        self.H = H
        R, C = H.shape
        coo = H.tocoo()
        graph = sp.coo_matrix((np.ones(coo.nnz), (coo.row, R + coo.col)), shape=(R + C, R + C))
        ncomp, labels = connected_components(graph, directed=False)
        row_lab, col_lab = labels[:R], labels[R:]
        row_order = np.argsort(row_lab, kind="stable")
        col_order = np.argsort(col_lab, kind="stable")
        row_bounds = np.searchsorted(row_lab[row_order], np.arange(ncomp + 1))
        col_bounds = np.searchsorted(col_lab[col_order], np.arange(ncomp + 1))
        self.components = []
        smax = 0.0
        Hc = H.tocsc()
        for k in range(ncomp):
            rows = row_order[row_bounds[k]:row_bounds[k + 1]]
            cols = col_order[col_bounds[k]:col_bounds[k + 1]]
            if rows.size == 0 or cols.size == 0:
                continue
            block = Hc[:, cols][rows, :].toarray()
            u, s, vt = np.linalg.svd(block, full_matrices=True)
            smax = max(smax, s[0] if s.size else 0.0)
            self.components.append((rows, cols, u, s, vt))
        self.smax = smax
        self.tol = tol_rel * smax

    @property
    def rank(self):
        return int(sum(np.count_nonzero(s > self.tol) for _, _, _, s, _ in self.components))

    def left_null_space(self):
        """Sparse matrix whose orthonormal columns span ``null(H.T)``."""
        R = self.shape[0]
        touched = np.zeros(R, dtype=bool)
        data, rr, cc = [], [], []
        col = 0
        for rows, _, u, s, _ in self.components:
            touched[rows] = True
            k = np.count_nonzero(s > self.tol)
            null = u[:, k:]
            if null.shape[1]:
                r_idx, c_idx = np.nonzero(np.abs(null) > 1e-15)
                rr.append(rows[r_idx])
                cc.append(col + c_idx)
                data.append(null[r_idx, c_idx])
                col += null.shape[1]
        free_rows = np.flatnonzero(~touched)
        rr.append(free_rows)
        cc.append(col + np.arange(free_rows.size))
        data.append(np.ones(free_rows.size))
        col += free_rows.size
        return sp.csr_matrix((np.concatenate(data), (np.concatenate(rr), np.concatenate(cc))),
                             shape=(R, col))

    def lstsq(self, rhs):
        """Minimum-norm least-squares solution of ``H x = rhs`` and its residual norm."""
        rhs = np.asarray(rhs, dtype=float)
        x = np.zeros(self.shape[1])
        for rows, cols, u, s, vt in self.components:
            k = np.count_nonzero(s > self.tol)
            if k == 0:
                continue
            coef = (u[:, :k].T @ rhs[rows]) / s[:k]
            x[cols] = vt[:k].T @ coef
        resid = float(np.linalg.norm(self.H @ x - rhs)) if rhs.size else 0.0
        return x, resid

    def row_basis(self):
        """Dense matrix whose orthonormal rows span the row space of ``H``."""
        out = []
        for _, cols, _, s, vt in self.components:
            k = np.count_nonzero(s > self.tol)
            if k:
                block = np.zeros((k, self.shape[1]))
                block[:, cols] = vt[:k]
                out.append(block)
        return np.vstack(out) if out else np.zeros((0, self.shape[1]))


def sparse_rank(H, tol_rel=1e-10):
    """Numerical rank with singular values below ``tol_rel * sigma_max`` dropped."""
    if H.shape[0] == 0 or H.shape[1] == 0:
        return 0
    return ComponentSplit(H, tol_rel).rank


def _sparse_absmax(M):
    return float(abs(M).max()) if M.nnz else 0.0


def affine_implies(keep_rows, keep_rhs, test_rows, test_rhs, tol_rel=1e-7):
    """Does ``keep_rows @ y = keep_rhs`` imply ``test_rows @ y = test_rhs``?

    Returns ``(holds, reason)``.  An inconsistent ``keep`` system gives
    ``(False, "inconsistent")`` rather than a vacuous yes.
    """
    keep_rows = sp.csr_matrix(keep_rows)
    test_rows = sp.csr_matrix(test_rows)
    keep_rhs = np.asarray(keep_rhs, dtype=float)
    test_rhs = np.asarray(test_rhs, dtype=float)
    if test_rows.shape[0] == 0:
        return True, "no equations to imply"
    scale = 1.0 + max(_sparse_absmax(keep_rows), _sparse_absmax(test_rows),
                      np.abs(keep_rhs).max(initial=0.0), np.abs(test_rhs).max(initial=0.0))
    if keep_rows.shape[0]:
        split = ComponentSplit(keep_rows)
        y0, resid = split.lstsq(keep_rhs)
        if resid > tol_rel * scale:
            return False, "inconsistent"
        homogeneous = ComponentSplit(keep_rows.T.tocsr()).left_null_space()
    else:
        y0 = np.zeros(test_rows.shape[1])
        homogeneous = sp.identity(test_rows.shape[1], format="csr")
    gap = np.abs(test_rows @ y0 - test_rhs).max(initial=0.0)
    if gap > tol_rel * scale * (1.0 + np.abs(y0).max(initial=0.0)):
        return False, f"particular solution violates an implied equation by {gap:.3e}"
    direction = abs(test_rows @ homogeneous)
    worst = direction.max() if direction.nnz else 0.0
    if worst > tol_rel * scale:
        return False, f"a free direction violates an implied equation by {worst:.3e}"
    return True, "implied"

"""Sparse kernels, a deflated Jacobi-PCG Laplacian solver and the dense exact oracle.

``SparseMatrix`` is ``scipy.sparse.csr_matrix`` in canonical form (sorted,
unique column indices per row).

Tolerance contract of :func:`solve_laplacian`: a returned relative residual
``tau = ||L x - y|| / ||y||`` (with ``y`` projected onto the complement of
the all-ones vector) bounds the energy-norm error by

    ||x - L^+ y||_L <= sqrt(kappa) * tau * ||L^+ y||_L

where ``kappa = lambda_max / lambda_2``. Callers that want an energy-norm
accuracy ``delta`` pass ``tau = delta / safety``; see
:data:`DEFAULT_SAFETY`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import DenseLimitError, DisconnectedGraphError, NotALaplacianError, PreconditionError

SparseMatrix = sp.csr_matrix

DEFAULT_DENSE_LIMIT = 2000
DEFAULT_SAFETY = 100.0
# Relative residuals below this are not reliably attainable in float64.
MIN_TOL = 1e-13
_MAX_RESTARTS = 8


def dense_limit() -> int:
    """Vertex cap of the dense oracle, overridable via ``RESPARS_DENSE_LIMIT``."""
    raw = os.environ.get("RESPARS_DENSE_LIMIT")
    if raw is None:
        return DEFAULT_DENSE_LIMIT
    try:
        val = int(raw)
    except ValueError:
        raise PreconditionError(f"RESPARS_DENSE_LIMIT must be an integer, got {raw!r}") from None
    if val < 1:
        raise PreconditionError("RESPARS_DENSE_LIMIT must be positive")
    return val


def check_dense_limit(n: int) -> None:
    limit = dense_limit()
    if n > limit:
        raise DenseLimitError(f"n={n} exceeds the dense oracle limit {limit} (set RESPARS_DENSE_LIMIT)")


def spmv(A: sp.csr_matrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != A.shape[1]:
        raise ValueError(f"dimension mismatch: matrix is {A.shape}, vector has shape {x.shape}")
    return A @ x


def check_laplacian(L: sp.csr_matrix) -> None:
    """Reject asymmetric matrices and positive off-diagonal entries."""
    if L.shape[0] != L.shape[1]:
        raise NotALaplacianError(f"matrix is not square: {L.shape}")
    diff = L - L.T
    if diff.nnz and np.max(np.abs(diff.data)) > 0:
        raise NotALaplacianError("matrix is not symmetric")
    coo = L.tocoo()
    off = coo.row != coo.col
    if np.any(coo.data[off] > 0):
        raise NotALaplacianError("positive off-diagonal entry")


@dataclass(frozen=True)
class SolveResult:
    solution: np.ndarray
    iterations: int
    residual: float
    converged: bool


def _project(X: np.ndarray) -> np.ndarray:
    """Remove the all-ones component of every row, in place."""
    X -= X.mean(axis=1, keepdims=True)
    return X


def _rowdot(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return (A * B).sum(axis=1)


def _apply(L: sp.csr_matrix, X: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray((L @ X.T).T)


def _true_residuals(L, X, Y, ynorm):
    R = Y - _apply(L, X)
    rn = np.sqrt(_rowdot(R, R))
    rel = np.divide(rn, ynorm, out=np.zeros_like(rn), where=ynorm > 0)
    return R, rel


def solve_block(
    L: sp.csr_matrix,
    Y: np.ndarray,
    tol: float,
    max_iter: int,
    diag: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve ``L x_i = y_i`` for every row ``y_i`` of ``Y`` simultaneously.

    Rows are independent: each row's arithmetic does not depend on the other
    rows of the block. Returns ``(X, iterations, relative_residuals)``; the
    residuals are recomputed from the returned ``X``.
    """
    Y = _project(np.array(Y, dtype=np.float64, ndmin=2, order="C"))
    c, n = Y.shape
    if diag is None:
        diag = L.diagonal()
    dinv = np.divide(1.0, diag, out=np.zeros(n), where=diag > 0)
    ynorm = np.sqrt(_rowdot(Y, Y))
    tol = max(tol, MIN_TOL)

    X = np.zeros_like(Y)
    iters = np.zeros(c, dtype=np.int64)
    R = Y.copy()
    rel = np.where(ynorm > 0, 1.0, 0.0)
    active = rel > tol
    total = 0
    restarts = 0
    while active.any() and total < max_iter:
        Z = _project(R * dinv)
        P = Z.copy()
        rz = _rowdot(R, Z)
        while total < max_iter:
            AP = _apply(L, P)
            pap = _rowdot(P, AP)
            ok = active & (pap > 0)
            alpha = np.divide(rz, pap, out=np.zeros(c), where=ok)
            X += alpha[:, None] * P
            R -= alpha[:, None] * AP
            iters += active
            total += 1
            rn = np.sqrt(_rowdot(R, R))
            rec = np.divide(rn, ynorm, out=np.zeros(c), where=ynorm > 0)
            active &= (rec > tol) & ok
            if not active.any():
                break
            Z = _project(R * dinv)
            rz_new = _rowdot(R, Z)
            beta = np.divide(rz_new, rz, out=np.zeros(c), where=active & (rz > 0))
            rz = rz_new
            P = _project(Z + beta[:, None] * P)
        # the recursive residual drifts from the true one; restart where it lied
        _project(X)
        R, rel = _true_residuals(L, X, Y, ynorm)
        active = rel > tol
        restarts += 1
        if restarts > _MAX_RESTARTS:
            break
    return X, iters, rel


def solve_laplacian(
    L: sp.csr_matrix,
    y,
    tol: float = 1e-10,
    max_iter: int | None = None,
    check: bool = True,
) -> SolveResult:
    """Approximate ``L^+ y`` by Jacobi-preconditioned CG on the complement of ``1``.

    ``y`` is projected onto ``span(1)^perp`` first and every search direction
    is deflated, so the solution is orthogonal to ``1``. Hitting
    ``max_iter`` is not an error: the result carries ``converged=False`` and
    the residual that was achieved.
    """
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    if check:
        check_laplacian(L)
    y = np.asarray(y, dtype=np.float64)
    n = L.shape[0]
    if y.shape != (n,):
        raise ValueError(f"dimension mismatch: L is {L.shape}, y has shape {y.shape}")
    if max_iter is None:
        max_iter = max(1000, 10 * n)
    X, iters, rel = solve_block(L, y[None, :], tol, max_iter)
    return SolveResult(X[0], int(iters[0]), float(rel[0]), bool(rel[0] <= max(tol, MIN_TOL)))


def _grounded_factor(L: sp.csr_matrix):
    n = L.shape[0]
    check_dense_limit(n)
    Lg = L[1:, 1:].toarray()
    try:
        return sla.cho_factor(Lg, lower=True, check_finite=True)
    except sla.LinAlgError:
        raise DisconnectedGraphError("grounded Laplacian is singular; graph is disconnected") from None


def pinv_apply_exact(L: sp.csr_matrix, y) -> np.ndarray:
    """Exact ``L^+ y`` through a Cholesky factorization of the grounded Laplacian.

    Vertex 0 is grounded. The grounded solution is re-embedded with a zero
    in position 0 and then projected onto ``span(1)^perp``, which yields
    ``L^+ y`` for the projected right-hand side.
    """
    y = np.asarray(y, dtype=np.float64)
    n = L.shape[0]
    if y.shape != (n,):
        raise ValueError(f"dimension mismatch: L is {L.shape}, y has shape {y.shape}")
    if n == 1:
        return np.zeros(1)
    yp = y - y.mean()
    factor = _grounded_factor(L)
    x = np.zeros(n)
    x[1:] = sla.cho_solve(factor, yp[1:])
    return x - x.mean()


def pinv_dense(L: sp.csr_matrix) -> np.ndarray:
    """Dense ``L^+`` from the grounded inverse: ``J [[0, 0], [0, Lg^-1]] J`` with ``J`` the centering projector."""
    n = L.shape[0]
    if n == 1:
        return np.zeros((1, 1))
    factor = _grounded_factor(L)
    X = np.zeros((n, n))
    X[1:, 1:] = sla.cho_solve(factor, np.eye(n - 1))
    X = 0.5 * (X + X.T)
    X -= X.mean(axis=0, keepdims=True)
    X -= X.mean(axis=1, keepdims=True)
    return X

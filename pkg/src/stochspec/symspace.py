"""Half-vectorisation of symmetric matrices and the closed-loop second-moment operators.

Conventions: ``vec`` stacks columns; ``vech`` stacks the columns of the lower
triangle, so for n = 2 the order is ``x11, x21, x22``. The duplication matrix
``M`` satisfies ``vec(X) = M @ vech(X)`` for symmetric ``X``.

For a closed-loop drift matrix ``A`` and a noise-gain matrix ``N`` the two
operators acting on symmetric ``X`` are::

    discrete:    X -> A X A' + N X N'
    continuous:  X -> A X + X A' + N X N'

The reduced system (H, L, F) with ``u = alpha x`` and ``v = kv x`` uses
``A = H + alpha L + F kv`` and ``N = alpha I``; the general system
(A, B, Abar, Bbar) under ``U = K x`` uses ``A + B K`` and ``Abar + Bbar K``.
"""
from functools import lru_cache

import numpy as np

from .errors import NonSymmetric, ShapeMismatch
from .numerics import eigenvalues

__all__ = [
    "MODES",
    "sym_dim",
    "vech",
    "unvech",
    "duplication_matrix",
    "closed_loop",
    "apply_operator",
    "apply_operator_discrete",
    "apply_operator_continuous",
    "apply_operator_general",
    "operator_matrix",
    "operator_matrix_general",
    "lifted_operator_matrix",
    "spectrum",
]

MODES = ("discrete", "continuous")
SYM_TOL = 1e-12


def sym_dim(n):
    return n * (n + 1) // 2


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


@lru_cache(maxsize=None)
def _lower_index(n):
    # column-major walk of the lower triangle
    cols, rows = np.triu_indices(n)
    return rows, cols


def _as_square(X, name="X"):
    X = np.asarray(X)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {X.shape}")
    return X


def _symmetrize(X, name="X"):
    X = _as_square(X, name)
    scale = 1 + np.maximum(np.abs(X), np.abs(X.T))
    if np.any(np.abs(X - X.T) > SYM_TOL * scale):
        raise NonSymmetric(f"{name} is not symmetric (max asymmetry {np.abs(X - X.T).max():.3e})")
    return (X + X.T) / 2


def vech(X):
    """Stack the lower triangle of symmetric ``X`` column by column."""
    X = _symmetrize(X)
    rows, cols = _lower_index(X.shape[0])
    return X[rows, cols].copy()


def unvech(v, n=None):
    """Inverse of :func:`vech`."""
    v = np.asarray(v).ravel()
    if n is None:
        n = int(round((np.sqrt(8 * v.size + 1) - 1) / 2))
    if sym_dim(n) != v.size:
        raise ShapeMismatch(f"length {v.size} is not n(n+1)/2 for any n")
    rows, cols = _lower_index(n)
    X = np.zeros((n, n), dtype=v.dtype)
    X[rows, cols] = v
    X[cols, rows] = v
    return X


@lru_cache(maxsize=None)
def _duplication(n):
    rows, cols = _lower_index(n)
    M = np.zeros((n * n, sym_dim(n)))
    for k, (i, j) in enumerate(zip(rows, cols)):
        # column-major vec position of (i, j) is j*n + i
        M[j * n + i, k] = 1.0
        M[i * n + j, k] = 1.0
    M.flags.writeable = False
    return M


def duplication_matrix(n):
    """The ``n^2 x n(n+1)/2`` 0/1 matrix with ``vec(X) = M vech(X)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _duplication(n).copy()


@lru_cache(maxsize=None)
def _elimination(n):
    # (M'M)^{-1} M' ; M'M is diagonal with entries 1 (diagonal) or 2 (off-diagonal)
    M = _duplication(n)
    P = M.T / np.diag(M.T @ M)[:, None]
    P.flags.writeable = False
    return P


def closed_loop(H, L, F, alpha, kv):
    """``H + alpha L + F kv`` with shape checks (single-column ``F``)."""
    H = _as_square(np.asarray(H, dtype=float), "H")
    L = _as_square(np.asarray(L, dtype=float), "L")
    n = H.shape[0]
    if L.shape != H.shape:
        raise ShapeMismatch(f"L must be {n}x{n}, got {L.shape}")
    F = np.asarray(F, dtype=float)
    if F.size != n:
        raise ShapeMismatch(f"F must have {n} entries (single column), got shape {F.shape}")
    kv = np.asarray(kv, dtype=float)
    if kv.size != n:
        raise ShapeMismatch(f"gain must have {n} entries, got shape {kv.shape}")
    return H + alpha * L + np.outer(F.ravel(), kv.ravel())


def _general_closed_loop(A, B, Abar, Bbar, K):
    A = _as_square(np.asarray(A, dtype=float), "A")
    Abar = _as_square(np.asarray(Abar, dtype=float), "Abar")
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Bbar = np.atleast_2d(np.asarray(Bbar, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    n = A.shape[0]
    if Abar.shape != A.shape or B.shape[0] != n or Bbar.shape != B.shape:
        raise ShapeMismatch(
            f"incompatible shapes A{A.shape} B{B.shape} Abar{Abar.shape} Bbar{Bbar.shape}")
    if K.shape != (B.shape[1], n):
        raise ShapeMismatch(f"K must be {B.shape[1]}x{n}, got {K.shape}")
    return A + B @ K, Abar + Bbar @ K


def apply_operator(drift, noise, X, mode="discrete"):
    """Apply the second-moment operator with drift ``drift`` and noise gain ``noise``."""
    _check_mode(mode)
    X = _symmetrize(X)
    if X.shape != drift.shape:
        raise ShapeMismatch(f"X is {X.shape}, system is {drift.shape}")
    if mode == "discrete":
        Y = drift @ X @ drift.T + noise @ X @ noise.T
    else:
        Y = drift @ X + X @ drift.T + noise @ X @ noise.T
    return (Y + Y.T) / 2


def apply_operator_discrete(H, L, F, alpha, kv, X):
    A = closed_loop(H, L, F, alpha, kv)
    return apply_operator(A, alpha * np.eye(A.shape[0]), X, "discrete")


def apply_operator_continuous(H, L, F, alpha, tv, X):
    A = closed_loop(H, L, F, alpha, tv)
    return apply_operator(A, alpha * np.eye(A.shape[0]), X, "continuous")


def apply_operator_general(A, B, Abar, Bbar, K, X, mode="discrete"):
    """Operator of the state- and control-dependent noise system under ``U = K x``."""
    drift, noise = _general_closed_loop(A, B, Abar, Bbar, K)
    return apply_operator(drift, noise, X, mode)


def lifted_operator_matrix(drift, noise, mode="discrete"):
    """Matrix ``T`` on vech-coordinates: ``T vech(X) = vech(op(X))``."""
    _check_mode(mode)
    n = drift.shape[0]
    M = _duplication(n)
    P = _elimination(n)
    if mode == "discrete":
        big = np.kron(drift, drift) + np.kron(noise, noise)
    else:
        eye = np.eye(n)
        big = np.kron(eye, drift) + np.kron(drift, eye) + np.kron(noise, noise)
    return P @ big @ M


def operator_matrix(H, L, F, alpha, kv, mode="discrete"):
    """vech-coordinate matrix of the reduced-system operator for gains ``(alpha I, kv)``."""
    A = closed_loop(H, L, F, alpha, kv)
    return lifted_operator_matrix(A, alpha * np.eye(A.shape[0]), mode)


def operator_matrix_general(A, B, Abar, Bbar, K, mode="discrete"):
    drift, noise = _general_closed_loop(A, B, Abar, Bbar, K)
    return lifted_operator_matrix(drift, noise, mode)


def spectrum(T):
    """Eigenvalues of an operator matrix, canonically ordered."""
    T = _as_square(T, "T")
    m = T.shape[0]
    n = int(round((np.sqrt(8 * m + 1) - 1) / 2))
    if sym_dim(n) != m:
        raise ShapeMismatch(f"operator matrix size {m} is not n(n+1)/2")
    return eigenvalues(T)

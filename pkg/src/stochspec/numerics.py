"""Polynomial and eigen-structure helpers shared by design and learning."""
import numpy as np

from .errors import EigenFailure, NotAnEigenvalue, NotConjugateClosed

__all__ = [
    "char_poly",
    "companion",
    "poly_from_roots",
    "eigenvalues",
    "eigenvector",
    "sort_spectrum",
    "pair_conjugates",
    "match_multisets",
]


def char_poly(A):
    """Characteristic polynomial coefficients by the Faddeev-LeVerrier recurrence.

    Returns ``[a_1, ..., a_n]`` with ``det(lam I - A) = lam^n + a_1 lam^(n-1) + ... + a_n``.
    No eigenvalues are computed, so the result is a deterministic polynomial
    function of the entries of ``A`` (exact for integer matrices up to
    rounding of the final divisions).
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"char_poly needs a square matrix, got shape {A.shape}")
    n = A.shape[0]
    coeffs = np.empty(n, dtype=np.result_type(A.dtype, float))
    # M_k = A M_{k-1} + c_{k-1} I, c_k = -tr(A M_k) / k
    M = np.zeros_like(A, dtype=coeffs.dtype)
    c = 1.0
    for k in range(1, n + 1):
        M = A @ M
        M[np.diag_indices(n)] += c
        c = -np.trace(A @ M) / k
        coeffs[k - 1] = c
    return coeffs


def companion(a):
    """Companion matrix of the monic polynomial with coefficients ``[a_1, ..., a_n]``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    n = a.size
    C = np.zeros((n, n))
    C[0, :] = -a
    if n > 1:
        C[1:, :-1] = np.eye(n - 1)
    return C


def pair_conjugates(values, tol=1e-9):
    """Check that a multiset of complex numbers is closed under conjugation.

    Greedy pairing: every value with ``|Im| > tol`` must have a partner within
    ``tol`` (relative to ``1 + |z|``) of its conjugate. Raises
    ``NotConjugateClosed`` otherwise.
    """
    vals = [complex(v) for v in values]
    unused = [v for v in vals if abs(v.imag) > tol * (1 + abs(v))]
    while unused:
        z = unused.pop(0)
        target = z.conjugate()
        dists = [abs(w - target) for w in unused]
        if not dists:
            raise NotConjugateClosed(f"{z} has no conjugate partner")
        k = int(np.argmin(dists))
        if dists[k] > tol * (1 + abs(z)):
            raise NotConjugateClosed(f"{z} has no conjugate partner (closest {unused[k]})")
        unused.pop(k)


def poly_from_roots(roots, tol=1e-9):
    """Coefficients ``[a_{n-1}, ..., a_0]`` of ``prod(beta - lam_i)``.

    The roots must form a conjugate-closed multiset; the product is expanded
    in complex arithmetic and the (tiny) imaginary residue is dropped after
    checking it is below ``1e-10`` relative to each coefficient.
    """
    roots = [complex(r) for r in np.atleast_1d(roots)]
    pair_conjugates(roots, tol=tol)
    p = np.array([1.0 + 0j])
    for r in roots:
        p = np.convolve(p, np.array([1.0, -r]))
    resid = np.abs(p.imag)
    if np.any(resid > 1e-10 * (1 + np.abs(p.real))):
        raise NotConjugateClosed(f"imaginary residue {resid.max():.3e} in coefficients")
    return p.real[1:].copy()


def sort_spectrum(values):
    """Canonical order: by real part, then imaginary part."""
    vals = np.asarray(values, dtype=complex).ravel()
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def eigenvalues(A):
    """Eigenvalues of a dense real matrix in canonical order.

    Backed by LAPACK's ``geev`` (Hessenberg reduction + shifted QR) through
    :func:`numpy.linalg.eigvals`.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"eigenvalues needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    try:
        w = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    return sort_spectrum(w)


def eigenvector(A, lam, tol=1e-8):
    """Unit eigenvector of ``A`` for eigenvalue ``lam``.

    Taken as the right singular vector of ``A - lam I`` for its smallest
    singular value, with phase fixed so the largest entry is real positive.
    Raises ``NotAnEigenvalue`` when ``||A xi - lam xi|| > tol``.
    """
    A = np.asarray(A)
    n = A.shape[0]
    lam = complex(lam)
    if lam.imag == 0 and np.isrealobj(A):
        # real eigenvalue of a real matrix: keep the null vector real
        lam_ = lam.real
        shifted = A - lam_ * np.eye(n)
    else:
        lam_ = lam
        shifted = A.astype(complex) - lam * np.eye(n)
    _, _, vh = np.linalg.svd(shifted)
    xi = vh[-1].conj()
    k = int(np.argmax(np.abs(xi)))
    xi = xi * (abs(xi[k]) / xi[k])
    xi = xi / np.linalg.norm(xi)
    resid = np.linalg.norm(A @ xi - lam_ * xi)
    if resid > tol:
        raise NotAnEigenvalue(f"{lam} is not an eigenvalue (residual {resid:.3e})")
    return xi


def match_multisets(a, b, tol=1e-6):
    """Greedy nearest-neighbour matching between two multisets of complex numbers.

    Returns ``(ok, errors)`` where ``errors[i]`` is the distance from ``a[i]``
    to the element of ``b`` it was paired with. ``ok`` is False when sizes
    differ or some pair is further apart than ``tol``.
    """
    a = list(np.asarray(a, dtype=complex).ravel())
    b = list(np.asarray(b, dtype=complex).ravel())
    if len(a) != len(b):
        return False, np.full(len(a), np.inf)
    errors = np.empty(len(a))
    remaining = b[:]
    for i, z in enumerate(a):
        d = [abs(z - w) for w in remaining]
        k = int(np.argmin(d))
        errors[i] = d[k]
        remaining.pop(k)
    return bool(np.all(errors <= tol)), errors

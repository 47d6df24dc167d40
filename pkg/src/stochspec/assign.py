"""Model-based alpha-spectrum assignment.

With ``u = alpha x`` the closed loop of the reduced system has drift
``G + F kv`` (``G = H + alpha L``) and noise gain ``alpha I``. If ``kv``
places the eigenvalues of ``G + F kv`` at ``lam_1..lam_n`` then the
operator spectrum is ``{lam_i lam_j + alpha^2}`` (discrete) or
``{lam_i + lam_j + alpha^2}`` (continuous) over ``j >= i``, so the design
problem reduces to single-input pole placement, solved here with
Ackermann's formula.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadShape,
    DefectiveEigenstructure,
    NotConjugateClosed,
    NotControllable,
    RankDeficient,
    ShapeMismatch,
    SpecInvalid,
)
from .model import AssignmentSpec, GainPair, PlantParams
from .numerics import eigenvalues, eigenvector, match_multisets, poly_from_roots, sort_spectrum
from .symspace import apply_operator

__all__ = [
    "target_spectrum",
    "controllability_matrix",
    "controllability_rcond",
    "is_controllable",
    "ackermann_gain",
    "design",
    "ReducedSystem",
    "reduce_general",
    "lift_gain",
    "Witness",
    "WitnessSet",
    "witness_set",
]

RCOND_MIN = 1e-12


def target_spectrum(spec):
    """Desired operator spectrum ``{lam_i lam_j + a^2}`` / ``{lam_i + lam_j + a^2}``, ``j >= i``.

    Multiplicities are kept even when two pairs give the same value.
    """
    if not isinstance(spec, AssignmentSpec):
        raise SpecInvalid("expected an AssignmentSpec")
    lams = spec.lambdas
    a2 = spec.alpha ** 2
    out = []
    for i in range(len(lams)):
        for j in range(i, len(lams)):
            if spec.mode == "discrete":
                out.append(lams[i] * lams[j] + a2)
            else:
                out.append(lams[i] + lams[j] + a2)
    return sort_spectrum(out)


def _pair(G, F):
    G = np.atleast_2d(np.asarray(G, dtype=float))
    F = np.asarray(F, dtype=float)
    n = G.shape[0]
    if G.shape != (n, n):
        raise ShapeMismatch(f"G must be square, got {G.shape}")
    if F.size != n:
        raise ShapeMismatch(f"F must be a single column of length {n}, got {F.shape}")
    return G, F.reshape(n, 1)


def controllability_matrix(G, F):
    """``[F, G F, ..., G^{n-1} F]``."""
    G, F = _pair(G, F)
    cols = [F]
    for _ in range(G.shape[0] - 1):
        cols.append(G @ cols[-1])
    return np.hstack(cols)


def controllability_rcond(G, F):
    C = controllability_matrix(G, F)
    s = np.linalg.svd(C, compute_uv=False)
    return 0.0 if s[0] == 0 else float(s[-1] / s[0])


def is_controllable(G, F):
    return controllability_rcond(G, F) > RCOND_MIN


def ackermann_gain(G, F, lambdas):
    """Row gain ``kv`` with ``eig(G + F kv) = lambdas``.

    Evaluated as ``a D + b G^n`` where ``b = -e_n' [F GF ... G^{n-1}F]^{-1}``,
    ``D`` stacks ``b G^{n-1}, ..., b G, b`` and ``a = [a_{n-1}, ..., a_0]``
    are the coefficients of ``prod(beta - lam_i)``.
    """
    G, F = _pair(G, F)
    n = G.shape[0]
    lambdas = np.atleast_1d(lambdas)
    if lambdas.size != n:
        raise SpecInvalid(f"need {n} desired eigenvalues, got {lambdas.size}")
    try:
        a = poly_from_roots(lambdas)
    except NotConjugateClosed as exc:
        raise SpecInvalid(str(exc)) from exc
    rcond = controllability_rcond(G, F)
    if not rcond > RCOND_MIN:
        raise NotControllable(f"(G, F) is not controllable (rcond {rcond:.3e})", rcond=rcond)
    C = controllability_matrix(G, F)
    e_n = np.zeros(n)
    e_n[-1] = 1.0
    b = -np.linalg.solve(C.T, e_n)
    # rows b G^{n-1}, ..., b G, b
    D = np.empty((n, n))
    row = b.copy()
    for k in range(n - 1, -1, -1):
        D[k] = row
        row = row @ G
    # row now equals b G^n
    return a @ D + row


def design(params, spec):
    """Gain pair ``(alpha, kv)`` assigning the operator spectrum to ``target_spectrum(spec)``."""
    if not isinstance(params, PlantParams):
        params = PlantParams(*params)
    if spec.n != params.n:
        raise SpecInvalid(f"spec has {spec.n} eigenvalues, plant has n={params.n}")
    kv = ackermann_gain(params.G(spec.alpha), params.F, spec.lambdas)
    return GainPair(spec.alpha, kv)


@dataclass(frozen=True)
class ReducedSystem:
    """``(H, L, F)`` obtained from ``(A, B, Abar, Bbar)`` through ``Bbar Q = [I 0]``."""

    H: np.ndarray
    L: np.ndarray
    F: np.ndarray
    Q: np.ndarray
    Abar: np.ndarray

    @property
    def params(self):
        return PlantParams(self.H, self.L, self.F)


def reduce_general(A, B, Abar, Bbar):
    """Rewrite ``x+ = A x + B U + (Abar x + Bbar U) w`` in the ``(H, L, F)`` form.

    ``Bbar`` must be ``n x (n+1)`` with rank ``n``. ``Q = [Bbar^+ | N]`` with
    ``N`` the unit null vector of ``Bbar`` (sign fixed so its largest entry is
    positive). Then ``B Q = [L F]`` and ``H = A - L Abar``; the original input
    is recovered as ``U = Q [q; v]`` with ``q = u - Abar x``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Abar = np.atleast_2d(np.asarray(Abar, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Bbar = np.atleast_2d(np.asarray(Bbar, dtype=float))
    n = A.shape[0]
    if A.shape != (n, n) or Abar.shape != (n, n):
        raise ShapeMismatch(f"A{A.shape} and Abar{Abar.shape} must be {n}x{n}")
    if Bbar.shape != (n, n + 1):
        raise BadShape(f"Bbar must be {n}x{n + 1}, got {Bbar.shape}")
    if B.shape != (n, n + 1):
        raise ShapeMismatch(f"B must be {n}x{n + 1}, got {B.shape}")
    u, s, vh = np.linalg.svd(Bbar)
    if s[0] == 0 or s[-1] / s[0] <= RCOND_MIN:
        raise RankDeficient(f"Bbar has rank < {n}")
    null = vh[-1]
    null = null * np.sign(null[np.argmax(np.abs(null))])
    right_inv = Bbar.T @ np.linalg.inv(Bbar @ Bbar.T)
    Q = np.column_stack([right_inv, null])
    sq = np.linalg.svd(Q, compute_uv=False)
    if sq[-1] / sq[0] <= RCOND_MIN:
        raise RankDeficient("Q is numerically singular")
    BQ = B @ Q
    L, F = BQ[:, :n], BQ[:, n:]
    H = A - L @ Abar
    return ReducedSystem(H, L, F, Q, Abar)


def lift_gain(gain, Abar, Q=None):
    """Gain of the general system from a reduced-system gain pair.

    Returns the stack ``[alpha I - Abar; kv]``. This is the input ``[q; v]``
    in the coordinates of the reduced system; pass ``Q`` from
    :func:`reduce_general` to get the gain ``Q [alpha I - Abar; kv]`` acting on
    the original input ``U`` (the two coincide when ``Q = I``).
    """
    Abar = np.atleast_2d(np.asarray(Abar, dtype=float))
    n = Abar.shape[0]
    if Abar.shape != (n, n):
        raise ShapeMismatch(f"Abar must be square, got {Abar.shape}")
    kv = np.asarray(gain.kv, dtype=float).ravel()
    if kv.size != n:
        raise ShapeMismatch(f"kv has {kv.size} entries, Abar is {n}x{n}")
    K = np.vstack([gain.alpha * np.eye(n) - Abar, kv[None, :]])
    if Q is not None:
        Q = np.asarray(Q, dtype=float)
        if Q.shape != (n + 1, n + 1):
            raise ShapeMismatch(f"Q must be {n + 1}x{n + 1}, got {Q.shape}")
        K = Q @ K
    return K


@dataclass(frozen=True)
class Witness:
    """One eigen-pair ``op(X) = mu X`` of the operator, ``X = xi_i xi_j' + xi_j xi_i'``.

    ``X`` is complex symmetric in general. ``real_parts`` holds real symmetric
    representatives: ``(X,)`` when ``mu`` is real, otherwise ``(Re X, Im X)``,
    which span a real invariant plane of the operator.
    """

    i: int
    j: int
    mu: complex
    X: np.ndarray

    @property
    def real_parts(self):
        R, I = self.X.real, self.X.imag
        scale = np.linalg.norm(self.X)
        if np.linalg.norm(I) <= 1e-12 * scale:
            return (R,)
        return (R, I)

    def residual(self, drift, noise, mode="discrete"):
        """Relative residual ``||op(X) - mu X|| / ||X||`` (complex and realified, worst of both)."""
        X = self.X
        res = np.linalg.norm(apply_operator(drift, noise, X, mode) - self.mu * X) / np.linalg.norm(X)
        parts = self.real_parts
        if len(parts) == 1:
            R = parts[0]
            r2 = np.linalg.norm(apply_operator(drift, noise, R, mode) - self.mu.real * R)
            r2 /= np.linalg.norm(R)
        else:
            R, I = parts
            a, b = self.mu.real, self.mu.imag
            scale = np.hypot(np.linalg.norm(R), np.linalg.norm(I))
            rR = apply_operator(drift, noise, R, mode) - (a * R - b * I)
            rI = apply_operator(drift, noise, I, mode) - (b * R + a * I)
            r2 = np.hypot(np.linalg.norm(rR), np.linalg.norm(rI)) / scale
        return float(max(res, r2))


@dataclass(frozen=True)
class WitnessSet:
    witnesses: tuple
    drift: np.ndarray
    noise: np.ndarray
    mode: str

    def __len__(self):
        return len(self.witnesses)

    def __iter__(self):
        return iter(self.witnesses)

    def max_residual(self):
        return max(w.residual(self.drift, self.noise, self.mode) for w in self.witnesses)


def _closed_loop_eigvecs(Acl, lambdas, tol):
    """Eigenvectors of ``Acl`` for each requested eigenvalue; conjugate pairs kept conjugate."""
    n = Acl.shape[0]
    actual = eigenvalues(Acl)
    ok, _ = match_multisets(lambdas, actual, tol=1e-6 * (1 + np.abs(actual).max()))
    if not ok:
        raise DefectiveEigenstructure("closed loop does not have the requested eigenvalues")
    scale = max(1.0, np.linalg.norm(Acl, 2))
    vecs = [None] * n
    for k, lam in enumerate(lambdas):
        if vecs[k] is not None:
            continue
        cluster = [m for m in range(n) if abs(lambdas[m] - lam) <= 1e-6 * (1 + abs(lam))]
        if len(cluster) == 1:
            # closest computed eigenvalue keeps the residual at rounding level
            mu = actual[np.argmin(np.abs(actual - lam))]
            if abs(lam.imag) <= 1e-12 * (1 + abs(lam)):
                mu = complex(mu.real)
            basis = [eigenvector(Acl, mu, tol=tol * scale)]
        else:
            m = len(cluster)
            shifted = Acl - lam * np.eye(n) if lam.imag else Acl - lam.real * np.eye(n)
            _, s, vh = np.linalg.svd(shifted)
            geo = int(np.sum(s <= tol * scale))
            if geo < m:
                raise DefectiveEigenstructure(
                    f"eigenvalue {lam} has algebraic multiplicity {m} "
                    f"but geometric multiplicity {geo}")
            basis = list(vh[-m:].conj())
        for m, xi in zip(cluster, basis):
            vecs[m] = xi
        if lam.imag != 0:
            partners = [m for m in range(n) if vecs[m] is None
                        and abs(lambdas[m] - np.conj(lam)) <= 1e-6 * (1 + abs(lam))]
            for m, xi in zip(partners, basis):
                vecs[m] = xi.conj()
    return vecs


def witness_set(G, F, kv, lambdas, alpha=0.0, mode="discrete", tol=1e-8):
    """Eigen-matrices of the closed-loop operator built from closed-loop eigenvectors.

    For every ``j >= i`` returns ``X = xi_i xi_j' + xi_j xi_i'`` paired with
    ``mu = lam_i lam_j + alpha^2`` (discrete) or ``lam_i + lam_j + alpha^2``
    (continuous). Raises ``DefectiveEigenstructure`` when an eigenvalue is
    repeated, since a single-input closed loop then has a one-dimensional
    eigenspace and the witnesses are not independent.
    """
    G, F = _pair(G, F)
    n = G.shape[0]
    kv = np.asarray(kv, dtype=float).ravel()
    lambdas = [complex(z) for z in np.atleast_1d(lambdas)]
    if len(lambdas) != n or kv.size != n:
        raise ShapeMismatch("lambdas and kv must have n entries")
    Acl = G + F @ kv[None, :]
    noise = alpha * np.eye(n)
    vecs = _closed_loop_eigvecs(Acl, lambdas, tol)
    out = []
    a2 = alpha ** 2
    for i in range(n):
        for j in range(i, n):
            X = np.outer(vecs[i], vecs[j]) + np.outer(vecs[j], vecs[i])
            if np.isrealobj(X) or np.all(X.imag == 0):
                X = np.real(X)
            if mode == "discrete":
                mu = lambdas[i] * lambdas[j] + a2
            else:
                mu = lambdas[i] + lambdas[j] + a2
            out.append(Witness(i, j, complex(mu), X))
    return WitnessSet(tuple(out), Acl, noise, mode)

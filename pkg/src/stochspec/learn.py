"""Model-free gain learning by stochastic approximation with expanding truncations.

The learner only sees noisy one-step observations ``Y(K) = G + F K + noise``
returned by a plant. For single-column ``F`` the characteristic-polynomial
coefficients ``a(K)`` of ``G + F K`` are affine in ``K``::

    a(K) = a(0) + K Jac

Probing the fixed gains ``L_0, ..., L_n`` and differencing consecutive
coefficient vectors estimates ``Jac`` row by row; the running average of
those estimates is ``C``. The recursion then drives ``a(K)`` to the target
coefficients, restarting from ``K_init`` with a larger bound each time an
iterate leaves the current ball.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import IndexSearchExhausted, NonFinite, SpecInvalid
from .numerics import char_poly, poly_from_roots

__all__ = [
    "probe_family",
    "check_probe_family",
    "coeffs_of_observation",
    "probe_round",
    "update_average",
    "is_nonsingular",
    "LearnerState",
    "advance_index",
    "Schedule",
    "sa_step",
    "LearnConfig",
    "TraceRecord",
    "LearnReport",
    "run_learning",
]


def probe_family(n):
    """Probe gains ``L_0..L_n``: ``L_i`` has ones in its first ``i`` entries.

    Consecutive differences are the standard basis vectors, so row ``i`` of a
    probe round is exactly row ``i`` of the coefficient-map Jacobian when
    noise is absent.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.tril(np.ones((n + 1, n)), -1)


def check_probe_family(family):
    family = np.asarray(family, dtype=float)
    n = family.shape[1]
    if family.shape != (n + 1, n):
        raise ValueError(f"family must have shape (n+1, n), got {family.shape}")
    if np.any(family[0] != 0):
        raise ValueError("L_0 must be the zero row")
    diffs = np.diff(family, axis=0)
    if np.linalg.matrix_rank(diffs) < n:
        raise ValueError("probe differences are linearly dependent")
    return family


def _observe(plant):
    # discrete plants expose observe_X1, continuous ones observe_Y1
    fn = getattr(plant, "observe_X1", None) or getattr(plant, "observe_Y1")
    return fn


def coeffs_of_observation(obs):
    """``[a_1, ..., a_n]`` of ``det(lam I - Y)`` for an observation (or a bare matrix)."""
    Y = getattr(obs, "Y", obs)
    return char_poly(np.atleast_2d(Y))


def probe_round(plant, alpha, family):
    """One probing round: ``n + 1`` fresh observations, ``n`` stacked coefficient differences."""
    observe = _observe(plant)
    coeffs = np.array([char_poly(observe(alpha, L).Y) for L in family])
    return np.diff(coeffs, axis=0)


def update_average(C_prev, A_new, j):
    """``C(j+1) = j/(j+1) C(j) + A(j+1)/(j+1)``."""
    if j < 0:
        raise ValueError("j must be >= 0")
    return (j / (j + 1)) * np.asarray(C_prev) + np.asarray(A_new) / (j + 1)


def is_nonsingular(C, tol=1e-12):
    """``|det C| > tol * (1 + ||C||^n)``, a scale-aware stand-in for ``det C != 0``."""
    C = np.atleast_2d(C)
    n = C.shape[0]
    return abs(np.linalg.det(C)) > tol * (1 + np.linalg.norm(C, 2) ** n)


@dataclass
class LearnerState:
    """Mutable bookkeeping of one learning run.

    ``j`` counts probe rounds over the whole run and ``C`` is the average of
    all of them, so the Jacobian estimate keeps improving across restarts.
    ``J`` is the round at which the current estimate was accepted.
    """

    n: int
    p: int = 0
    j: int = 0
    s: int = 0
    J: int = 0
    C: np.ndarray = None
    K: np.ndarray = None
    K_init: np.ndarray = None
    bound: float = 0.0
    observations: int = 0

    def __post_init__(self):
        if self.C is None:
            self.C = np.zeros((self.n, self.n))
        if self.K_init is None:
            self.K_init = np.zeros(self.n)
        if self.K is None:
            self.K = np.array(self.K_init, dtype=float)


def advance_index(state, plant, alpha, family, cap=10_000, det_tol=1e-12):
    """Probe until the running average ``C`` is nonsingular; set ``J`` to that round.

    At least one new round is always taken, so ``J`` increases strictly.
    Raises ``IndexSearchExhausted`` after ``cap`` rounds without success.
    """
    start = state.J
    while True:
        A = probe_round(plant, alpha, family)
        state.observations += len(family)
        state.C = update_average(state.C, A, state.j)
        state.j += 1
        if is_nonsingular(state.C, det_tol):
            state.J = state.j
            return state
        if state.j - start >= cap:
            raise IndexSearchExhausted(
                f"averaged difference matrix still singular after {cap} probe rounds")


@dataclass(frozen=True)
class Schedule:
    """``value(k) = offset + scale * k**exponent``.

    Used for step sizes (``scale / s``: ``Schedule(scale=1, exponent=-1)``) and
    truncation bounds (``M(p) = p``: ``Schedule()``).
    """

    scale: float = 1.0
    exponent: float = 1.0
    offset: float = 0.0

    def __call__(self, k):
        return self.offset + self.scale * k ** self.exponent

    def check_step_size(self):
        """Positive, ``sum = inf`` and ``sum^r < inf`` for some ``r`` in ``(1, 2]``."""
        if self.offset != 0 or self.scale <= 0 or not (-1 <= self.exponent < -0.5):
            raise SpecInvalid(
                "step sizes must be scale * s**exponent with scale > 0 and -1 <= exponent < -1/2")

    def check_bound(self):
        """Strictly increasing, unbounded and positive for ``k >= 1``."""
        if self.scale <= 0 or self.exponent <= 0 or self(1) <= 0:
            raise SpecInvalid("truncation bounds must increase without limit and be positive")

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: float(v) for k, v in d.items()})

    def to_dict(self):
        return {"scale": self.scale, "exponent": self.exponent, "offset": self.offset}


HARMONIC = Schedule(scale=1.0, exponent=-1.0)
LINEAR = Schedule()


def _direction(C, kind):
    if kind == "inverse":
        return np.linalg.inv(C)
    if kind == "direct":
        return np.asarray(C)
    raise ValueError(f"unknown direction {kind!r}")


def sa_step(K, s, a_obs, a_target, C, beta=HARMONIC, direction="inverse"):
    """``K' = K - beta(s) (a_obs - a_target) D`` with ``D = C^{-1}`` (or ``C`` for ``direction='direct'``).

    ``beta`` is a schedule or a fixed step size.
    """
    step = beta(s) if callable(beta) else float(beta)
    D = _direction(C, direction)
    return np.asarray(K, dtype=float) - step * (np.asarray(a_obs) - np.asarray(a_target)) @ D


@dataclass(frozen=True)
class TraceRecord:
    p: int
    j: int
    s: int
    K: np.ndarray
    delta_norm: float


@dataclass
class LearnConfig:
    """Learner settings. Defaults: ``eps = 1e-8``, ``beta(s) = 1/s``, ``M(p) = p``."""

    eps: float = 1e-8
    beta: Schedule = HARMONIC
    bound: Schedule = LINEAR
    K_init: Optional[np.ndarray] = None
    p_max: int = 100_000
    s_max: int = 1_000_000
    index_cap: int = 10_000
    det_tol: float = 1e-12
    direction: str = "inverse"
    keep_trace: bool = True

    def validate(self):
        if not self.eps > 0:
            raise SpecInvalid("eps must be > 0")
        self.beta.check_step_size()
        self.bound.check_bound()
        if self.direction not in ("inverse", "direct"):
            raise SpecInvalid(f"direction must be 'inverse' or 'direct', got {self.direction!r}")
        for name in ("p_max", "s_max", "index_cap"):
            if getattr(self, name) < 1:
                raise SpecInvalid(f"{name} must be >= 1")


@dataclass
class LearnReport:
    gain: np.ndarray
    p_final: int
    observations: int
    converged: bool
    truncations: int
    J: int
    C: np.ndarray
    trace: list = field(default_factory=list)
    reason: str = ""
    steps: int = 0

    @property
    def last_delta(self):
        return self.trace[-1].delta_norm if self.trace else float("nan")


def run_learning(plant, spec, cfg=None, sink: Optional[Callable] = None):
    """Learn ``kv`` so that ``G + F kv`` has the eigenvalues of ``spec``.

    Each outer round ``p``: refresh the Jacobian estimate (:func:`advance_index`),
    restart from ``K_init`` and iterate :func:`sa_step` on one fresh
    observation per step. Success when the step's infinity-norm drops below
    ``eps``. If a candidate iterate leaves the ball of radius ``M(p+1)``
    (Euclidean norm) it is discarded and the next outer round starts.

    ``sink``, if given, is called with every :class:`TraceRecord`.
    """
    cfg = cfg or LearnConfig()
    cfg.validate()
    n = plant.n
    if spec.n != n:
        raise SpecInvalid(f"spec has {spec.n} eigenvalues, plant has n={n}")
    alpha = spec.alpha
    a_target = poly_from_roots(spec.lambdas)
    family = probe_family(n)
    observe = _observe(plant)
    K_init = np.zeros(n) if cfg.K_init is None else np.asarray(cfg.K_init, dtype=float).ravel()
    if K_init.size != n:
        raise SpecInvalid(f"K_init must have {n} entries")

    state = LearnerState(n, K_init=K_init)
    trace = []
    truncations = 0
    steps = 0

    def report(converged, reason):
        return LearnReport(state.K.copy(), state.p, state.observations, converged,
                           truncations, state.J, state.C.copy(), trace, reason, steps)

    while state.p < cfg.p_max:
        advance_index(state, plant, alpha, family, cfg.index_cap, cfg.det_tol)
        D = _direction(state.C, cfg.direction)
        state.bound = cfg.bound(state.p + 1)
        state.K = K_init.copy()
        K = state.K
        for s in range(1, cfg.s_max + 1):
            state.s = s
            a_obs = char_poly(observe(alpha, K).Y)
            state.observations += 1
            cand = K - cfg.beta(s) * ((a_obs - a_target) @ D)
            if not np.all(np.isfinite(cand)):
                raise NonFinite(f"non-finite iterate at p={state.p}, s={s}")
            if np.linalg.norm(cand) > state.bound:
                truncations += 1
                break
            delta = float(np.max(np.abs(cand - K)))
            steps += 1
            K = cand
            state.K = K
            rec = TraceRecord(state.p, state.j, s, K, delta) if (cfg.keep_trace or sink) else None
            if cfg.keep_trace:
                trace.append(rec)
            if sink is not None:
                sink(rec)
            if delta < cfg.eps:
                return report(True, "step below eps")
        else:
            return report(False, f"s_max={cfg.s_max} reached without convergence")
        state.p += 1
    return report(False, f"p_max={cfg.p_max} reached without convergence")

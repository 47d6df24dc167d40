"""Containers for system matrices, assignment targets and gains."""
from dataclasses import dataclass, field

import numpy as np

from .errors import NotConjugateClosed, ShapeMismatch, SpecInvalid
from .numerics import pair_conjugates
from .symspace import MODES

__all__ = ["PlantParams", "AssignmentSpec", "GainPair"]


def _square(x, name):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] != x.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got {x.shape}")
    return x


@dataclass(frozen=True)
class PlantParams:
    """Matrices of ``x+ = H x + L u + F v + u w`` (or its SDE analogue).

    ``F`` is stored as an ``n x 1`` column.
    """

    H: np.ndarray
    L: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        H = _square(self.H, "H")
        L = _square(self.L, "L")
        F = np.asarray(self.F, dtype=float).reshape(-1, 1)
        n = H.shape[0]
        if L.shape != (n, n) or F.shape != (n, 1):
            raise ShapeMismatch(f"H{H.shape}, L{L.shape}, F{F.shape} are not conformable")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "F", F)

    @property
    def n(self):
        return self.H.shape[0]

    def G(self, alpha):
        return self.H + alpha * self.L


@dataclass(frozen=True)
class AssignmentSpec:
    """Target of an alpha-spectrum assignment.

    ``lambdas`` must be conjugate-closed in discrete mode and real in
    continuous mode.
    """

    mode: str
    alpha: float
    lambdas: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.mode not in MODES:
            raise SpecInvalid(f"mode must be one of {MODES}, got {self.mode!r}")
        lams = tuple(complex(z) for z in np.atleast_1d(self.lambdas))
        if not lams:
            raise SpecInvalid("at least one desired eigenvalue is required")
        if not np.all(np.isfinite(np.array(lams))) or not np.isfinite(self.alpha):
            raise SpecInvalid("alpha and lambdas must be finite")
        if self.mode == "continuous":
            bad = [z for z in lams if abs(z.imag) > 1e-12 * (1 + abs(z))]
            if bad:
                raise SpecInvalid(f"continuous mode needs real eigenvalues, got {bad}")
            lams = tuple(complex(z.real) for z in lams)
        else:
            try:
                pair_conjugates(lams)
            except NotConjugateClosed as exc:
                raise SpecInvalid(f"desired eigenvalues are not conjugate-closed: {exc}") from exc
        object.__setattr__(self, "lambdas", lams)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n(self):
        return len(self.lambdas)


@dataclass(frozen=True)
class GainPair:
    """``u = alpha x`` and ``v = kv x``."""

    alpha: float
    kv: np.ndarray

    def __post_init__(self):
        kv = np.asarray(self.kv, dtype=float).ravel()
        if not np.all(np.isfinite(kv)) or not np.isfinite(self.alpha):
            raise ValueError("gain entries must be finite")
        object.__setattr__(self, "kv", kv)
        object.__setattr__(self, "alpha", float(self.alpha))

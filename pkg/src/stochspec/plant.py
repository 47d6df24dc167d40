"""Seeded simulators of the closed loop under ``u = alpha x``, ``v = kv x``.

These classes are the only place the learner's plant matrices live; the
learner sees nothing but :class:`Observation` objects.

Random numbers come from a Philox (counter-based) generator seeded
explicitly per plant, so a given seed and call sequence reproduces the
observation stream bit for bit.
"""
from dataclasses import dataclass

import numpy as np

from .model import PlantParams

__all__ = ["Observation", "DiscretePlant", "ContinuousPlant", "make_rng", "DISTRIBUTIONS"]

DISTRIBUTIONS = ("gaussian", "rademacher")


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


def _draw(rng, distribution, variance, size):
    scale = np.sqrt(variance)
    if distribution == "gaussian":
        return rng.normal(0.0, scale, size)
    # +-1 with equal probability, scaled to the same variance
    return scale * (2.0 * rng.integers(0, 2, size) - 1.0)


@dataclass(frozen=True)
class Observation:
    Y: np.ndarray
    gain_used: np.ndarray
    draw_index: int


class _Plant:
    def __init__(self, params, seed=0, distribution="gaussian"):
        if not isinstance(params, PlantParams):
            params = PlantParams(*params)
        if distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
        self.params = params
        self.n = params.n
        self.seed = int(seed)
        self.distribution = distribution
        self.rng = make_rng(self.seed)
        self.draws = 0
        self._G_cache = {}

    def _G(self, alpha):
        G = self._G_cache.get(alpha)
        if G is None:
            G = self._G_cache[alpha] = self.params.G(alpha)
        return G

    def closed_loop(self, alpha, kv):
        kv = np.asarray(kv, dtype=float).ravel()
        return self._G(alpha) + self.params.F * kv

    def _noise(self, variance, size):
        return _draw(self.rng, self.distribution, variance, size)


class DiscretePlant(_Plant):
    """``x(k+1) = (H + alpha L + F kv) x(k) + alpha w(k) x(k)``, ``Var w = delta``."""

    def __init__(self, params, delta, seed=0, distribution="gaussian"):
        super().__init__(params, seed, distribution)
        if not delta >= 0:
            raise ValueError("noise variance delta must be >= 0")
        self.delta = float(delta)

    def simulate(self, alpha, kv, x0, steps):
        """One sample path, shape ``(steps + 1, n)``."""
        return self.simulate_paths(alpha, kv, x0, steps, paths=1)[:, 0, :]

    def simulate_paths(self, alpha, kv, x0, steps, paths):
        """Independent sample paths from the same ``x0``, shape ``(steps + 1, paths, n)``."""
        if steps < 0:
            raise ValueError("steps must be >= 0")
        A = self.closed_loop(alpha, kv)
        x = np.tile(np.asarray(x0, dtype=float).ravel(), (paths, 1))
        out = np.empty((steps + 1, paths, self.n))
        out[0] = x
        for k in range(steps):
            w = self._noise(self.delta, paths)
            x = x @ A.T + (alpha * w)[:, None] * x
            out[k + 1] = x
        return out

    def observe_X1(self, alpha, kv):
        """One step of the matrix-form loop from ``X(0) = I``: ``G + F kv + alpha W``.

        ``W`` is diagonal with independent entries of variance ``delta`` (one
        scalar noise per column trajectory).
        """
        kv = np.asarray(kv, dtype=float).ravel()
        Y = self.closed_loop(alpha, kv)
        w = self._noise(self.delta, self.n)
        Y[np.diag_indices(self.n)] += alpha * w
        self.draws += 1
        return Observation(Y, kv.copy(), self.draws - 1)


class ContinuousPlant(_Plant):
    """``dx = (H + alpha L + F tv) x dt + alpha x dsigma`` integrated by Euler-Maruyama.

    ``dt`` is the observation window; each window is split into ``substeps``
    Euler-Maruyama steps.
    """

    def __init__(self, params, dt, substeps=1, seed=0, distribution="gaussian"):
        super().__init__(params, seed, distribution)
        if not dt > 0:
            raise ValueError("dt must be > 0")
        if int(substeps) < 1:
            raise ValueError("substeps must be >= 1")
        self.dt = float(dt)
        self.substeps = int(substeps)

    def simulate(self, alpha, tv, x0, horizon, h=None):
        """Euler-Maruyama path on ``[0, horizon]`` with step ``h``.

        ``h`` defaults to ``dt / substeps`` and is shrunk so a whole number of
        steps covers the horizon. Returns ``(times, states)``.
        """
        if not horizon > 0:
            raise ValueError("horizon must be > 0")
        h = self.dt / self.substeps if h is None else float(h)
        nsteps = max(1, int(np.ceil(horizon / h - 1e-9)))
        h = horizon / nsteps
        times, paths = self._em(alpha, tv, np.asarray(x0, dtype=float).reshape(1, -1), h, nsteps)
        return times, paths[:, 0, :]

    def simulate_paths(self, alpha, tv, x0, horizon, paths, h=None):
        h = self.dt / self.substeps if h is None else float(h)
        nsteps = max(1, int(np.ceil(horizon / h - 1e-9)))
        h = horizon / nsteps
        x = np.tile(np.asarray(x0, dtype=float).ravel(), (paths, 1))
        return self._em(alpha, tv, x, h, nsteps)

    def _em(self, alpha, tv, x, h, nsteps):
        A = self.closed_loop(alpha, tv)
        out = np.empty((nsteps + 1,) + x.shape)
        out[0] = x
        for k in range(nsteps):
            dB = self._noise(h, x.shape[0])
            x = x + (x @ A.T) * h + (alpha * dB)[:, None] * x
            out[k + 1] = x
        return np.linspace(0.0, nsteps * h, nsteps + 1), out

    def observe_Y1(self, alpha, tv):
        """``x(dt) - I/dt`` where column ``i`` starts at ``e_i / dt``.

        With one substep this equals ``G + F tv + (alpha/dt) W`` exactly, ``W``
        diagonal with independent entries of variance ``dt``.
        """
        tv = np.asarray(tv, dtype=float).ravel()
        n = self.n
        A = self.closed_loop(alpha, tv)
        h = self.dt / self.substeps
        # row i of X is the trajectory started from e_i / dt
        X = np.eye(n) / self.dt
        for _ in range(self.substeps):
            dB = self._noise(h, n)
            X = X + (X @ A.T) * h + (alpha * dB)[:, None] * X
        Y = X.T - np.eye(n) / self.dt
        self.draws += 1
        return Observation(Y, tv.copy(), self.draws - 1)

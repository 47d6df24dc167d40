"""Experiment configuration: JSON text <-> validated :class:`ExperimentConfig`.

Matrices are row-major nested lists, complex numbers are ``[re, im]`` pairs.
Exactly one of ``system`` (``H, L, F``) or ``general_system``
(``A, B, Abar, Bbar``) must be present.
"""
import json
from dataclasses import dataclass, replace
from importlib import resources
from typing import Optional

import numpy as np

from .errors import NotConjugateClosed, ParseError, ValidationError
from .learn import LearnConfig, Schedule
from .numerics import pair_conjugates

__all__ = ["ExperimentConfig", "parse_config", "serialize", "load_config", "bundled_config"]

_SYSTEM_KEYS = ("H", "L", "F")
_GENERAL_KEYS = ("A", "B", "Abar", "Bbar")
_TOP_KEYS = {"mode", "system", "general_system", "assignment", "noise", "learner",
             "seed", "repeats", "output"}


def _freeze(mat):
    return tuple(tuple(float(x) for x in row) for row in mat)


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    alpha: float
    lambdas: tuple
    system: Optional[dict] = None
    general_system: Optional[dict] = None
    delta: float = 0.0
    dt: float = 0.1
    substeps: int = 1
    distribution: str = "gaussian"
    eps: float = 1e-8
    beta: Schedule = Schedule(scale=1.0, exponent=-1.0)
    bound: Schedule = Schedule()
    K_init: Optional[tuple] = None
    p_max: int = 100_000
    s_max: int = 1_000_000
    index_cap: int = 10_000
    direction: str = "inverse"
    seed: int = 0
    repeats: int = 1
    report_path: Optional[str] = None
    trace_path: Optional[str] = None

    def matrices(self, name):
        src = self.system if self.system is not None else self.general_system
        return np.array(src[name], dtype=float)

    @property
    def learn_config(self):
        return LearnConfig(
            eps=self.eps, beta=self.beta, bound=self.bound,
            K_init=None if self.K_init is None else np.array(self.K_init),
            p_max=self.p_max, s_max=self.s_max, index_cap=self.index_cap,
            direction=self.direction)

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def to_dict(self):
        d = {"mode": self.mode}
        if self.system is not None:
            d["system"] = {k: [list(r) for r in self.system[k]] for k in _SYSTEM_KEYS}
        if self.general_system is not None:
            d["general_system"] = {k: [list(r) for r in self.general_system[k]] for k in _GENERAL_KEYS}
        d["assignment"] = {"alpha": self.alpha,
                           "lambdas": [[z.real, z.imag] for z in self.lambdas]}
        d["noise"] = {"delta": self.delta, "dt": self.dt, "substeps": self.substeps,
                      "distribution": self.distribution}
        d["learner"] = {
            "eps": self.eps, "beta": self.beta.to_dict(), "bound": self.bound.to_dict(),
            "K_init": None if self.K_init is None else list(self.K_init),
            "p_max": self.p_max, "s_max": self.s_max, "index_cap": self.index_cap,
            "direction": self.direction,
        }
        d["seed"] = self.seed
        d["repeats"] = self.repeats
        d["output"] = {"report": self.report_path, "trace": self.trace_path}
        return d


def serialize(cfg):
    return json.dumps(cfg.to_dict(), indent=2)


def _num(value, name, problems, cast=float):
    try:
        out = cast(value)
    except (TypeError, ValueError):
        problems.append(f"{name}: expected a number, got {value!r}")
        return None
    if cast is float and not np.isfinite(out):
        problems.append(f"{name}: must be finite")
        return None
    return out


def _matrix(value, name, problems):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        problems.append(f"{name}: not a numeric matrix")
        return None
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        problems.append(f"{name}: expected a 2-D row-major matrix")
        return None
    if not np.all(np.isfinite(arr)):
        problems.append(f"{name}: non-finite entries")
        return None
    return arr


def _complex_list(value, problems):
    out = []
    if not isinstance(value, list) or not value:
        problems.append("assignment.lambdas: expected a non-empty list of [re, im] pairs")
        return out
    for k, item in enumerate(value):
        if isinstance(item, (int, float)):
            out.append(complex(float(item), 0.0))
        elif isinstance(item, list) and len(item) == 2:
            re = _num(item[0], f"assignment.lambdas[{k}][0]", problems)
            im = _num(item[1], f"assignment.lambdas[{k}][1]", problems)
            if re is not None and im is not None:
                out.append(complex(re, im))
        else:
            problems.append(f"assignment.lambdas[{k}]: expected [re, im], got {item!r}")
    return out


def _schedule(d, name, problems, default):
    if d is None:
        return default
    if not isinstance(d, dict):
        problems.append(f"learner.{name}: expected an object with scale/exponent/offset")
        return default
    unknown = set(d) - {"scale", "exponent", "offset"}
    if unknown:
        problems.append(f"learner.{name}: unknown keys {sorted(unknown)}")
    vals = {k: _num(d[k], f"learner.{name}.{k}", problems) for k in ("scale", "exponent", "offset") if k in d}
    if any(v is None for v in vals.values()):
        return default
    return replace(default, **vals)


def _validate_system(block, keys, name, problems):
    if not isinstance(block, dict):
        problems.append(f"{name}: expected an object")
        return None
    missing = [k for k in keys if k not in block]
    if missing:
        problems.append(f"{name}: missing {missing}")
        return None
    mats = {k: _matrix(block[k], f"{name}.{k}", problems) for k in keys}
    if any(m is None for m in mats.values()):
        return None
    return mats


def _check_shapes(mats, general, problems):
    if general:
        A, B, Ab, Bb = (mats[k] for k in _GENERAL_KEYS)
        n = A.shape[0]
        if A.shape != (n, n) or Ab.shape != (n, n):
            problems.append("general_system: A and Abar must be square of equal size")
        if B.shape != (n, n + 1) or Bb.shape != (n, n + 1):
            problems.append(f"general_system: B and Bbar must be {n}x{n + 1}")
        return n
    H, L, F = (mats[k] for k in _SYSTEM_KEYS)
    n = H.shape[0]
    if H.shape != (n, n) or L.shape != (n, n):
        problems.append("system: H and L must be square of equal size")
    if F.shape != (n, 1):
        problems.append(f"system: F must be a single column of length {n}")
    return n


def config_from_dict(d):
    """Validate a decoded config; raises ``ValidationError`` listing every violation."""
    problems = []
    if not isinstance(d, dict):
        raise ValidationError("top level must be an object")
    unknown = set(d) - _TOP_KEYS
    if unknown:
        problems.append(f"unknown top-level keys {sorted(unknown)}")
    mode = d.get("mode")
    if mode not in ("discrete", "continuous"):
        problems.append(f"mode: must be 'discrete' or 'continuous', got {mode!r}")

    has_sys, has_gen = "system" in d, "general_system" in d
    if has_sys == has_gen:
        problems.append("exactly one of 'system' and 'general_system' must be present")
    system = general = None
    n = None
    if has_sys and not has_gen:
        mats = _validate_system(d["system"], _SYSTEM_KEYS, "system", problems)
        if mats is not None:
            n = _check_shapes(mats, False, problems)
            system = {k: _freeze(v) for k, v in mats.items()}
    elif has_gen and not has_sys:
        mats = _validate_system(d["general_system"], _GENERAL_KEYS, "general_system", problems)
        if mats is not None:
            n = _check_shapes(mats, True, problems)
            general = {k: _freeze(v) for k, v in mats.items()}

    asg = d.get("assignment")
    alpha, lambdas = 0.0, ()
    if not isinstance(asg, dict):
        problems.append("assignment: missing or not an object")
    else:
        alpha = _num(asg.get("alpha"), "assignment.alpha", problems) if "alpha" in asg else None
        if alpha is None:
            if "alpha" not in asg:
                problems.append("assignment.alpha: missing")
            alpha = 0.0
        lambdas = tuple(_complex_list(asg.get("lambdas"), problems))
        if lambdas and mode == "discrete":
            try:
                pair_conjugates(lambdas)
            except NotConjugateClosed as exc:
                problems.append(f"assignment.lambdas: not conjugate-closed ({exc})")
        if lambdas and mode == "continuous":
            if any(abs(z.imag) > 1e-12 * (1 + abs(z)) for z in lambdas):
                problems.append("assignment.lambdas: continuous mode needs real eigenvalues")
        if n is not None and lambdas and len(lambdas) != n:
            problems.append(f"assignment.lambdas: need {n} values, got {len(lambdas)}")

    noise = d.get("noise", {}) or {}
    kw = {}
    if not isinstance(noise, dict):
        problems.append("noise: expected an object")
        noise = {}
    if "delta" in noise:
        kw["delta"] = _num(noise["delta"], "noise.delta", problems)
        if kw["delta"] is not None and kw["delta"] < 0:
            problems.append("noise.delta: must be >= 0")
    if "dt" in noise:
        kw["dt"] = _num(noise["dt"], "noise.dt", problems)
        if kw["dt"] is not None and kw["dt"] <= 0:
            problems.append("noise.dt: must be > 0")
    if "substeps" in noise:
        kw["substeps"] = _num(noise["substeps"], "noise.substeps", problems, int)
        if kw["substeps"] is not None and kw["substeps"] < 1:
            problems.append("noise.substeps: must be >= 1")
    if "distribution" in noise:
        if noise["distribution"] not in ("gaussian", "rademacher"):
            problems.append("noise.distribution: must be 'gaussian' or 'rademacher'")
        kw["distribution"] = noise["distribution"]

    learner = d.get("learner", {}) or {}
    if not isinstance(learner, dict):
        problems.append("learner: expected an object")
        learner = {}
    if "eps" in learner:
        kw["eps"] = _num(learner["eps"], "learner.eps", problems)
        if kw["eps"] is not None and kw["eps"] <= 0:
            problems.append("learner.eps: must be > 0")
    kw["beta"] = _schedule(learner.get("beta"), "beta", problems, ExperimentConfig.beta)
    kw["bound"] = _schedule(learner.get("bound"), "bound", problems, ExperimentConfig.bound)
    for key, check in ((kw["beta"], "check_step_size"), (kw["bound"], "check_bound")):
        try:
            getattr(key, check)()
        except ValueError as exc:
            problems.append(f"learner: {exc}")
    if learner.get("K_init") is not None:
        k0 = learner["K_init"]
        try:
            k0 = tuple(float(x) for x in k0)
            if n is not None and len(k0) != n:
                problems.append(f"learner.K_init: need {n} entries")
            kw["K_init"] = k0
        except (TypeError, ValueError):
            problems.append("learner.K_init: expected a list of numbers")
    for key in ("p_max", "s_max", "index_cap"):
        if key in learner:
            kw[key] = _num(learner[key], f"learner.{key}", problems, int)
            if kw[key] is not None and kw[key] < 1:
                problems.append(f"learner.{key}: must be >= 1")
    if "direction" in learner:
        if learner["direction"] not in ("inverse", "direct"):
            problems.append("learner.direction: must be 'inverse' or 'direct'")
        kw["direction"] = learner["direction"]

    if "seed" in d:
        kw["seed"] = _num(d["seed"], "seed", problems, int)
        if kw["seed"] is not None and not 0 <= kw["seed"] < 2 ** 64:
            problems.append("seed: must be an unsigned 64-bit integer")
    if "repeats" in d:
        kw["repeats"] = _num(d["repeats"], "repeats", problems, int)
        if kw["repeats"] is not None and kw["repeats"] < 1:
            problems.append("repeats: must be >= 1")
    out = d.get("output", {}) or {}
    if isinstance(out, dict):
        kw["report_path"] = out.get("report")
        kw["trace_path"] = out.get("trace")
    else:
        problems.append("output: expected an object")

    if problems:
        raise ValidationError(problems)
    kw = {k: v for k, v in kw.items() if v is not None}
    return ExperimentConfig(mode=mode, alpha=float(alpha), lambdas=lambdas,
                            system=system, general_system=general, **kw)


def parse_config(text):
    """Parse JSON config text. ``ParseError`` for malformed text, ``ValidationError`` otherwise."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(d)


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def bundled_config(name):
    """``example1`` (discrete, n = 3) or ``example2`` (continuous, scalar)."""
    try:
        text = resources.files("stochspec.configs").joinpath(f"{name}.json").read_text()
    except FileNotFoundError:
        raise ValueError(f"no bundled config named {name!r}") from None
    return parse_config(text)

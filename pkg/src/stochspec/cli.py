"""Command-line experiment runner.

::

    stochspec design   --config PATH [--out PATH]
    stochspec spectrum --config PATH --gain JSON [--out PATH]
    stochspec learn    --config PATH [--seed N] [--repeats N] [--out PATH] [--trace PATH]
    stochspec reproduce example1|example2 [--seed N] [--repeats N] [--out PATH] [--trace PATH]

Reports are JSON; complex numbers are written as ``[re, im]``. Exit status
is 0 on success, 2 on invalid input and 3 when a learning run fails to
converge.
"""
import argparse
import csv
import json
import sys
import time
from contextlib import ExitStack

import numpy as np

from .assign import design, lift_gain, reduce_general, target_spectrum
from .config import bundled_config, load_config
from .errors import (
    IndexSearchExhausted,
    NonFinite,
    NotControllable,
    ParseError,
    ShapeMismatch,
    SpecInvalid,
    StochSpecError,
    ValidationError,
)
from .learn import run_learning
from .model import AssignmentSpec, GainPair, PlantParams
from .numerics import match_multisets, sort_spectrum
from .plant import ContinuousPlant, DiscretePlant
from .symspace import operator_matrix, operator_matrix_general, spectrum

__all__ = ["cmd_design", "cmd_learn", "cmd_spectrum", "cmd_reproduce", "main"]

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 2, 3


def _cvec(values):
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).ravel()]


def _spec(cfg):
    return AssignmentSpec(cfg.mode, cfg.alpha, cfg.lambdas)


def _reduced(cfg):
    """``(params, reduced)``; ``reduced`` is None for a config given directly in ``(H, L, F)`` form."""
    if cfg.system is not None:
        return PlantParams(cfg.matrices("H"), cfg.matrices("L"), cfg.matrices("F")), None
    red = reduce_general(*(cfg.matrices(k) for k in ("A", "B", "Abar", "Bbar")))
    return red.params, red


def _achieved(cfg, params, reduced, gain):
    """Operator spectrum under ``gain`` plus the full gain in the config's own coordinates."""
    if reduced is None:
        T = operator_matrix(params.H, params.L, params.F, gain.alpha, gain.kv, cfg.mode)
        return spectrum(T), None
    K = lift_gain(gain, reduced.Abar, reduced.Q)
    A, B, Abar, Bbar = (cfg.matrices(k) for k in ("A", "B", "Abar", "Bbar"))
    return spectrum(operator_matrix_general(A, B, Abar, Bbar, K, cfg.mode)), K


def _spectrum_block(cfg, params, reduced, gain, spec):
    achieved, K = _achieved(cfg, params, reduced, gain)
    target = target_spectrum(spec)
    _, errors = match_multisets(target, achieved, tol=np.inf)
    block = {
        "gain": {"alpha": gain.alpha, "kv": [float(x) for x in gain.kv]},
        "achieved_spectrum": _cvec(sort_spectrum(achieved)),
        "target_spectrum": _cvec(target),
        "spectrum_error": [float(e) for e in errors],
        "max_spectrum_error": float(np.max(errors)),
    }
    if K is not None:
        block["gain"]["K"] = K.tolist()
    return block


def cmd_design(cfg):
    """Model-based gain, its operator spectrum and the per-value error against the target."""
    t0 = time.perf_counter()
    spec = _spec(cfg)
    params, reduced = _reduced(cfg)
    gain = design(params, spec)
    report = {"command": "design", "config": cfg.to_dict()}
    report["designed"] = _spectrum_block(cfg, params, reduced, gain, spec)
    report["wall_clock_s"] = time.perf_counter() - t0
    return report


def _parse_gain(gain, n):
    kv = np.asarray(gain, dtype=float).ravel()
    if kv.size != n:
        raise ShapeMismatch(f"gain must have {n} entries, got {kv.size}")
    return kv


def cmd_spectrum(cfg, gain):
    """Operator spectrum of the closed loop under an explicit ``kv`` (with ``alpha`` from the config)."""
    t0 = time.perf_counter()
    spec = _spec(cfg)
    params, reduced = _reduced(cfg)
    pair = GainPair(cfg.alpha, _parse_gain(gain, params.n))
    report = {"command": "spectrum", "config": cfg.to_dict()}
    report["evaluated"] = _spectrum_block(cfg, params, reduced, pair, spec)
    report["wall_clock_s"] = time.perf_counter() - t0
    return report


def _make_plant(cfg, params, seed):
    if cfg.mode == "discrete":
        return DiscretePlant(params, cfg.delta, seed=seed, distribution=cfg.distribution)
    return ContinuousPlant(params, cfg.dt, cfg.substeps, seed=seed, distribution=cfg.distribution)


def _trace_path(base, seed, repeats):
    if base is None or repeats == 1:
        return base
    stem, dot, ext = base.rpartition(".")
    if not dot:
        return f"{base}.seed{seed}"
    return f"{stem}.seed{seed}.{ext}"


def _csv_sink(fh, n):
    """Trace sink writing ``p,j,s,k_1..k_n,delta_norm`` rows as they arrive."""
    writer = csv.writer(fh)
    writer.writerow(["p", "j", "s"] + [f"k_{i + 1}" for i in range(n)] + ["delta_norm"])

    def sink(rec):
        writer.writerow([rec.p, rec.j, rec.s] + [repr(float(k)) for k in rec.K] + [repr(rec.delta_norm)])

    return sink


def _learn_one(cfg, params, reduced, spec, seed, trace_path, designed):
    plant = _make_plant(cfg, params, seed)
    lc = cfg.learn_config
    lc.keep_trace = False
    run = {"seed": seed, "trace_path": trace_path}
    t0 = time.perf_counter()
    with ExitStack() as stack:
        sink = None
        if trace_path is not None:
            fh = stack.enter_context(open(trace_path, "w", newline=""))
            sink = _csv_sink(fh, params.n)
        try:
            rep = run_learning(plant, spec, lc, sink)
        except (IndexSearchExhausted, NonFinite) as exc:
            run.update(converged=False, reason=f"{type(exc).__name__}: {exc}",
                       wall_clock_s=time.perf_counter() - t0)
            return run
    run.update(
        converged=rep.converged,
        reason=rep.reason,
        p_final=rep.p_final,
        truncations=rep.truncations,
        observations=rep.observations,
        steps=rep.steps,
        J=rep.J,
    )
    learned = GainPair(spec.alpha, rep.gain)
    run["learned"] = _spectrum_block(cfg, params, reduced, learned, spec)
    if designed is not None:
        run["error_vs_design"] = float(np.max(np.abs(rep.gain - designed.kv)))
    run["wall_clock_s"] = time.perf_counter() - t0
    return run


def cmd_learn(cfg, seed=None, repeats=None, trace=None):
    """Seeded learning runs; ``seed``, ``seed + 1``, ... for ``repeats`` runs.

    The plant matrices are used only to build the simulator and, afterwards,
    to compare the learned gain with the model-based one.
    """
    t0 = time.perf_counter()
    seed = cfg.seed if seed is None else int(seed)
    repeats = cfg.repeats if repeats is None else int(repeats)
    trace = cfg.trace_path if trace is None else trace
    spec = _spec(cfg)
    params, reduced = _reduced(cfg)
    try:
        designed = design(params, spec)
    except NotControllable:
        designed = None
    runs = [_learn_one(cfg, params, reduced, spec, seed + r,
                       _trace_path(trace, seed + r, repeats), designed)
            for r in range(repeats)]
    report = {"command": "learn", "config": cfg.to_dict()}
    if designed is not None:
        report["designed_gain"] = {"alpha": designed.alpha, "kv": [float(x) for x in designed.kv]}
    report["runs"] = runs
    report["all_converged"] = all(r["converged"] for r in runs)
    report["wall_clock_s"] = time.perf_counter() - t0
    return report


def cmd_reproduce(name, seed=None, repeats=None, trace=None):
    """Design and learning for a bundled example config."""
    cfg = bundled_config(name)
    return {
        "command": "reproduce",
        "example": name,
        "design": cmd_design(cfg),
        "learn": cmd_learn(cfg, seed, repeats, trace),
    }


def dumps(report):
    return json.dumps(report, indent=2, sort_keys=True)


def _build_parser():
    ap = argparse.ArgumentParser(prog="stochspec", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="write the report here instead of stdout")

    def seeded(p):
        p.add_argument("--seed", type=int, help="first seed (overrides the config)")
        p.add_argument("--repeats", type=int, help="number of seeded runs")
        p.add_argument("--trace", help="CSV trace path (per-seed suffix when repeats > 1)")

    common(sub.add_parser("design", help="model-based gain and spectrum"))
    p = sub.add_parser("spectrum", help="operator spectrum under a given gain")
    common(p)
    p.add_argument("--gain", required=True, help="kv as a JSON number or list")
    p = sub.add_parser("learn", help="model-free learning runs")
    common(p)
    seeded(p)
    p = sub.add_parser("reproduce", help="run a bundled example")
    p.add_argument("example", choices=["example1", "example2"])
    common(p, config=False)
    seeded(p)
    return ap


def _check_seed_args(args):
    seed = getattr(args, "seed", None)
    if seed is not None and not 0 <= seed < 2 ** 64:
        raise ValidationError(["--seed: must be an unsigned 64-bit integer"])
    repeats = getattr(args, "repeats", None)
    if repeats is not None and repeats < 1:
        raise ValidationError(["--repeats: must be >= 1"])


def main(argv=None):
    args = _build_parser().parse_args(argv)
    report_path = None
    try:
        _check_seed_args(args)
        if args.command == "reproduce":
            report = cmd_reproduce(args.example, args.seed, args.repeats, args.trace)
            converged = report["learn"]["all_converged"]
        else:
            cfg = load_config(args.config)
            report_path = cfg.report_path
            if args.command == "design":
                report, converged = cmd_design(cfg), True
            elif args.command == "spectrum":
                try:
                    gain = json.loads(args.gain)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"--gain: {exc}") from exc
                report, converged = cmd_spectrum(cfg, gain), True
            else:
                report = cmd_learn(cfg, args.seed, args.repeats, args.trace)
                converged = report["all_converged"]
    except ValidationError as exc:
        print("error: invalid config", file=sys.stderr)
        for problem in getattr(exc, "problems", [str(exc)]):
            print(f"  - {problem}", file=sys.stderr)
        return EXIT_INVALID
    except (ParseError, SpecInvalid, ShapeMismatch, StochSpecError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = dumps(report)
    out = args.out or report_path
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())

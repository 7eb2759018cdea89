"""``schro`` batch entry point: verify, evolve, boost, covariance.

Every command prints exactly one JSON document on stdout and a short human
summary on stderr.  Exit codes: 0 = all checks pass, 1 = a check failed,
2 = configuration / input error.
"""
from __future__ import annotations

import argparse
import inspect
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import symexpr as sx
from .fields import GridSpec, ResolutionWarning, boost_field, load, sample, save
from .gauge import PhysicalConstants, projective_transition, push_forward
from .solver import EvolutionConfig, SolverError, analytic_free_gaussian, covariance_check, evolve
from .spacetime import GalileanTransition
from .verify import SUITES

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------ output

def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return "%.17g" % x


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _emit(report: dict, summary: list[str]) -> None:
    sys.stdout.write(dumps(report) + "\n")
    sys.stdout.flush()
    for line in summary:
        print(line, file=sys.stderr)


# ------------------------------------------------------------ config plumbing

DEFAULTS = {
    "verify": {"seed": 42, "perturb_eps": None, "params": {}},
    "evolve": {"n": 1, "points": 1024, "extent": 80.0, "m": 1.0, "hbar": 1.0,
               "initial": "exp(-y1^2/2)", "potential": None, "dt": 1e-3, "steps": 2000,
               "save_every": None, "out": "schro_out", "allow_complex_potential": False},
    "boost": {"input": None, "output": None, "v": None, "w": None, "t0": 0.0,
              "gauge_phase": True},
    "covariance": {"n": 1, "points": 1024, "extent": 80.0, "m": 1.0, "hbar": 1.0, "sigma": 1.0,
                   "v": [1.0], "w": None, "t0": 0.0, "dt": 1e-3, "T": 2.0, "potential": None,
                   "tolerance": 1e-6, "gauge_phase": True},
}


def _resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - set(cfg) - {"command", "suite"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update({k: v for k, v in data.items() if k in cfg})
        if command == "verify" and "suite" in data and args.suite is None:
            args.suite = data["suite"]
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _positive(cfg: dict, *keys: str) -> None:
    for k in keys:
        if cfg.get(k) is not None and not (isinstance(cfg[k], (int, float)) and cfg[k] > 0):
            raise ConfigError(f"{k} must be positive, got {cfg[k]!r}")


def _vector(value, n: int, name: str, default: float = 0.0) -> np.ndarray:
    if value is None:
        return np.full(n, default)
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1 and n > 1:
        arr = np.concatenate([arr, np.zeros(n - 1)])
    if arr.shape != (n,):
        raise ConfigError(f"{name} must have {n} components")
    return arr


def _grid(cfg: dict) -> GridSpec:
    n = int(cfg["n"])
    if n < 1:
        raise ConfigError("n must be at least 1")
    sizes = cfg["points"] if isinstance(cfg["points"], list) else [cfg["points"]] * n
    extents = cfg["extent"] if isinstance(cfg["extent"], list) else [cfg["extent"]] * n
    try:
        return GridSpec(tuple(int(s) for s in sizes), tuple(float(e) for e in extents))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _expr(src, n: int, what: str):
    if src is None:
        return None
    try:
        e = sx.parse(str(src), n)
    except sx.ParseError as exc:
        raise ConfigError(f"{what}: {exc}") from exc
    return e


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


# ------------------------------------------------------------ commands

def cmd_verify(cfg: dict, suite: str) -> int:
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    fn = SUITES[suite]
    params = dict(cfg["params"] or {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    params["seed"] = int(cfg["seed"])
    if cfg["perturb_eps"] is not None:
        if suite != "metric":
            raise ConfigError("perturb_eps only applies to the metric suite")
        params["perturb_eps"] = float(cfg["perturb_eps"])
    accepted = inspect.signature(fn).parameters
    unknown = set(params) - set(accepted)
    if unknown:
        raise ConfigError(f"suite {suite} does not take parameters {sorted(unknown)}")
    _positive(params, *(k for k in params if k.startswith("tol")))
    checks = fn(**params)
    passed = all(c.passed for c in checks)
    report = {"command": "verify", "suite": suite, "seed": params["seed"],
              "passed": passed, "checks": [c.to_json() for c in checks]}
    _emit(report, [c.summary() for c in checks] + [f"suite {suite}: {'PASS' if passed else 'FAIL'}"])
    return EXIT_OK if passed else EXIT_FAIL


def cmd_evolve(cfg: dict) -> int:
    _positive(cfg, "m", "hbar", "save_every")
    if int(cfg["steps"]) < 0:
        raise ConfigError("steps must be non-negative")
    if not cfg["dt"] or not math.isfinite(cfg["dt"]):
        raise ConfigError("dt must be finite and non-zero")
    spec = _grid(cfg)
    consts = PhysicalConstants(float(cfg["m"]), float(cfg["hbar"]))
    psi0 = _expr(cfg["initial"], spec.n, "initial")
    U = _expr(cfg["potential"], spec.n, "potential")
    f0 = sample(psi0, spec, 0.0, consts=consts)
    try:
        ecfg = EvolutionConfig(float(cfg["dt"]), int(cfg["steps"]), U,
                               save_every=cfg["save_every"],
                               allow_complex_potential=bool(cfg["allow_complex_potential"]))
    except (ValueError, sx.ExprError) as exc:
        raise ConfigError(str(exc)) from exc
    slices = evolve(f0, ecfg)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    log, files = [], []
    norm0 = f0.norm()
    for step, f in zip(ecfg.save_steps(), slices):
        path = out / f"snapshot_{step:07d}.schwf"
        save(f, path)
        files.append(str(path))
        log.append({"step": step, "t": f.t, "norm": f.norm(), "max_abs": f.max_abs()})
    deviation = max(abs(e["norm"] - norm0) for e in log)
    (out / "log.json").write_text(dumps(log) + "\n")
    report = {"command": "evolve", "grid": spec.to_json(), "m": consts.m, "hbar": consts.hbar,
              "initial": sx.to_str(psi0), "potential": sx.to_str(U) if U is not None else None,
              "dt": ecfg.dt, "steps": ecfg.steps, "snapshots": files, "log": log,
              "norm_deviation": deviation}
    _emit(report, [f"evolved {ecfg.steps} steps, {len(files)} snapshots in {out}",
                   f"norm_deviation: max {deviation:.1e}"])
    return EXIT_OK


def cmd_boost(cfg: dict) -> int:
    if not cfg["input"] or not cfg["output"]:
        raise ConfigError("boost needs input and output paths")
    try:
        f = load(cfg["input"])
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {cfg['input']}: {exc}") from exc
    n = f.n
    g = GalileanTransition(_vector(cfg["v"], n, "v"), _vector(cfg["w"], n, "w"), float(cfg["t0"]))
    T = projective_transition(g, f.consts)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionWarning)
        out = boost_field(T, f, gauge_phase=bool(cfg["gauge_phase"]))
    summary = [f"warning: {w.message}" for w in caught if issubclass(w.category, ResolutionWarning)]
    save(out, cfg["output"])
    report = {"command": "boost", "input": str(cfg["input"]), "output": str(cfg["output"]),
              "transition": g.to_json(), "gauge_phase": bool(cfg["gauge_phase"]),
              "t": out.t, "frame": out.frame.to_json(), "norm_in": f.norm(), "norm_out": out.norm(),
              "warnings": [str(w.message) for w in caught]}
    summary.append(f"boosted {cfg['input']} -> {cfg['output']}; norm {f.norm():.6g} -> {out.norm():.6g}")
    _emit(report, summary)
    return EXIT_OK


def cmd_covariance(cfg: dict) -> int:
    _positive(cfg, "m", "hbar", "sigma", "dt", "T", "tolerance")
    spec = _grid(cfg)
    n = spec.n
    consts = PhysicalConstants(float(cfg["m"]), float(cfg["hbar"]))
    g = GalileanTransition(_vector(cfg["v"], n, "v"), _vector(cfg["w"], n, "w"), float(cfg["t0"]))
    U = _expr(cfg["potential"], n, "potential")
    steps = int(round(cfg["T"] / cfg["dt"]))
    if steps < 1 or abs(steps * cfg["dt"] - cfg["T"]) > 1e-9 * cfg["T"]:
        raise ConfigError("T must be a positive integer multiple of dt")
    rest = analytic_free_gaussian(float(cfg["sigma"]), np.zeros(n), np.zeros(n), consts)
    f0 = sample(rest, spec, 0.0, consts=consts)
    analytic = None
    if U is None:
        analytic = push_forward(projective_transition(g, consts), rest)
    started = time.perf_counter()
    rep = covariance_check(f0, g, EvolutionConfig(float(cfg["dt"]), steps, U),
                           gauge_phase=bool(cfg["gauge_phase"]), analytic=analytic)
    elapsed = time.perf_counter() - started
    passed = rep.relative_distance <= cfg["tolerance"]
    report = {"command": "covariance", "grid": spec.to_json(), "m": consts.m, "hbar": consts.hbar,
              "sigma": float(cfg["sigma"]), "transition": g.to_json(),
              "potential": sx.to_str(U) if U is not None else None,
              "dt": float(cfg["dt"]), "tolerance": float(cfg["tolerance"]),
              **rep.to_json(), "passed": passed}
    _emit(report, [f"relative_distance: {rep.relative_distance:.3e} "
                   f"{'≤' if passed else '>'} {cfg['tolerance']:.0e}  [{'ok' if passed else 'FAIL'}]",
                   f"elapsed {elapsed:.2f} s"])
    return EXIT_OK if passed else EXIT_FAIL


# ------------------------------------------------------------ argument parsing

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schro", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with parameters; flags override it")

    def grid_args(sp):
        sp.add_argument("--n", type=int, help="spatial dimension")
        sp.add_argument("--points", type=int, help="grid points per axis (power of two)")
        sp.add_argument("--extent", type=float, help="box length per axis")
        sp.add_argument("--m", type=float, help="mass")
        sp.add_argument("--hbar", type=float, help="reduced Planck constant")

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", nargs="?", choices=sorted(SUITES))
    v.add_argument("--seed", type=int)
    v.add_argument("--perturb-eps", dest="perturb_eps", type=float,
                   help="metric suite: check a deliberately perturbed metric instead")
    common(v)

    e = sub.add_parser("evolve", help="evolve an initial expression and write snapshots")
    grid_args(e)
    e.add_argument("--initial", help="initial wave function expression")
    e.add_argument("--potential", help="potential expression U(y, t)")
    e.add_argument("--dt", type=float)
    e.add_argument("--steps", type=int)
    e.add_argument("--save-every", dest="save_every", type=int)
    e.add_argument("--out", help="output directory")
    e.add_argument("--allow-complex-potential", dest="allow_complex_potential",
                   action="store_true", default=None)
    common(e)

    b = sub.add_parser("boost", help="apply a Galilean gauge transition to a field file")
    b.add_argument("input", nargs="?")
    b.add_argument("output", nargs="?")
    b.add_argument("--v", type=_float_list, help="velocity, comma separated")
    b.add_argument("--w", type=_float_list, help="offset, comma separated")
    b.add_argument("--t0", type=float)
    b.add_argument("--no-gauge-phase", dest="gauge_phase", action="store_false", default=None)
    common(b)

    c = sub.add_parser("covariance", help="evolve-then-boost versus boost-then-evolve")
    grid_args(c)
    c.add_argument("--sigma", type=float)
    c.add_argument("--v", type=_float_list)
    c.add_argument("--w", type=_float_list)
    c.add_argument("--t0", type=float)
    c.add_argument("--dt", type=float)
    c.add_argument("--T", dest="T", type=float, help="final time")
    c.add_argument("--potential")
    c.add_argument("--tolerance", type=float)
    c.add_argument("--no-gauge-phase", dest="gauge_phase", action="store_false", default=None)
    common(c)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args.command, args)
        if args.command == "verify":
            if args.suite is None:
                raise ConfigError("verify needs a suite name")
            return cmd_verify(cfg, args.suite)
        if args.command == "evolve":
            return cmd_evolve(cfg)
        if args.command == "boost":
            return cmd_boost(cfg)
        return cmd_covariance(cfg)
    except (ConfigError, sx.ExprError, sx.ParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

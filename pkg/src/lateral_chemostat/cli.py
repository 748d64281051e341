"""Command-line front end.

One JSON config describes the growth law and the chemostat; the subcommand
picks the computation and flags override config fields::

    lateral-chemostat simulate    config.json --out run/
    lateral-chemostat equilibrium config.json --d 0
    lateral-chemostat sweep       config.json --jobs 4
    lateral-chemostat design      config.json --free-d --sref 5.9
    lateral-chemostat design      config.json --fixed-d 1 --curve

A JSON summary always goes to stdout (and to ``<out>/<command>.json``);
CSV files are written next to it.  Exit status: 0 ok, 2 config error,
3 numeric failure.
"""

import argparse
import copy
import json
import math
from importlib import resources
from pathlib import Path
import sys

import jsonschema
import numpy as np

from . import design as design_mod
from . import dmap
from .dynamics import ChemostatConfig, simulate
from .equilibria import (equilibria, positive_equilibrium, steady_state,
                         washout_equilibrium, washout_is_unique)
from .errors import (ConfigError, DomainError, InconsistencyError, IntegrationError,
                     UndefinedCaseError)
from .growth import from_dict

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

CONVERGENCE_TOL = 1e-4
DEFAULT_HORIZON_FACTOR = 1e3
DEFAULT_SAMPLES = 501


def load_schema():
    text = resources.files(__package__).joinpath("config.schema.json").read_text("utf-8")
    return json.loads(text)


def load_config(path):
    """Read and validate a run config.  Raises ``ConfigError``."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc})") from exc
    validate(raw)
    return raw


def validate(raw):
    try:
        jsonschema.validate(raw, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc


def apply_overrides(raw, args):
    """Copy of ``raw`` with command-line values patched in, re-validated."""
    cfg = copy.deepcopy(raw)
    for key in ("V1", "V2", "Q", "s_in", "d"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "sref", None) is not None:
        cfg["s_ref"] = args.sref
    sim = cfg.setdefault("simulate", {}) if args.command == "simulate" else None
    if sim is not None:
        if args.horizon is not None:
            sim["horizon"] = args.horizon
        if args.seed is not None:
            sim["seed"] = args.seed
        if args.random_initial:
            sim["initial"] = "random"
    if args.command == "sweep":
        sw = cfg.setdefault("sweep", {})
        for key in ("n", "d_min", "d_max"):
            if getattr(args, key) is not None:
                sw[key] = getattr(args, key)
    validate(cfg)
    return cfg


def chemostat_from(cfg, need_d=True):
    missing = [k for k in ("V1", "V2") + (("d",) if need_d else ()) if k not in cfg]
    if missing:
        raise ConfigError(f"config lacks {', '.join(missing)}")
    return ChemostatConfig(cfg["V1"], cfg["V2"], cfg["Q"], cfg["s_in"],
                           cfg.get("d", 0.0), from_dict(cfg["growth"]))


def _finite(x):
    """JSON-safe number: infinities and NaN become ``null``."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _dump(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


# --- subcommands --------------------------------------------------------------

def cmd_simulate(cfg, args):
    config = chemostat_from(cfg)
    opts = cfg.get("simulate", {})
    horizon = opts.get("horizon", DEFAULT_HORIZON_FACTOR * config.V / config.Q)
    initial = opts.get("initial", "random")
    seed = opts.get("seed", 0)
    if initial == "random":
        rng = np.random.default_rng(seed)
        initial = rng.uniform(0.0, config.s_in, size=4)
        initial[1::2] *= 0.5
    kwargs = {k: opts[k] for k in ("rtol", "atol") if k in opts}
    t_eval = np.linspace(0.0, horizon, args.samples)
    traj = simulate(config, list(initial), horizon, t_eval=t_eval, **kwargs)

    final = traj.final
    candidates = equilibria(config)
    reached = None
    for eq in candidates:
        gap = _distance(final, eq)
        if gap <= CONVERGENCE_TOL:
            reached = eq.kind.value
    summary = {
        "initial": [float(v) for v in initial],
        "horizon": horizon,
        "terminal_state": {k: _finite(v) for k, v in final._asdict().items()},
        "washout_unique": bool(washout_is_unique(config)),
        "predicted_equilibrium": _eq_json(steady_state(config)),
        "converged_to": reached,
        "distance_to_predicted": _distance(final, steady_state(config)),
    }
    files = {"trajectory.csv": traj.to_csv}
    return summary, files


def _distance(state, eq):
    """Max-norm gap between a terminal state and an equilibrium (absent tanks skipped)."""
    gaps = [abs(a - b) for a, b in zip(state, eq.state)
            if b is not None and not math.isnan(a)]
    return max(gaps)


def _eq_json(eq):
    out = eq.to_dict()
    for key in ("s1", "x1", "s2", "x2"):
        out[key] = _finite(out[key])
    return out


def cmd_equilibrium(cfg, args):
    config = chemostat_from(cfg)
    positive = positive_equilibrium(config)
    summary = {
        "layout": config.layout,
        "washout_unique": bool(washout_is_unique(config)),
        "washout": _eq_json(washout_equilibrium(config)),
        "positive": None if positive is None else _eq_json(positive),
    }
    return summary, {}


def cmd_sweep(cfg, args):
    config = chemostat_from(cfg, need_d=False)
    opts = cfg.get("sweep", {})
    grid = dmap.default_grid(config, n=opts.get("n", 200), d_min=opts.get("d_min"),
                             d_max=opts.get("d_max"), stop=opts.get("stop", dmap.NEAR_D_BAR))
    profile = dmap.sweep(config, grid, jobs=args.jobs)
    summary = profile.sidecar()
    summary["n_samples"] = len(profile.samples)
    summary["n_valid"] = sum(p.valid for p in profile.samples)
    return summary, {"sweep.csv": profile.to_csv}


def cmd_design(cfg, args):
    if "s_ref" not in cfg:
        raise ConfigError("design needs s_ref (config field or --sref)")
    opts = cfg.get("design", {})
    fixed = args.fixed_d
    if fixed is None and not args.free_d:
        fixed = opts.get("d")
    spec = design_mod.DesignSpec(cfg["Q"], cfg["s_in"], cfg["s_ref"], from_dict(cfg["growth"]))
    if fixed is None:
        result = design_mod.design_free_d(spec)
    else:
        result = design_mod.design_fixed_d(spec, fixed)
    summary = {"mode": "free-d" if fixed is None else "fixed-d"}
    summary.update({k: (_finite(v) if isinstance(v, float) else v)
                    for k, v in result.to_dict(spec.Q).items()})
    files = {}
    if args.curve:
        copts = opts.get("curve", {})
        n = copts.get("n", 200)
        if "d_min" in copts and "d_max" in copts:
            grid = np.geomspace(copts["d_min"], copts["d_max"], n)
        else:
            grid = design_mod.default_d_grid(spec, n)
        curve = design_mod.volume_curve(spec, grid, jobs=args.jobs)
        files["volume_curve.csv"] = curve.to_csv
    return summary, files


COMMANDS = {
    "simulate": cmd_simulate,
    "equilibrium": cmd_equilibrium,
    "sweep": cmd_sweep,
    "design": cmd_design,
}


# --- argument parsing ---------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="lateral-chemostat",
        description="Chemostat with a diffusively coupled lateral tank: "
                    "simulation, steady states, d-sweeps and minimal-volume design.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="JSON run configuration")
    common.add_argument("--out", type=Path, default=Path("."),
                        help="directory for output files (default: current)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for grids")
    for name in ("V1", "V2", "Q", "d"):
        common.add_argument(f"--{name}", type=float, help=f"override {name}")
    common.add_argument("--s-in", dest="s_in", type=float, help="override s_in")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="integrate the ODE")
    p.add_argument("--horizon", type=float, help="final time (default 1e3 V/Q)")
    p.add_argument("--seed", type=int, help="seed for a random initial state")
    p.add_argument("--random-initial", action="store_true",
                   help="ignore any initial state in the config")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                   help="number of output times in the trajectory CSV")

    sub.add_parser("equilibrium", parents=[common], help="steady states and stability")

    p = sub.add_parser("sweep", parents=[common], help="s1*, s2* against d")
    p.add_argument("--n", type=int, help="number of grid points")
    p.add_argument("--d-min", dest="d_min", type=float)
    p.add_argument("--d-max", dest="d_max", type=float)

    p = sub.add_parser("design", parents=[common], help="minimal-volume design")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--fixed-d", dest="fixed_d", type=float, metavar="D",
                      help="design at this diffusion rate")
    mode.add_argument("--free-d", dest="free_d", action="store_true",
                      help="optimise the diffusion rate as well")
    p.add_argument("--sref", type=float, help="required outlet substrate")
    p.add_argument("--curve", action="store_true",
                   help="also write the optimal volume against d")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = apply_overrides(load_config(args.config), args)
        summary, files = COMMANDS[args.command](cfg, args)
    except (ConfigError, UndefinedCaseError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InconsistencyError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    # everything computed: only now touch the file system
    args.out.mkdir(parents=True, exist_ok=True)
    for name, writer in files.items():
        writer(args.out / name)
    text = _dump(summary)
    (args.out / f"{args.command}.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

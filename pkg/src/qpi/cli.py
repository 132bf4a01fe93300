"""Command-line experiment runner: ``qpi run | baseline | sweep | list``.

Exit status: 0 success, 1 runtime failure (including a partial sweep),
2 configuration error, 3 training divergence.
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .catalog import SYSTEMS, get_system
from .config import dumps_config, from_preset, load_config
from .errors import ConfigError, DivergenceError, QPIError
from .io import atomic_write_text, write_csv, write_json
from .metrics import aggregate, build_report, evaluation_grid, rk4_invert, rmse
from .network import forward, save_checkpoint
from .presets import PRESETS
from .trainer import train

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2, 3


def _coord_names(system, n):
    if n == 1:
        return ["x"]
    if getattr(system, "kind", "") == "Soliton":
        return ["x", "t"]
    return ["x", "y"][:n]


def _rows(points, *columns):
    pts = np.asarray(points, dtype=float).reshape(len(columns[0]), -1)
    return np.column_stack([pts, *columns])


def write_potential_csv(path, system, points, learned):
    pts = np.asarray(points, dtype=float)
    names = _coord_names(system, 1 if pts.ndim == 1 else pts.shape[1])
    write_csv(path, [*names, "U_learned", "U_true"], _rows(pts, learned, system.potential(pts)))


def run_experiment(cfg, out_dir, log=None):
    """Train one configuration and write its artifacts; returns the report dict."""
    system = cfg.validate()
    spec = cfg.loss_spec()
    tcfg = cfg.train_config()
    start = time.perf_counter()
    models, history = train(tcfg, spec, system, cfg.initial_params(system), log=log)
    elapsed = time.perf_counter() - start
    potential = models[0] if isinstance(models, tuple) else models

    grid = evaluation_grid(system, cfg.grid)
    learned = forward(potential, grid)
    report = build_report(potential, system, grid, cfg.grid, seeds=[tcfg.seed], values=learned)
    report.metadata = {
        "preset": cfg.preset,
        "system": system.id,
        "loss": spec.kind,
        "truncation_order": spec.order if spec.kind == "wigner" else None,
        "initial_condition": list(spec.ic) if spec.ic is not None else None,
        "epochs": tcfg.epochs,
        "dataset_size": tcfg.dataset_size,
        "seed": tcfg.seed,
        "final_loss": history.losses[-1],
        "train_seconds": elapsed,
        "checksum": history.checksum,
    }
    if isinstance(models, tuple):
        report.metadata["rmse_wave"] = rmse(forward(models[1], grid), system.psi(grid))

    os.makedirs(out_dir, exist_ok=True)
    history.to_csv(os.path.join(out_dir, "history.csv"))
    write_potential_csv(os.path.join(out_dir, "potential.csv"), system, grid, learned)
    if report.energy_curve is not None:
        names = _coord_names(system, report.energy_curve.shape[1] - 1)
        write_csv(os.path.join(out_dir, "energy.csv"), [*names, "energy"], report.energy_curve)
    save_checkpoint(os.path.join(out_dir, "potential.qpic"), potential)
    if isinstance(models, tuple):
        save_checkpoint(os.path.join(out_dir, "wave.qpic"), models[1])
    atomic_write_text(os.path.join(out_dir, "config.txt"), dumps_config(cfg))
    out = report.to_json()
    write_json(os.path.join(out_dir, "report.json"), out)
    return out


def _parse_ic(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"--ic expects 'point,value', got {text!r}")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise ConfigError(f"--ic expects two numbers, got {text!r}") from None


def _parse_seeds(text):
    try:
        return [int(s) for s in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"--seeds expects integers, got {text!r}") from None


def _threads():
    raw = os.environ.get("QPI_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"QPI_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"QPI_THREADS must be a positive integer, got {raw!r}")
    return n


def _resolve_config(args):
    if bool(args.config) == bool(args.preset):
        raise ConfigError("give exactly one of --config or --preset")
    cfg = load_config(args.config) if args.config else from_preset(args.preset)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
        cfg.seeds = [args.seed]
    if args.grid is not None:
        cfg.grid = args.grid
    if args.ic is not None:
        cfg.loss["ic"] = _parse_ic(args.ic)
    if args.epochs is not None:
        cfg.train["epochs"] = args.epochs
    if args.out:
        cfg.output = args.out
    if not cfg.output:
        cfg.output = os.path.join("qpi-runs", cfg.preset or cfg.system.replace(":", "_"))
    return cfg


def _progress(args):
    if not args.verbose:
        return None
    return lambda epoch, loss: print(f"epoch {epoch} loss {loss:.6g}", file=sys.stderr) if epoch % 100 == 0 else None


def _summary(report, keys=("rmse_potential", "rmse_energy")):
    return " ".join(f"{k}={report[k]:.3e}" for k in keys if report.get(k) is not None)


def cmd_run(args):
    cfg = _resolve_config(args)
    cfg.validate()  # nothing is written for an invalid config
    report = run_experiment(cfg, cfg.output, log=_progress(args))
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(f"{cfg.output}: {_summary(report)}")
    return EXIT_OK


def cmd_baseline(args):
    system = get_system(args.system)
    if not system.stationary or system.dim != 1:
        raise ConfigError(f"RK4 baseline needs a 1D stationary system, got {system.id}")
    if args.ic is None:
        raise ConfigError("baseline needs --ic point,value")
    ic = _parse_ic(args.ic)
    count = args.grid or 401
    lo, hi = system.domain[0]
    grid = np.linspace(lo, hi, count)
    u = rk4_invert(system, grid, ic)
    report = build_report(None, system, grid, count, method="RK4", values=u)
    report.metadata = {"system": system.id, "initial_condition": list(ic)}
    out = report.to_json()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_potential_csv(os.path.join(args.out, "potential.csv"), system, grid, u)
        write_csv(os.path.join(args.out, "energy.csv"), ["x", "energy"], report.energy_curve)
        write_json(os.path.join(args.out, "report.json"), out)
    if args.json or not args.out:
        print(json.dumps(out, indent=2, sort_keys=True))
    else:
        print(f"{args.out}: {_summary(out)}")
    return EXIT_OK


def _sweep_one(job):
    cfg, out_dir = job
    try:
        return run_experiment(cfg, out_dir), None
    except QPIError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def cmd_sweep(args):
    cfg = _resolve_config(args)
    seeds = _parse_seeds(args.seeds) if args.seeds else list(cfg.seeds)
    if len(seeds) < 2:
        raise ConfigError("a sweep needs at least two seeds")
    jobs = []
    for i, seed in enumerate(seeds):
        c = cfg.with_seed(seed)
        c.seeds = [seed]
        c.validate()
        jobs.append((c, os.path.join(cfg.output, f"run-{i}-seed-{seed}")))
    workers = min(_threads(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]

    rows, failures = [], []
    for (c, _), (report, err) in zip(jobs, results):
        if err is not None:
            failures.append({"seed": c.seed, "error": err})
            continue
        rows.append((c.seed, report["rmse_potential"], report["rmse_energy"]))
    pot = aggregate([r[1] for r in rows])
    energy = aggregate([r[2] for r in rows])
    def cell(v):
        return "" if v is None else v

    table = [("seed", s, p, cell(e)) for s, p, e in rows]
    for stat in ("mean", "std"):
        table.append((stat, "", cell(pot[stat]), cell(energy[stat])))
    os.makedirs(cfg.output, exist_ok=True)
    write_csv(os.path.join(cfg.output, "sweep.csv"), ["row", "seed", "rmse_potential", "rmse_energy"], table)
    summary = {
        "seed_list": seeds,
        "rmse_potential": pot,
        "rmse_energy": energy,
        "partial": bool(failures),
        "failures": failures,
        "preset": cfg.preset,
        "system": cfg.system,
    }
    write_json(os.path.join(cfg.output, "aggregate.json"), summary)
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        std = f" +- {pot['std']:.2e}" if pot["std"] is not None else ""
        mean = f"{pot['mean']:.3e}" if pot["mean"] is not None else "n/a"
        print(f"{cfg.output}: rmse_potential {mean}{std} over {len(rows)}/{len(seeds)} seeds")
    return EXIT_FAILURE if failures else EXIT_OK


def catalog_listing():
    entries = []
    for _, params, example in SYSTEMS.values():
        entries.append({"type": "system", "id": example, "params": sorted(params)})
    for name, p in PRESETS.items():
        entries.append({"type": "preset", "id": name, "system": p.system, "description": p.describe()})
    return entries


def cmd_list(args):
    entries = catalog_listing()
    if args.json:
        print(json.dumps(entries, indent=2))
        return EXIT_OK
    print("systems:")
    for e in entries:
        if e["type"] == "system":
            print(f"  {e['id']:<18} params: {', '.join(e['params']) or '-'}")
    print("presets:")
    for e in entries:
        if e["type"] == "preset":
            print(f"  {e['id']:<18} {e['description']}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="qpi", description="Learn quantum potentials from wave functions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_flags(p):
        p.add_argument("--config", help="experiment config file (key = value lines)")
        p.add_argument("--preset", help="built-in preset name (see 'qpi list')")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="override the training seed")
        p.add_argument("--grid", type=int, help="evaluation grid points per dimension")
        p.add_argument("--ic", help="initial condition 'point,value'")
        p.add_argument("--epochs", type=int, help="override the number of epochs")
        p.add_argument("--json", action="store_true", help="print the report as JSON")
        p.add_argument("-v", "--verbose", action="store_true", help="log the loss every 100 epochs")

    p = sub.add_parser("run", help="train one experiment")
    experiment_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="train over several seeds and aggregate mean +- std")
    experiment_flags(p)
    p.add_argument("--seeds", help="comma-separated seeds (default: the config's 'seeds')")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("baseline", help="RK4 inversion of the kinetic ratio")
    p.add_argument("system", help="system id, e.g. 'pt:l=2,mu=1'")
    p.add_argument("--ic", help="initial condition 'point,value'")
    p.add_argument("--grid", type=int, help="number of grid points (default 401)")
    p.add_argument("--out", help="output directory (default: print JSON only)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("list", help="list systems and presets")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"qpi: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"qpi: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except QPIError as exc:
        print(f"qpi: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def entry_point():
    sys.exit(main())

"""Command line entry point: ``kcurves <command> [config.yaml] [options]``.

Each sweep writes, under the output directory,

* ``<prefix>_<group>.csv`` per curve, columns ``n,value_mean,value_sem,replicas,...``
* ``<prefix>.meta.json`` with the resolved config, seed, version, fits and wall time
* ``<prefix>.cells.jsonl`` with one line per finished (group, replica) cell,
  which ``--resume`` reads back to skip completed work.

The worker count comes from the ``KCURVES_WORKERS`` environment variable
(default 1).  Output does not depend on it.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import json
import logging
import os
import sys
import time

import numpy as np

from ._seeding import derive_seed
from .config import DEFAULTS, load_config
from .errors import ConfigError, FitError
from .experiments import SWEEPS, aggregate, fit_group, run_group
from .fitting import fit_power_law
from .spectral import beta_from_tail

log = logging.getLogger("kcurves")

__all__ = ["main", "run", "write_curve_csv", "read_curve_csv"]


def _version():
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        from . import __version__

        return __version__


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_curve_csv(path, curve) -> None:
    """Write a learning curve with 17 significant digits and LF endings."""
    extra = list(curve.extra)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["n", "value_mean", "value_sem", "replicas"] + extra)
        for i in range(len(curve.n)):
            row = [_fmt(int(curve.n[i])), _fmt(curve.value[i]), _fmt(curve.sem[i]), _fmt(int(curve.replicas[i]))]
            row += [_fmt(curve.extra[k][i]) for k in extra]
            w.writerow(row)


def read_curve_csv(path):
    """Columns of a curve CSV as a dict of float arrays."""
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    return {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(header)}


def _config_digest(cfg) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _load_cells(path, digest):
    done = {}
    if not os.path.exists(path):
        return done
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines:
        return done
    head = json.loads(lines[0])
    if head.get("config") != digest:
        raise ConfigError(f"{path} was written for a different configuration; rerun without --resume")
    for line in lines[1:]:
        try:
            rec = json.loads(line)
        except json.JSONDecodeError:
            break  # a cell cut off mid-write is recomputed
        done[(rec["group"], rec["replica"])] = rec["result"]
    return done


def _cell(args):
    command, cfg, g, r = args
    seed = derive_seed(int(cfg["seed"]), command, g, r)
    res = run_group(command, cfg, g, r, seed)
    return g, r, {k: np.asarray(v, dtype=float).tolist() for k, v in res.items()}


def run(command, cfg, out_dir=None, resume=False, workers=None) -> dict:
    """Run a sweep and write its CSV files; returns the metadata dict."""
    t0 = time.time()
    out_dir = out_dir or cfg["output"]["dir"]
    prefix = cfg["output"]["prefix"] or command
    os.makedirs(out_dir, exist_ok=True)
    spec = SWEEPS[command]
    groups = spec.plan(cfg)
    cells = [(g, r) for g, grp in enumerate(groups) for r in range(grp.replicas)]
    digest = _config_digest({"command": command, **cfg})
    sidecar = os.path.join(out_dir, f"{prefix}.cells.jsonl")
    done = _load_cells(sidecar, digest) if resume else {}
    todo = [c for c in cells if c not in done]
    log.info("%s: %d cells, %d to run", command, len(cells), len(todo))
    workers = workers or int(os.environ.get("KCURVES_WORKERS", "1"))
    mode = "a" if resume and os.path.exists(sidecar) and done else "w"
    with open(sidecar, mode) as sink:
        if mode == "w":
            sink.write(json.dumps({"config": digest}) + "\n")
        jobs = [(command, cfg, g, r) for g, r in todo]
        if workers > 1 and len(jobs) > 1:
            with concurrent.futures.ProcessPoolExecutor(workers) as pool:
                results = pool.map(_cell, jobs)
                for g, r, res in results:
                    done[(g, r)] = res
                    sink.write(json.dumps({"group": g, "replica": r, "result": res}) + "\n")
                    sink.flush()
        else:
            for job in jobs:
                g, r, res = _cell(job)
                done[(g, r)] = res
                sink.write(json.dumps({"group": g, "replica": r, "result": res}) + "\n")
                sink.flush()
    meta = {
        "command": command,
        "config": cfg,
        "seed": cfg["seed"],
        "version": _version(),
        "groups": [],
    }
    for g, grp in enumerate(groups):
        rows = [done[(g, r)] for r in range(grp.replicas)]
        curve = aggregate(grp, rows)
        path = os.path.join(out_dir, f"{prefix}_{grp.tag}.csv")
        write_curve_csv(path, curve)
        fit = fit_group(command, cfg, grp, curve)
        info = {"label": grp.label, "csv": os.path.basename(path)}
        if fit is not None:
            info["fit"] = {"exponent": fit.exponent, "beta": fit.beta, "prefactor": fit.prefactor,
                           "window": list(fit.window), "r_squared": fit.r_squared, "points": fit.n_points}
        if spec.theory is not None:
            info.update(spec.theory(cfg, grp))
        if "jitter" in curve.extra:
            info["max_jitter"] = float(np.max(curve.extra["jitter"]))
        meta["groups"].append(info)
        print(f"{path}: " + (f"beta = {fit.beta:.4g} over n in [{fit.window[0]:g}, {fit.window[1]:g}]" if fit else "no fit"))
    meta["wall_time_s"] = time.time() - t0
    with open(os.path.join(out_dir, f"{prefix}.meta.json"), "w") as f:
        json.dump(meta, f, indent=2, default=str)
        f.write("\n")
    return meta


def _fit_command(args) -> int:
    data = read_curve_csv(args.csv)
    n, y = data["n"], data["value_mean"]
    window = tuple(args.window) if args.window else None
    if args.method == "loglog":
        ok = y > 0
        fit = fit_power_law(n[ok], y[ok], window)
    else:
        from .fitting import LearningCurve

        nt = args.n_tilde or int(data.get("n_tilde", n).max())
        fit = beta_from_tail(LearningCurve(n, y, 0.0, 1), window, "truncated", nt)
    res = {"csv": args.csv, "exponent": fit.exponent, "beta": fit.beta, "prefactor": fit.prefactor,
           "window": list(fit.window), "r_squared": fit.r_squared, "points": fit.n_points}
    print(json.dumps(res))
    with open(os.path.splitext(args.csv)[0] + ".fit.json", "w") as f:
        json.dump(res, f, indent=2)
        f.write("\n")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="kcurves", description="Learning-curve sweeps for kernel methods.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in DEFAULTS:
        s = sub.add_parser(name)
        s.add_argument("config", nargs="?", help="YAML configuration file")
        s.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a configuration entry, e.g. --set replicas=10")
        s.add_argument("--out", help="output directory (default: output.dir)")
        s.add_argument("--resume", action="store_true", help="skip cells already in the cell log")
    f = sub.add_parser("fit", help="re-fit a stored curve")
    f.add_argument("csv")
    f.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"))
    f.add_argument("--method", choices=["loglog", "truncated"], default="loglog")
    f.add_argument("--n-tilde", type=int, help="number of modes, for the truncated tail fit")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "fit":
            return _fit_command(args)
        cfg = load_config(args.command, args.config, args.overrides)
        run(args.command, cfg, args.out, args.resume)
    except (ConfigError, FitError) as exc:
        print(f"kcurves: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

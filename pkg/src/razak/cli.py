"""Command-line driver: build towers, run verification suites and
experiments, emit deterministic JSON/CSV reports and gnuplot-ready data.

Exit codes: 0 all selected checks pass, 1 invariant failure, 2 bad
configuration, 3 resource limit.  Reports are byte-deterministic for a fixed
config: floats are serialized with 17 significant digits and files are
written atomically (temp file + rename).  RAZAK_WORKERS sets the worker-pool
size for experiment fan-out (default 1, inline).
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import sys
from typing import List, Optional

from .blocks import BuildingBlock
from .errors import ConfigError, RazakError, ResourceLimit
from . import tower as tower_mod
from . import verify

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3

SCHEMA_TEXT = """\
razak file formats
==================

report.json
  config   : the resolved run configuration (block, depth, grid, seed, ...)
  checks   : list of {name, value, bound, pass, detail}
  passed   : true iff every check passed
  summary  : {pass: count, fail: count}
  Floats are serialized with 17 significant digits; identical configs give
  byte-identical reports.

tower.json (tower build)
  seed       : {n, a} of the seed block A(n, (a+1)n)
  depth      : number of stages
  grid_size  : number of grid intervals (power of two)
  stages     : [{n, a}] per stage
  steps      : per connecting map:
                 branches     : [{l, d, constant}]  exact dyadic branch maps
                 unitary_path : base64 little-endian float64 (re/im pairs,
                                row-major), one string per grid point

eig-density.csv : j, x, delta, bound       (.dat: j x delta)
trace-gap.csv   : j, gap, modulus, bound   (.dat: j gap)
approx-unit.csv : n, defect                (.dat: n defect)
central.csv     : metric, value, bound     (.dat: index value)
"""


def _fmt_float(x: float) -> str:
    return f"{x:.17g}"


def _emit_json(value, out: List[str]):
    if value is None:
        out.append("null")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(_fmt_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, dict):
        out.append("{")
        first = True
        for k, v in value.items():
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(str(k)))
            out.append(":")
            _emit_json(v, out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, v in enumerate(value):
            if i:
                out.append(",")
            _emit_json(v, out)
        out.append("]")
    else:
        # numpy scalars and Fractions funnel through float/str
        try:
            _emit_json(float(value), out)
        except (TypeError, ValueError):
            out.append(json.dumps(str(value)))


def dumps_deterministic(doc) -> str:
    out: List[str] = []
    _emit_json(doc, out)
    return "".join(out)


def atomic_write(path: str, text: str):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _coerce(value):
    import numpy as np
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def checks_doc(checks) -> list:
    rows = []
    for c in checks:
        rows.append({
            "name": c.name,
            "value": _coerce(c.value),
            "bound": _coerce(c.bound) if not isinstance(c.bound, tuple) else list(c.bound),
            "pass": bool(c.passed),
            "detail": c.detail,
        })
    return rows


def write_report(out_dir: str, config: dict, checks) -> bool:
    passed = all(c.passed for c in checks)
    doc = {
        "config": config,
        "checks": checks_doc(checks),
        "passed": passed,
        "summary": {
            "pass": sum(1 for c in checks if c.passed),
            "fail": sum(1 for c in checks if not c.passed),
        },
    }
    atomic_write(os.path.join(out_dir, "report.json"), dumps_deterministic(doc) + "\n")
    return passed


def write_csv(path: str, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            _fmt_float(v) if isinstance(v, float) else str(v) for v in row))
    atomic_write(path, "\n".join(lines) + "\n")


def write_dat(path: str, rows, columns):
    lines = []
    for row in rows:
        vals = [row[i] for i in columns]
        lines.append(" ".join(
            _fmt_float(v) if isinstance(v, float) else str(v) for v in vals))
    atomic_write(path, "\n".join(lines) + "\n")


def load_config(args) -> dict:
    cfg = {
        "block": {"n": 1, "a": 1},
        "depth": 3,
        "grid": 256,
        "seed": 20260809,
        "pairs": 20,
        "trials": 100,
        "out": ".",
        "tolerances": {},
    }
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        cfg.update(loaded)
    if getattr(args, "depth", None) is not None:
        cfg["depth"] = args.depth
    if getattr(args, "grid", None) is not None:
        cfg["grid"] = args.grid
    if getattr(args, "out", None) is not None:
        cfg["out"] = args.out
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "block", None):
        cfg["block"] = {"n": args.block[0], "a": args.block[1]}
    _validate_config(cfg)
    return cfg


def _validate_config(cfg: dict):
    try:
        n, a = int(cfg["block"]["n"]), int(cfg["block"]["a"])
        depth, grid = int(cfg["depth"]), int(cfg["grid"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}")
    if n < 1 or a < 1:
        raise ConfigError(f"seed block needs n, a >= 1 (got n={n}, a={a})")
    if depth < 1:
        raise ConfigError("depth must be >= 1")
    if grid < 2 or grid & (grid - 1):
        raise ConfigError(f"grid size must be a power of two >= 2, got {grid}")
    if not isinstance(cfg.get("tolerances", {}), dict):
        raise ConfigError("tolerances must be an object")


def make_context(cfg: dict) -> verify.VerifyContext:
    return verify.VerifyContext(
        seed_block=BuildingBlock(cfg["block"]["n"], cfg["block"]["a"]),
        depth=cfg["depth"],
        grid_size=cfg["grid"],
        rng_seed=cfg["seed"],
        pairs_per_map=cfg.get("pairs", 20),
        projection_trials=cfg.get("trials", 100),
        tolerances={k: float(v) for k, v in cfg.get("tolerances", {}).items()},
    )


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("RAZAK_WORKERS", "1")))
    except ValueError:
        return 1


_POOL_CTX = {}


def _pool_init(cfg):
    _POOL_CTX["ctx"] = make_context(cfg)


def _density_task(task):
    j, x = task
    ctx = _POOL_CTX["ctx"]
    return (j, x, tower_mod.eig_density(ctx.tower, j, x).delta, 2.0 ** -(j - 1))


def density_rows_parallel(cfg: dict, ctx: verify.VerifyContext):
    js = list(range(2, ctx.tower.depth + 1))
    xs = [k / 15 for k in range(16)]
    tasks = [(j, x) for j in js for x in xs]
    workers = worker_count()
    if workers == 1:
        _pool_init(cfg)
        return [_density_task(t) for t in tasks]
    with multiprocessing.Pool(workers, initializer=_pool_init, initargs=(cfg,)) as pool:
        return pool.map(_density_task, tasks)


def cmd_tower_build(cfg: dict) -> int:
    ctx = make_context(cfg)
    t = ctx.tower
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    atomic_write(os.path.join(out_dir, "tower.json"),
                 dumps_deterministic(tower_mod.tower_to_doc(t)) + "\n")
    checks = verify.growth_suite(ctx)
    passed = write_report(out_dir, cfg, checks)
    for c in checks:
        print(c.row())
    print(f"tower with stages {[str(b) for b in t.stages]} -> {out_dir}/tower.json")
    return EXIT_OK if passed else EXIT_INVARIANT


def cmd_tower_verify(cfg: dict) -> int:
    ctx = make_context(cfg)
    checks = verify.run_suites(ctx)
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    passed = write_report(out_dir, cfg, checks)
    for c in checks:
        print(c.row())
    return EXIT_OK if passed else EXIT_INVARIANT


def cmd_experiment(cfg: dict, which: str) -> int:
    ctx = make_context(cfg)
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    if which == "eig-density":
        rows = density_rows_parallel(cfg, ctx)
        checks = verify.density_suite(ctx)
        write_csv(os.path.join(out_dir, "eig-density.csv"),
                  ["j", "x", "delta", "bound"], rows)
        write_dat(os.path.join(out_dir, "eig-density.dat"), rows, (0, 1, 2))
    elif which == "trace-gap":
        rows = verify.trace_gap_rows(ctx)
        checks = verify.trace_gap_suite(ctx)
        write_csv(os.path.join(out_dir, "trace-gap.csv"),
                  ["j", "gap", "modulus", "bound"], rows)
        write_dat(os.path.join(out_dir, "trace-gap.dat"), rows, (0, 1))
    elif which == "approx-unit":
        rows = verify.approx_unit_rows(ctx)
        checks = verify.approx_unit_suite(ctx)
        write_csv(os.path.join(out_dir, "approx-unit.csv"), ["n", "defect"], rows)
        write_dat(os.path.join(out_dir, "approx-unit.dat"), rows, (0, 1))
    elif which == "central":
        checks = verify.central_suite(ctx)
        rows = [(c.name, _coerce(c.value), _coerce(c.bound)) for c in checks]
        write_csv(os.path.join(out_dir, "central.csv"),
                  ["metric", "value", "bound"], rows)
        write_dat(os.path.join(out_dir, "central.dat"),
                  [(i, r[1]) for i, r in enumerate(rows)
                   if isinstance(r[1], (int, float))], (0, 1))
    else:
        raise ConfigError(f"unknown experiment {which!r}")
    passed = write_report(out_dir, cfg, checks)
    for c in checks:
        print(c.row())
    return EXIT_OK if passed else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="razak",
        description="Build and verify inductive systems of Razak building blocks.")
    p.add_argument("--schema", action="store_true",
                   help="print report/CSV schemas and exit")
    sub = p.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--depth", type=int)
        sp.add_argument("--grid", type=int)
        sp.add_argument("--out")
        sp.add_argument("--seed", type=int, help="RNG seed for sampled inputs")
        sp.add_argument("--block", type=int, nargs=2, metavar=("N", "A"),
                        help="seed block parameters n and a")

    tower_p = sub.add_parser("tower", help="build or verify a tower")
    tower_sub = tower_p.add_subparsers(dest="tower_command")
    for name in ("build", "verify"):
        common(tower_sub.add_parser(name))

    exp_p = sub.add_parser("experiment", help="run one experiment")
    exp_sub = exp_p.add_subparsers(dest="experiment_command")
    for name in ("eig-density", "trace-gap", "approx-unit", "central"):
        common(exp_sub.add_parser(name))
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.schema:
        print(SCHEMA_TEXT)
        return EXIT_OK
    try:
        if args.command == "tower":
            if args.tower_command not in ("build", "verify"):
                raise ConfigError("usage: razak tower {build|verify}")
            cfg = load_config(args)
            return (cmd_tower_build(cfg) if args.tower_command == "build"
                    else cmd_tower_verify(cfg))
        if args.command == "experiment":
            if args.experiment_command is None:
                raise ConfigError("usage: razak experiment {eig-density|trace-gap|"
                                  "approx-unit|central}")
            cfg = load_config(args)
            return cmd_experiment(cfg, args.experiment_command)
        parser.print_help()
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except RazakError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())

"""Experiment runner CLI: run, list-experiments, validate-config.

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 config error. Every
run writes report.json, report.csv, summary.txt, the resolved config, and a
manifest (tool version, seed, wall time). Floats are printed with 12
significant digits so byte-identical reruns are checkable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from importlib import metadata
from pathlib import Path

from .config import ConfigError, load_config_file, resolve_workers, validate_config
from .experiments import EXPERIMENTS


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.12g}"
    return v


def rows_to_csv(rows) -> str:
    if not rows:
        return ""
    keys = sorted({k for row in rows for k in row})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(keys)
    for row in rows:
        writer.writerow([_fmt(row.get(k, "")) for k in keys])
    return buf.getvalue()


def cmd_run(args) -> int:
    try:
        raw = load_config_file(args.config)
        if args.experiment:
            raw["experiment"] = args.experiment
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.outdir:
            raw["outdir"] = args.outdir
        if args.graph_file:
            raw["graph"] = {"kind": "file", "file": args.graph_file}
        cfg = validate_config(raw)
        workers = resolve_workers(cfg, args.workers)
        cfg["workers"] = workers
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    exp = EXPERIMENTS[cfg["experiment"]]
    t0 = time.monotonic()
    result = exp.runner(cfg, workers)
    wall = time.monotonic() - t0

    outdir = Path(cfg["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.csv").write_text(rows_to_csv(result.rows))
    (outdir / "report.json").write_text(json.dumps({
        "experiment": result.name,
        "verdicts": result.verdicts,
        "rows": result.rows,
        "data": result.data,
    }, indent=2, sort_keys=True, default=str))
    (outdir / "resolved_config.json").write_text(
        json.dumps(cfg, indent=2, sort_keys=True))
    try:
        version = metadata.version("dynperc")
    except metadata.PackageNotFoundError:
        version = "unknown"
    (outdir / "manifest.json").write_text(json.dumps({
        "tool": "dynperc",
        "version": version,
        "experiment": result.name,
        "seed": cfg["seed"],
        "workers": workers,
        "wall_time_s": wall,
    }, indent=2, sort_keys=True))

    lines = list(result.summary)
    for name, ok in sorted(result.verdicts.items()):
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {name}")
    text = "\n".join(lines) + "\n"
    (outdir / "summary.txt").write_text(text)
    print(text, end="")
    return 0 if result.passed else 1


def cmd_list(args) -> int:
    for name in sorted(EXPERIMENTS):
        print(f"{name:28s} {EXPERIMENTS[name].description}")
    print(f"{len(EXPERIMENTS)} experiments registered")
    return 0


def cmd_validate(args) -> int:
    try:
        cfg = validate_config(load_config_file(args.config))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(cfg, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynperc",
        description="random walk on dynamical percolation: experiments and checks")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("--config", required=True, help="TOML or JSON config")
    run.add_argument("--experiment", help="override the configured experiment")
    run.add_argument("--seed", type=int, help="override the seed")
    run.add_argument("--outdir", help="override the output directory")
    run.add_argument("--workers", type=int, help="worker count (beats DYNPERC_WORKERS)")
    run.add_argument("--graph-file", help="edge-list file overriding the graph")
    run.set_defaults(func=cmd_run)

    lst = sub.add_parser("list-experiments", help="print the experiment catalog")
    lst.set_defaults(func=cmd_list)

    val = sub.add_parser("validate-config", help="validate a config file")
    val.add_argument("--config", required=True)
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

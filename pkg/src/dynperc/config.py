"""Experiment configuration: loading, schema validation, graph builders.

A config is a single TOML or JSON mapping. Unknown keys are rejected by
name. The resolved (defaulted, overridden) config is persisted next to every
run's outputs so reruns are reproducible from the artifact alone.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from . import graphs


class ConfigError(ValueError):
    pass


_ALLOWED_KEYS = {
    "experiment": str,
    "graph": dict,
    "mu": (int, float, list),
    "p": (int, float, list),
    "seed": int,
    "outdir": str,
    "mode": str,
    "workers": int,
    "n_samples": int,
    "n_regens": int,
    "n_steps": int,
    "n_events": int,
    "eps": (int, float),
    "delta": (int, float, list),
    "d_values": list,
    "target": int,
    "x0": int,
    "budget": int,
    "tolerance": (int, float),
}

_GRAPH_KEYS = {"kind", "n", "d", "leaves", "pairs", "file"}

DEFAULTS = {
    "graph": {"kind": "cycle", "n": 4},
    "mu": 1.0,
    "p": 0.5,
    "seed": 0,
    "outdir": "out",
    "mode": "exact",
    "workers": 1,
}


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            return tomllib.loads(text)
        except Exception as exc:
            raise ConfigError(f"invalid TOML: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc


def validate_config(raw: dict) -> dict:
    """Type-check against the schema; reject unknown keys by name."""
    from .experiments import EXPERIMENTS

    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    for key, value in raw.items():
        if key not in _ALLOWED_KEYS:
            raise ConfigError(f"unknown config key: {key!r}")
        expected = _ALLOWED_KEYS[key]
        if not isinstance(value, expected):
            raise ConfigError(f"config key {key!r} has invalid type "
                              f"{type(value).__name__}")
    if "experiment" not in raw:
        raise ConfigError("config must name an experiment")
    if raw["experiment"] not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment: {raw['experiment']!r}")
    if "graph" in raw:
        unknown = set(raw["graph"]) - _GRAPH_KEYS
        if unknown:
            raise ConfigError(f"unknown graph key: {sorted(unknown)[0]!r}")
    if "mode" in raw and raw["mode"] not in ("exact", "monte-carlo", "both"):
        raise ConfigError(f"invalid mode: {raw['mode']!r}")
    cfg = dict(DEFAULTS)
    cfg.update(raw)
    return cfg


def resolve_workers(cfg: dict, cli_workers=None) -> int:
    """Precedence: CLI flag > DYNPERC_WORKERS env var > config > default."""
    if cli_workers is not None:
        return int(cli_workers)
    env = os.environ.get("DYNPERC_WORKERS")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"DYNPERC_WORKERS is not an integer: {env!r}") from exc
    return int(cfg.get("workers", 1))


def build_graph(spec: dict) -> graphs.Graph:
    kind = spec.get("kind")
    if kind == "cycle":
        return graphs.cycle(int(spec["n"]))
    if kind == "path":
        return graphs.path(int(spec["n"]))
    if kind == "star":
        return graphs.star(int(spec["leaves"]))
    if kind == "complete":
        return graphs.complete(int(spec["n"]))
    if kind == "torus":
        return graphs.build_torus(int(spec["n"]), int(spec["d"]))
    if kind == "hypercube":
        return graphs.build_hypercube(int(spec["d"]))
    if kind == "edges":
        return graphs.build_from_edges(int(spec["n"]),
                                       [tuple(pair) for pair in spec["pairs"]])
    if kind == "file":
        return graphs.read_edge_list(Path(spec["file"]).read_text())
    raise ConfigError(f"unknown graph kind: {kind!r}")


def as_list(v):
    return list(v) if isinstance(v, list) else [v]

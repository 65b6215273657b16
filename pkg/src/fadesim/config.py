"""Experiment config files: INI sections of ``key = value`` pairs.

Example (every key is optional; defaults reproduce the 50-agent setup)::

    [model]
    file =                  # sensing-matrix file; empty = generate
    agents = 50
    rows = 8                # d_n of each generated H_n
    rank = 4                # rank of each generated H_n
    seed = 1
    theta = 100 120 70 90 200
    blind_agent = 1         # zero out column blind_coordinate of H_blind_agent
    blind_coordinate = 3

    [network]
    file =                  # ensemble file; empty = generate
    weights_file =          # explicit weight matrices; empty = Metropolis
    edge_sets = 15
    density = 0.022
    seed = 2

    [estimators]
    enabled = fade ci ml
    ci_r = 0.05
    ci_gain = auto          # beta(t) = ci_gain / t**ci_r

    [run]
    horizon = 5000
    runs = 100
    base_seed = 2024
    record = errors         # or: estimates
    decimate = 10
    batch = 25
    workers = 1

    [output]
    trajectory = no         # write trajectory.csv for run 0
    trajectory_agent = 1
    trajectory_coordinate = 3
    agents = all            # agents written to curves.csv, e.g. "1 2 3"

Agent and coordinate numbers are 1-based.  Relative paths are resolved
against the config file's directory.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .harness import ExperimentConfig

SCHEMA = {
    "model": {
        "file": ("model_file", "path"),
        "agents": ("agents", int),
        "rows": ("rows", int),
        "rank": ("rank", int),
        "seed": ("model_seed", int),
        "theta": ("theta", "floats"),
        "blind_agent": ("blind_agent", int),
        "blind_coordinate": ("blind_coordinate", int),
    },
    "network": {
        "file": ("ensemble_file", "path"),
        "weights_file": ("weights_file", "path"),
        "edge_sets": ("edge_sets", int),
        "density": ("density", float),
        "seed": ("network_seed", int),
    },
    "estimators": {
        "enabled": ("estimators", "words"),
        "ci_r": ("ci_r", float),
        "ci_gain": ("ci_gain", "gain"),
    },
    "run": {
        "horizon": ("horizon", int),
        "runs": ("runs", int),
        "base_seed": ("base_seed", int),
        "record": ("record", str),
        "decimate": ("decimate", int),
        "batch": ("batch", int),
        "workers": ("workers", int),
    },
    "output": {
        "trajectory": ("trajectory", "bool"),
        "trajectory_agent": ("trajectory_agent", int),
        "trajectory_coordinate": ("trajectory_coordinate", int),
        "agents": ("agents", "agents"),
    },
}


@dataclass(frozen=True)
class OutputOptions:
    trajectory: bool = False
    trajectory_agent: int = 1
    trajectory_coordinate: int = 1
    agents: tuple | None = None  # None = all


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for i, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return i
    return None


def _convert(raw: str, kind, base: Path):
    if kind == "path":
        return str((base / raw).resolve()) if raw else None
    if kind == "floats":
        return tuple(float(x) for x in raw.replace(",", " ").split())
    if kind == "words":
        return tuple(w.lower() for w in raw.replace(",", " ").split())
    if kind == "gain":
        return "auto" if raw.lower() == "auto" else float(raw)
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "yes", "true", "on"):
            return True
        if low in ("0", "no", "false", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "agents":
        return None if raw.lower() == "all" else tuple(int(x) for x in raw.replace(",", " ").split())
    return kind(raw)


def parse_config_text(text: str, base_dir=".", source=None) -> tuple[ExperimentConfig, OutputOptions]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=str(source or "<config>"))
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(exc.message.splitlines()[0], source=source, line=line) from None
    base = Path(base_dir)
    exp_kwargs, out_kwargs = {}, {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", source=source, line=_line_of_section(text, section))
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(
                    f"unknown key in [{section}]", source=source, line=_line_of(text, section, key), field=f"{section}.{key}"
                )
            name, kind = SCHEMA[section][key]
            try:
                value = _convert(raw.strip(), kind, base)
            except ValueError as exc:
                raise ConfigError(str(exc), source=source, line=_line_of(text, section, key), field=f"{section}.{key}") from None
            (out_kwargs if section == "output" else exp_kwargs)[name] = value
    try:
        cfg = ExperimentConfig(**exp_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc), source=source) from None
    if out_kwargs.get("trajectory_coordinate", 1) > cfg.dim or out_kwargs.get("trajectory_coordinate", 1) < 1:
        raise ConfigError("trajectory_coordinate out of range", source=source, field="output.trajectory_coordinate")
    return cfg, OutputOptions(**out_kwargs)


def _line_of_section(text: str, section: str) -> int | None:
    for i, line in enumerate(text.splitlines(), start=1):
        if re.match(rf"\s*\[{re.escape(section)}\]", line):
            return i
    return None


def load_config(path) -> tuple[ExperimentConfig, OutputOptions]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=path) from None
    return parse_config_text(text, path.parent, path)


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, tuple):
        return " ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_to_text(cfg: ExperimentConfig, out: OutputOptions | None = None) -> str:
    """Render a config that :func:`parse_config_text` reads back to an equal object."""
    values = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    if out is not None:
        out_values = {f.name: getattr(out, f.name) for f in fields(out)}
    lines = []
    for section, keys in SCHEMA.items():
        if section == "output" and out is None:
            continue
        lines.append(f"[{section}]")
        for key, (name, _kind) in keys.items():
            src = out_values if section == "output" else values
            value = src[name]
            if section == "output" and name == "agents" and value is None:
                value = "all"
            lines.append(f"{key} = {_format(value)}")
        lines.append("")
    return "\n".join(lines)

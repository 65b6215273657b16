"""Command-line front end.

    fadesim validate CONFIG
    fadesim run CONFIG [--out DIR] [--runs R] [--seed S] [--horizon T] [--workers W]

``--out`` falls back to ``$FADESIM_OUT``.  Exit status: 0 ok, 1 usage or
config error, 2 assumption check failed, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import network as net
from .config import OutputOptions, config_to_text, load_config
from .errors import ConfigError
from .harness import Experiment, McSummary, run_monte_carlo, run_trajectory, with_overrides
from .model import write_model
from .validate import spectral_summary, validate_config

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3
OUT_ENV = "FADESIM_OUT"

CURVE_COLUMNS = (
    "estimator", "agent", "t", "mse", "mse_se", "scaled_mse", "scaled_mse_se",
    "bias_norm", "ml_mse", "ratio_to_ml",
)


@dataclass(frozen=True)
class OutputBundle:
    curves: Path
    manifest: Path
    config: Path
    trajectory: Path | None
    summary: McSummary


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    return repr(float(x))


def write_curves(summary: McSummary, path: Path, agents=None) -> None:
    any_curve = next(iter(summary.curves.values()))
    dim = any_curve.bias.shape[-1]
    header = list(CURVE_COLUMNS) + [f"mse_{i + 1}" for i in range(dim)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for name, c in summary.curves.items():
            scaled, scaled_se, bias_norm = c.scaled_mse, c.scaled_mse_se, c.bias_norm
            n_agents = c.mse.shape[1]
            if name == "ml":
                cols = [(0, "central")]
            else:
                picks = range(n_agents) if agents is None else [a - 1 for a in agents]
                cols = [(a, str(a + 1)) for a in picks]
            for i, t in enumerate(c.times):
                ml = c.ml_mse[i]
                for a, label in cols:
                    w.writerow([
                        name, label, int(t), _fmt(c.mse[i, a]), _fmt(c.mse_se[i, a]), _fmt(scaled[i, a]),
                        _fmt(scaled_se[i, a]), _fmt(bias_norm[i, a]), _fmt(ml), _fmt(c.mse[i, a] / ml),
                        *(_fmt(v) for v in c.coord_mse[i, a]),
                    ])
                if name != "ml":
                    mse = c.mse[i].mean()
                    w.writerow([
                        name, "all", int(t), _fmt(mse), "", _fmt(t * mse), "", _fmt(bias_norm[i].mean()),
                        _fmt(ml), _fmt(mse / ml), *(_fmt(v) for v in c.coord_mse[i].mean(axis=0)),
                    ])


def write_trajectory(exp: Experiment, out: OutputOptions, path: Path) -> None:
    trace = run_trajectory(exp, 0, record="estimates", decimate=1)
    a, c = out.trajectory_agent - 1, out.trajectory_coordinate - 1
    target = exp.theta[c]
    scale = abs(target) if target != 0 else 1.0
    names = list(trace.records)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + names + [f"{n}_rel_error" for n in names])
        for i, t in enumerate(trace.times):
            vals = [trace.records[n][i, 0 if n == "ml" else a, c] for n in names]
            w.writerow([int(t)] + [_fmt(v) for v in vals] + [_fmt(abs(v - target) / scale) for v in vals])


def cmd_validate(config_path, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        cfg, _ = load_config(config_path)
        report = validate_config(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {config_path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for line in report.lines():
        print(line, file=stream)
    print("all assumptions hold" if report.ok else "FAILED: " + ", ".join(report.failed), file=stream)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_run(config_path, out_dir, runs=None, seed=None, horizon=None, workers=None, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        cfg, out = load_config(config_path)
        cfg = with_overrides(cfg, runs=runs, base_seed=seed, horizon=horizon, workers=workers)
        report = validate_config(cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not report.ok:
        for line in report.lines():
            print(line, file=sys.stderr)
        print("refusing to run: " + ", ".join(report.failed), file=sys.stderr)
        return EXIT_INVALID
    try:
        bundle = run_experiment(cfg, out, Path(out_dir))
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (FloatingPointError, ArithmeticError, RuntimeError) as exc:
        print(f"error: run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(summary_table(bundle), file=stream)
    return EXIT_OK


def run_experiment(cfg, out: OutputOptions, out_dir: Path) -> OutputBundle:
    out_dir.mkdir(parents=True, exist_ok=True)
    exp = Experiment.from_config(cfg)
    summary = run_monte_carlo(exp)
    curves = out_dir / "curves.csv"
    write_curves(summary, curves, out.agents)
    trajectory = None
    if out.trajectory:
        trajectory = out_dir / "trajectory.csv"
        write_trajectory(exp, out, trajectory)
    write_model(exp.model, out_dir / "model.txt")
    net.write_ensemble(exp.ensemble, out_dir / "ensemble.txt")
    config = out_dir / "config.cfg"
    config.write_text(config_to_text(cfg, out))
    manifest = out_dir / "manifest.json"
    final = {name: float(c.scaled_mse[-1, 0]) for name, c in summary.curves.items()}
    manifest.write_text(json.dumps({
        "tool": "fadesim",
        "version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "config": {k: v for k, v in asdict(cfg).items()},
        "output": asdict(out),
        "seeds": {
            "base_seed": cfg.base_seed,
            "runs": cfg.runs,
            "rule": "SeedSequence(base_seed, spawn_key=(run_index, stream)); stream 0 = edges, 1 = noise",
            "model_seed": cfg.model_seed,
            "network_seed": cfg.network_seed,
        },
        "model": {
            "agents": exp.model.agents,
            "dim": exp.model.dim,
            "rows": list(exp.model.sizes),
            "efficiency_constant": summary.efficiency,
        },
        "ensemble": net.ensemble_stats(exp.ensemble) | {"edge_sets": exp.ensemble.size},
        "spectra": spectral_summary(exp.spectral_report),
        "ci_gain": summary.ci_gain,
        "final_scaled_mse_agent1": final,
        "files": sorted(p.name for p in [curves, config, manifest, out_dir / "model.txt", out_dir / "ensemble.txt"]
                        + ([trajectory] if trajectory else [])),
    }, indent=2) + "\n")
    return OutputBundle(curves, manifest, config, trajectory, summary)


def summary_table(bundle: OutputBundle) -> str:
    summary = bundle.summary
    t = int(summary.times[-1])
    lines = [
        f"runs={summary.runs}  horizon={t}  tr((sum H^T H)^-1)={summary.efficiency:.6g}",
        f"{'estimator':<10}{'t*MSE (agent 1)':>20}{'ratio to ML':>16}",
    ]
    for name, c in summary.curves.items():
        lines.append(f"{name:<10}{c.scaled_mse[-1, 0]:>20.6g}{c.scaled_mse[-1, 0] / summary.efficiency:>16.4g}")
    lines.append(f"wrote {bundle.curves.parent}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = _Parser(prog="fadesim", description="Distributed estimation over random networks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p_val = sub.add_parser("validate", help="check a config against the modelling assumptions")
    p_val.add_argument("config")
    p_run = sub.add_parser("run", help="run the Monte Carlo experiment and write CSV curves")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=os.environ.get(OUT_ENV))
    p_run.add_argument("--runs", type=int)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--horizon", type=int)
    p_run.add_argument("--workers", type=int)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "validate":
        return cmd_validate(args.config)
    if not args.out:
        parser.error(f"--out is required (or set {OUT_ENV})")
    return cmd_run(args.config, args.out, args.runs, args.seed, args.horizon, args.workers)


if __name__ == "__main__":
    sys.exit(main())

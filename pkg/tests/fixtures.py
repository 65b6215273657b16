"""Seeded invalid configurations shared by the CLI and acceptance tests."""

from pathlib import Path

import numpy as np

from fadesim import network as net
from fadesim.model import SensingModel, write_model

SMALL_RUN = """
[estimators]
enabled = fade ci ml
[run]
horizon = 200
runs = 3
decimate = 20
"""


def _write(dirpath: Path, name: str, body: str) -> Path:
    path = dirpath / name
    path.write_text(body + SMALL_RUN)
    return path


def _good_model(dirpath: Path) -> Path:
    path = dirpath / "model.txt"
    write_model(SensingModel([[[1.0, 0.0]], [[0.0, 1.0]], [[1.0, 1.0]]]), path)
    return path


def _path_ensemble(dirpath: Path, probs=(0.5, 0.5)) -> Path:
    path = dirpath / "ensemble.txt"
    path.write_text(
        f"3 2\n1 {probs[0]!r} 1\n1 2\n2 {probs[1]!r} 1\n2 3\n"
    )
    return path


def rank_deficient(dirpath: Path) -> Path:
    write_model(SensingModel([[[1.0, 0.0]], [[2.0, 0.0]], [[-1.0, 0.0]]]), dirpath / "flat.txt")
    _path_ensemble(dirpath)
    return _write(dirpath, "rank.cfg", "[model]\nfile = flat.txt\ntheta = 1 2\n[network]\nfile = ensemble.txt\n")


def disconnected(dirpath: Path) -> Path:
    _good_model(dirpath)
    (dirpath / "split.txt").write_text("3 2\n1 0.5 1\n1 2\n2 0.5 0\n")
    return _write(dirpath, "split.cfg", "[model]\nfile = model.txt\ntheta = 1 2\n[network]\nfile = split.txt\n")


def zero_probability(dirpath: Path) -> Path:
    _good_model(dirpath)
    _path_ensemble(dirpath, probs=(1.0, 0.0))
    return _write(dirpath, "zero.cfg", "[model]\nfile = model.txt\ntheta = 1 2\n[network]\nfile = ensemble.txt\n")


def asymmetric_weights(dirpath: Path) -> Path:
    _good_model(dirpath)
    _path_ensemble(dirpath)
    sets = [net.make_edge_set([(0, 1)], 3), net.make_edge_set([(1, 2)], 3)]
    weights = [net.metropolis_weights(e, 3, k) for k, e in enumerate(sets)]
    bad = np.array(weights[0].entries)
    bad[0, 0], bad[0, 1] = 0.3, 0.7  # row 1 still sums to 1, but W != W^T
    weights[0] = net.WeightMatrix(bad, 0)
    net.write_weights(weights, dirpath / "weights.txt")
    return _write(
        dirpath, "asym.cfg",
        "[model]\nfile = model.txt\ntheta = 1 2\n[network]\nfile = ensemble.txt\nweights_file = weights.txt\n",
    )


def valid_small(dirpath: Path) -> Path:
    _good_model(dirpath)
    _path_ensemble(dirpath)
    return _write(dirpath, "ok.cfg", "[model]\nfile = model.txt\ntheta = 1 2\n[network]\nfile = ensemble.txt\n")


# (fixture, name of the assumption it must fail)
FAILURES = [
    (rank_deficient, "global observability"),
    (disconnected, "average connectivity"),
    (zero_probability, "average connectivity"),
    (asymmetric_weights, "weight matrices"),
]

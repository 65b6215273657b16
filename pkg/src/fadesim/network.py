"""Randomly switching communication graphs and their mixing matrices.

At every time step one edge-set is drawn i.i.d. from a finite ensemble
``{E_1, ..., E_K}`` with probabilities ``pi_k``.  Nodes are 0-based in memory
and 1-based in files.

Ensemble file format::

    N K
    k pi_k m       (one block per edge-set, k = 1..K)
    n1 n2          (m lines, one edge each)

Weight file format (optional explicit mixing matrices, one per edge-set)::

    N K
    k              (one block per edge-set)
    w w ... w      (N rows of N numbers)
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, ConnectivityError, WeightMatrixError


def make_edge_set(edges: Iterable[tuple[int, int]], nodes: int) -> frozenset:
    out = set()
    for a, b in edges:
        a, b = int(a), int(b)
        if a == b:
            raise ValueError(f"self-loop on node {a} is not an edge")
        if not (0 <= a < nodes and 0 <= b < nodes):
            raise ValueError(f"edge ({a}, {b}) references a node outside 0..{nodes - 1}")
        out.add((min(a, b), max(a, b)))
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class EdgeSetEnsemble:
    nodes: int
    edge_sets: tuple[frozenset, ...]
    probs: np.ndarray

    def __init__(self, nodes: int, edge_sets: Sequence[Iterable[tuple[int, int]]], probs=None):
        if nodes < 1:
            raise ValueError("an ensemble needs at least one node")
        sets = tuple(make_edge_set(e, nodes) for e in edge_sets)
        if not sets:
            raise ValueError("an ensemble needs at least one edge-set")
        if probs is None:
            probs = np.full(len(sets), 1.0 / len(sets))
        probs = np.array(probs, dtype=float)
        if probs.shape != (len(sets),):
            raise ValueError(f"{len(sets)} edge-sets but {probs.size} probabilities")
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0):
            bad = [k + 1 for k, p in enumerate(probs) if not p > 0]
            raise ConnectivityError(f"edge-set probabilities must be strictly positive (offending sets: {bad})")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ConnectivityError(f"edge-set probabilities sum to {probs.sum()!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "nodes", int(nodes))
        object.__setattr__(self, "edge_sets", sets)
        object.__setattr__(self, "probs", probs)

    @property
    def size(self) -> int:
        return len(self.edge_sets)

    def union(self) -> frozenset:
        return frozenset().union(*self.edge_sets)


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    entries: np.ndarray
    source_edge_set: int | None = None

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SpectralReport:
    rho_tilde: float
    second_eig_bar: float
    connected: bool

    @property
    def contraction(self) -> bool:
        return self.rho_tilde < 1.0


def _is_connected(nodes: int, edges: Iterable[tuple[int, int]]) -> bool:
    adj = [[] for _ in range(nodes)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    queue = deque([0])
    while queue:
        for nb in adj[queue.popleft()]:
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return len(seen) == nodes


def check_average_connectivity(ens: EdgeSetEnsemble) -> bool:
    """True iff the union of all edge-sets connects every node."""
    return _is_connected(ens.nodes, ens.union())


def degrees(edge_set, nodes: int) -> np.ndarray:
    deg = np.zeros(nodes, dtype=int)
    for a, b in edge_set:
        deg[a] += 1
        deg[b] += 1
    return deg


def laplacian(edge_set, nodes: int) -> np.ndarray:
    lap = np.diag(degrees(edge_set, nodes).astype(float))
    for a, b in edge_set:
        lap[a, b] = lap[b, a] = -1.0
    return lap


def metropolis_weights(edge_set, nodes: int, index: int | None = None) -> WeightMatrix:
    """Metropolis mixing matrix: ``1 / (max(deg_n, deg_m) + 1)`` on each edge."""
    deg = degrees(edge_set, nodes)
    w = np.zeros((nodes, nodes))
    for a, b in edge_set:
        w[a, b] = w[b, a] = 1.0 / (max(deg[a], deg[b]) + 1)
    w[np.diag_indices(nodes)] = 1.0 - w.sum(axis=1)
    w.setflags(write=False)
    return WeightMatrix(w, index)


def weight_matrix_problems(w: WeightMatrix, edge_set, tol: float = 1e-12) -> list[str]:
    """Every way ``w`` fails to be a valid mixing matrix for ``edge_set``."""
    a = np.asarray(w.entries)
    n = a.shape[0]
    if a.shape != (n, n):
        return [f"weight matrix has non-square shape {a.shape}"]
    problems = []
    if not np.array_equal(a, a.T):
        problems.append(f"not symmetric (max asymmetry {np.max(np.abs(a - a.T)):.3g})")
    if np.any(a < 0):
        problems.append("has negative entries")
    row_err = np.max(np.abs(a.sum(axis=1) - 1.0))
    if row_err > tol:
        problems.append(f"not row-stochastic (max row-sum error {row_err:.3g})")
    if np.any(np.diag(a) <= 0):
        problems.append("has a non-positive diagonal entry")
    pattern = np.zeros((n, n), dtype=bool)
    for i, j in edge_set:
        pattern[i, j] = pattern[j, i] = True
    off = ~np.eye(n, dtype=bool)
    if np.any((a != 0)[off] != pattern[off]):
        problems.append("sparsity does not mirror the edge-set")
    return problems


def validate_weight_matrix(w: WeightMatrix, edge_set, tol: float = 1e-12) -> None:
    problems = weight_matrix_problems(w, edge_set, tol)
    if problems:
        k = "" if w.source_edge_set is None else f" for edge-set {w.source_edge_set + 1}"
        raise WeightMatrixError(f"weight matrix{k} " + "; ".join(problems))


def sample_edge_indices(ens: EdgeSetEnsemble, rng: np.random.Generator, size=None):
    """Draw edge-set indices i.i.d. with probabilities ``ens.probs``.

    Uses one uniform per draw through the inverse CDF, so drawing ``T``
    indices at once yields the same sequence as ``T`` single draws.
    """
    cdf = np.cumsum(ens.probs)
    u = rng.random(size)
    k = np.searchsorted(cdf, u, side="right")
    return np.minimum(k, ens.size - 1)


def sample_edge_index(ens: EdgeSetEnsemble, rng: np.random.Generator) -> int:
    return int(sample_edge_indices(ens, rng))


def average_matrices(ens: EdgeSetEnsemble, weights: Sequence[WeightMatrix]) -> SpectralReport:
    """Spectral summary of the average mixing and average off-consensus matrices."""
    if len(weights) != ens.size:
        raise ValueError(f"{ens.size} edge-sets but {len(weights)} weight matrices")
    n = ens.nodes
    proj = np.eye(n) - np.full((n, n), 1.0 / n)
    w_bar = np.zeros((n, n))
    w_tilde = np.zeros((n, n))
    for p, w in zip(ens.probs, weights):
        if w.entries.shape != (n, n):
            raise ValueError(f"weight matrix of shape {w.entries.shape}, expected {(n, n)}")
        w_bar += p * w.entries
        wk = proj @ w.entries @ proj
        w_tilde += p * (wk.T @ wk)
    w_tilde = 0.5 * (w_tilde + w_tilde.T)
    rho = float(np.max(np.abs(np.linalg.eigvalsh(w_tilde))))
    # W_bar is symmetric with eigenvector 1, so its remaining spectrum is that of W_bar - J.
    w_bar_sym = 0.5 * (w_bar + w_bar.T)
    second = float(np.max(np.abs(np.linalg.eigvalsh(w_bar_sym - (np.eye(n) - proj))))) if n > 1 else 0.0
    return SpectralReport(rho, second, check_average_connectivity(ens))


def average_weight_matrix(ens: EdgeSetEnsemble, weights: Sequence[WeightMatrix]) -> np.ndarray:
    return sum(p * w.entries for p, w in zip(ens.probs, weights))


def generate_random_ensemble(
    nodes: int,
    sets: int,
    density: float,
    rng: np.random.Generator,
    max_tries: int = 1000,
) -> EdgeSetEnsemble:
    """Erdos-Renyi edge-sets with uniform probabilities, redrawn until the union connects."""
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    if sets < 1:
        raise ValueError("need at least one edge-set")
    iu, ju = np.triu_indices(nodes, k=1)
    for _ in range(max_tries):
        draws = []
        for _k in range(sets):
            keep = rng.random(iu.size) < density
            draws.append(list(zip(iu[keep].tolist(), ju[keep].tolist())))
        ens = EdgeSetEnsemble(nodes, draws)
        if check_average_connectivity(ens):
            return ens
    raise ConnectivityError(
        f"no connected ensemble in {max_tries} draws (N={nodes}, K={sets}, density={density}); "
        "raise the density or the number of edge-sets"
    )


def ensemble_stats(ens: EdgeSetEnsemble) -> dict:
    """Fraction of node pairs covered by the union, and mean degree per edge-set."""
    pairs = ens.nodes * (ens.nodes - 1) / 2
    return {
        "union_coverage": len(ens.union()) / pairs if pairs else 0.0,
        "mean_degree": float(np.mean([2 * len(e) / ens.nodes for e in ens.edge_sets])),
    }


def _data_lines(path: Path):
    for i, ln in enumerate(path.read_text().splitlines(), start=1):
        toks = ln.split("#", 1)[0].split()
        if toks:
            yield i, toks


def _reader(path: Path):
    it = _data_lines(path)

    def take(count):
        try:
            lineno, toks = next(it)
        except StopIteration:
            raise ConfigError("unexpected end of file", source=path) from None
        if count is not None and len(toks) != count:
            raise ConfigError(f"expected {count} values, got {len(toks)}", source=path, line=lineno)
        return lineno, toks

    return take


def write_ensemble(ens: EdgeSetEnsemble, path) -> None:
    lines = [f"{ens.nodes} {ens.size}"]
    for k, (edges, p) in enumerate(zip(ens.edge_sets, ens.probs), start=1):
        lines.append(f"{k} {float(p)!r} {len(edges)}")
        lines.extend(f"{a + 1} {b + 1}" for a, b in sorted(edges))
    Path(path).write_text("\n".join(lines) + "\n")


def read_ensemble_raw(path) -> tuple[int, list[list[tuple[int, int]]], list[float]]:
    """Parse an ensemble file without enforcing the probability constraints."""
    path = Path(path)
    take = _reader(path)
    lineno, toks = take(2)
    try:
        nodes, sets = int(toks[0]), int(toks[1])
    except ValueError:
        raise ConfigError("header must be 'N K'", source=path, line=lineno) from None
    edge_sets, probs = [], []
    for expected in range(1, sets + 1):
        lineno, toks = take(3)
        try:
            k, p, m = int(toks[0]), float(toks[1]), int(toks[2])
        except ValueError:
            raise ConfigError("edge-set header must be 'k pi_k m'", source=path, line=lineno) from None
        if k != expected:
            raise ConfigError(f"expected edge-set {expected}, found {k}", source=path, line=lineno)
        edges = []
        for _ in range(m):
            lineno, toks = take(2)
            try:
                a, b = int(toks[0]) - 1, int(toks[1]) - 1
            except ValueError:
                raise ConfigError("edge must be two node numbers", source=path, line=lineno) from None
            if not (0 <= a < nodes and 0 <= b < nodes) or a == b:
                raise ConfigError(f"invalid edge {a + 1} {b + 1}", source=path, line=lineno)
            edges.append((a, b))
        edge_sets.append(edges)
        probs.append(p)
    return nodes, edge_sets, probs


def read_ensemble(path) -> EdgeSetEnsemble:
    nodes, edge_sets, probs = read_ensemble_raw(path)
    return EdgeSetEnsemble(nodes, edge_sets, probs)


def write_weights(weights: Sequence[WeightMatrix], path) -> None:
    n = weights[0].size
    lines = [f"{n} {len(weights)}"]
    for k, w in enumerate(weights, start=1):
        lines.append(str(k))
        lines.extend(" ".join(repr(float(x)) for x in row) for row in w.entries)
    Path(path).write_text("\n".join(lines) + "\n")


def read_weights(path) -> list[WeightMatrix]:
    path = Path(path)
    take = _reader(path)
    lineno, toks = take(2)
    try:
        n, sets = int(toks[0]), int(toks[1])
    except ValueError:
        raise ConfigError("header must be 'N K'", source=path, line=lineno) from None
    out = []
    for expected in range(1, sets + 1):
        lineno, toks = take(1)
        if toks[0] != str(expected):
            raise ConfigError(f"expected block {expected}", source=path, line=lineno)
        w = np.empty((n, n))
        for r in range(n):
            lineno, toks = take(n)
            try:
                w[r] = [float(x) for x in toks]
            except ValueError:
                raise ConfigError("non-numeric weight", source=path, line=lineno) from None
        w.setflags(write=False)
        out.append(WeightMatrix(w, expected - 1))
    return out

"""Linear-gaussian sensing model shared by all agents.

Agent ``n`` observes ``y_n(t) = H_n @ theta + v_n(t)`` with ``v_n(t)`` standard
normal, independent across agents and time steps.  Agents are indexed from 0
in memory; the text file format below numbers them from 1.

Model file format::

    N d
    n d_n          (one block per agent, n = 1..N)
    h h h ... h    (d_n rows of d numbers)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, ObservabilityError

RANK_TOL = 1e-10


@dataclass(frozen=True)
class Measurement:
    """Network-wide measurement at one time step.

    ``values`` is the stacked vector ``(y_1, ..., y_N)`` of length
    ``d_1 + ... + d_N``.
    """

    values: np.ndarray
    time_step: int
    sizes: tuple[int, ...]

    @property
    def per_agent(self) -> list[np.ndarray]:
        return np.split(self.values, np.cumsum(self.sizes)[:-1])


class SensingModel:
    """Per-agent sensing matrices ``H_n`` (each ``d_n x d``) and derived gains.

    Construction checks dimensions only.  Use
    :func:`check_global_observability` or :attr:`gains` (which raises) to
    enforce identifiability of the parameter.
    """

    def __init__(self, matrices: Sequence[np.ndarray]):
        mats = []
        for n, h in enumerate(matrices):
            h = np.array(h, dtype=float, copy=True)
            if h.ndim == 1:
                h = h[None, :]
            if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] < 1:
                raise ValueError(f"H_{n + 1} must be a non-empty 2-D matrix, got shape {h.shape}")
            if not np.all(np.isfinite(h)):
                raise ValueError(f"H_{n + 1} has non-finite entries")
            h.setflags(write=False)
            mats.append(h)
        if len(mats) < 2:
            raise ValueError("a sensing model needs at least two agents")
        d = mats[0].shape[1]
        bad = [n + 1 for n, h in enumerate(mats) if h.shape[1] != d]
        if bad:
            raise ValueError(f"sensing matrices of agents {bad} do not have {d} columns")
        self.matrices = tuple(mats)

    def __repr__(self):
        return f"SensingModel(agents={self.agents}, dim={self.dim}, sizes={self.sizes})"

    @property
    def agents(self) -> int:
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[1]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(h.shape[0] for h in self.matrices)

    @property
    def total_rows(self) -> int:
        return sum(self.sizes)

    @property
    def max_rows(self) -> int:
        return max(self.sizes)

    @cached_property
    def stacked(self) -> np.ndarray:
        h = np.vstack(self.matrices)
        h.setflags(write=False)
        return h

    @cached_property
    def gram(self) -> np.ndarray:
        """``sum_n H_n^T H_n``."""
        return self.stacked.T @ self.stacked

    @cached_property
    def gains(self) -> tuple[np.ndarray, ...]:
        return tuple(build_gains(self))

    @cached_property
    def padded_sensing(self) -> np.ndarray:
        """``(N, m, d)`` array of sensing matrices, zero-padded to ``m = max d_n`` rows."""
        out = np.zeros((self.agents, self.max_rows, self.dim))
        for n, h in enumerate(self.matrices):
            out[n, : h.shape[0]] = h
        out.setflags(write=False)
        return out

    @cached_property
    def padded_gains(self) -> np.ndarray:
        """``(N, d, m)`` array of gains ``C_n``, zero-padded columns."""
        out = np.zeros((self.agents, self.dim, self.max_rows))
        for n, c in enumerate(self.gains):
            out[n, :, : c.shape[1]] = c
        out.setflags(write=False)
        return out

    @cached_property
    def _pad_index(self) -> np.ndarray:
        m = self.max_rows
        return np.concatenate([n * m + np.arange(s) for n, s in enumerate(self.sizes)])

    def pad(self, stacked: np.ndarray) -> np.ndarray:
        """Scatter stacked measurements ``(..., D)`` into a ``(..., N, m)`` array."""
        stacked = np.asarray(stacked, dtype=float)
        if stacked.shape[-1] != self.total_rows:
            raise ValueError(f"expected {self.total_rows} stacked entries, got {stacked.shape[-1]}")
        out = np.zeros(stacked.shape[:-1] + (self.agents * self.max_rows,))
        out[..., self._pad_index] = stacked
        return out.reshape(stacked.shape[:-1] + (self.agents, self.max_rows))

    def unpad(self, padded: np.ndarray) -> np.ndarray:
        padded = np.asarray(padded)
        flat = padded.reshape(padded.shape[:-2] + (self.agents * self.max_rows,))
        return flat[..., self._pad_index]

    def with_blinded(self, agent: int, coordinate: int) -> "SensingModel":
        """Copy of the model in which ``agent`` cannot sense ``coordinate`` (0-based)."""
        if not 0 <= agent < self.agents:
            raise ValueError(f"agent index {agent} out of range")
        if not 0 <= coordinate < self.dim:
            raise ValueError(f"coordinate index {coordinate} out of range")
        mats = [h.copy() for h in self.matrices]
        mats[agent][:, coordinate] = 0.0
        return SensingModel(mats)


def as_parameter(theta, dim: int | None = None) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.ndim != 1 or theta.size < 1:
        raise ValueError("parameter must be a non-empty vector")
    if not np.all(np.isfinite(theta)):
        raise ValueError("parameter has non-finite entries")
    if dim is not None and theta.size != dim:
        raise ValueError(f"parameter has length {theta.size}, model expects {dim}")
    return theta


def numerical_rank(a: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def check_global_observability(model: SensingModel, tol: float = RANK_TOL) -> bool:
    """True iff the stacked sensing matrix has full column rank.

    Rank is counted as the number of singular values above ``tol * sigma_max``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    return numerical_rank(model.stacked, tol) == model.dim


def build_gains(model: SensingModel) -> list[np.ndarray]:
    """Gains ``C_n = ((1/N) sum_i H_i^T H_i)^{-1} H_n^T``, one per agent."""
    if not check_global_observability(model):
        raise ObservabilityError(
            f"stacked sensing matrix has rank {numerical_rank(model.stacked)} < d = {model.dim}"
        )
    avg_gram = model.gram / model.agents
    return [np.linalg.solve(avg_gram, h.T) for h in model.matrices]


def sample_measurement(
    model: SensingModel,
    theta,
    rng: np.random.Generator,
    t: int,
    noise_scale: float = 1.0,
) -> Measurement:
    """Draw ``y(t)``.  ``noise_scale`` exists for noiseless test oracles; leave it at 1."""
    if t < 1:
        raise ValueError("time steps start at 1")
    theta = as_parameter(theta, model.dim)
    clean = model.stacked @ theta
    noise = rng.standard_normal(model.total_rows)
    return Measurement(clean + noise_scale * noise, t, model.sizes)


def random_low_rank_model(
    agents: int,
    dim: int,
    rows: int,
    rank: int,
    rng: np.random.Generator,
    max_tries: int = 100,
) -> SensingModel:
    """Each ``H_n = A @ B`` with Gaussian ``A (rows x rank)`` and ``B (rank x dim)``.

    Redrawn until the stacked matrix has full column rank.
    """
    if rank < 1 or rank > min(rows, dim):
        raise ValueError(f"rank must lie in [1, {min(rows, dim)}]")
    for _ in range(max_tries):
        mats = [rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, dim)) for _ in range(agents)]
        model = SensingModel(mats)
        if check_global_observability(model):
            return model
    raise ObservabilityError(f"no observable model found in {max_tries} draws")


def write_model(model: SensingModel, path) -> None:
    lines = [f"{model.agents} {model.dim}"]
    for n, h in enumerate(model.matrices, start=1):
        lines.append(f"{n} {h.shape[0]}")
        lines.extend(" ".join(repr(float(x)) for x in row) for row in h)
    Path(path).write_text("\n".join(lines) + "\n")


def read_model(path) -> SensingModel:
    path = Path(path)
    rows = [(i, ln.split("#", 1)[0].split()) for i, ln in enumerate(path.read_text().splitlines(), start=1)]
    rows = [(i, toks) for i, toks in rows if toks]
    it = iter(rows)

    def take(count):
        try:
            lineno, toks = next(it)
        except StopIteration:
            raise ConfigError("unexpected end of file", source=path) from None
        if count is not None and len(toks) != count:
            raise ConfigError(f"expected {count} values, got {len(toks)}", source=path, line=lineno)
        return lineno, toks

    lineno, (n_tok, d_tok) = take(2)
    try:
        agents, dim = int(n_tok), int(d_tok)
    except ValueError:
        raise ConfigError("header must be 'N d'", source=path, line=lineno) from None
    mats = []
    for expected in range(1, agents + 1):
        lineno, toks = take(2)
        try:
            n, rows_n = int(toks[0]), int(toks[1])
        except ValueError:
            raise ConfigError("agent header must be 'n d_n'", source=path, line=lineno) from None
        if n != expected:
            raise ConfigError(f"expected agent {expected}, found {n}", source=path, line=lineno)
        h = np.empty((rows_n, dim))
        for r in range(rows_n):
            lineno, toks = take(dim)
            try:
                h[r] = [float(x) for x in toks]
            except ValueError:
                raise ConfigError("non-numeric matrix entry", source=path, line=lineno) from None
        mats.append(h)
    try:
        return SensingModel(mats)
    except ValueError as exc:
        raise ConfigError(str(exc), source=path) from None

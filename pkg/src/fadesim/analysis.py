"""Error metrics, consensus decomposition and the centralized MSE yardstick."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ObservabilityError
from .model import SensingModel, check_global_observability


@dataclass(frozen=True)
class ConsensusDecomposition:
    in_consensus: np.ndarray
    off_consensus: np.ndarray

    def reconstruct(self) -> np.ndarray:
        n = self.off_consensus.size // self.in_consensus.size
        return np.tile(self.in_consensus, n) + self.off_consensus


def decompose(u, agents: int, dim: int | None = None) -> ConsensusDecomposition:
    """Split a stacked network vector into its agent-average and the residual.

    ``u`` holds ``agents`` consecutive blocks of length ``dim``.  The
    in-consensus part is the blockwise mean; the off-consensus part is what
    remains after subtracting that mean from every block.
    """
    u = np.asarray(u, dtype=float).ravel()
    if agents < 1 or u.size % agents:
        raise ValueError(f"vector of length {u.size} does not split into {agents} blocks")
    if dim is None:
        dim = u.size // agents
    if u.size != agents * dim:
        raise ValueError(f"vector of length {u.size} is not {agents} blocks of {dim}")
    blocks = u.reshape(agents, dim)
    mean = blocks.mean(axis=0)
    return ConsensusDecomposition(mean, (blocks - mean).ravel())


def off_consensus_norm(theta_hat: np.ndarray) -> np.ndarray:
    """Norm of the disagreement component for ``(..., N, d)`` estimates."""
    dev = theta_hat - theta_hat.mean(axis=-2, keepdims=True)
    return np.sqrt(np.sum(dev**2, axis=(-2, -1)))


def efficiency_constant(model: SensingModel) -> float:
    """``tr((sum_n H_n^T H_n)^{-1})``: the limit of ``t * MSE`` for every estimator."""
    if not check_global_observability(model):
        raise ObservabilityError("sum of H_n^T H_n is singular")
    return float(np.trace(np.linalg.inv(model.gram)))


def ml_mse_closed_form(model: SensingModel, t) -> float | np.ndarray:
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 1):
        raise ValueError("t must be >= 1")
    out = efficiency_constant(model) / t_arr
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ErrorCurve:
    """Monte Carlo error statistics at recorded time steps.

    Arrays are indexed ``[time, agent]`` (plus ``[..., coordinate]`` for
    ``bias`` and ``coord_mse``).  The centralized estimator has one "agent".
    """

    times: np.ndarray
    mse: np.ndarray
    mse_se: np.ndarray
    bias: np.ndarray
    coord_mse: np.ndarray
    runs: int
    ml_mse: np.ndarray | None = None

    @property
    def scaled_mse(self) -> np.ndarray:
        return self.times[:, None] * self.mse

    @property
    def scaled_mse_se(self) -> np.ndarray:
        return self.times[:, None] * self.mse_se

    @property
    def bias_norm(self) -> np.ndarray:
        return np.linalg.norm(self.bias, axis=-1)


class MseAccumulator:
    """Streaming Monte Carlo sums; add runs in a fixed order for reproducible totals."""

    def __init__(self, times):
        self.times = np.asarray(times)
        self.runs = 0
        self._err = None
        self._sq = None
        self._sqnorm = None
        self._sqnorm2 = None

    def add(self, errors: np.ndarray) -> None:
        """``errors``: ``(n_times, n_agents, d)`` estimate minus truth for one run."""
        errors = np.asarray(errors, dtype=float)
        if errors.ndim != 3 or errors.shape[0] != self.times.size:
            raise ValueError(f"error array of shape {errors.shape} does not match {self.times.size} times")
        sq = errors**2
        sqnorm = sq.sum(axis=-1)
        if self._err is None:
            self._err = np.zeros_like(errors)
            self._sq = np.zeros_like(sq)
            self._sqnorm = np.zeros_like(sqnorm)
            self._sqnorm2 = np.zeros_like(sqnorm)
        elif errors.shape != self._err.shape:
            raise ValueError("all traces must have the same shape")
        self._err += errors
        self._sq += sq
        self._sqnorm += sqnorm
        self._sqnorm2 += sqnorm**2
        self.runs += 1

    def result(self, ml_mse=None) -> ErrorCurve:
        if self.runs == 0:
            raise ValueError("no traces accumulated")
        r = self.runs
        mse = self._sqnorm / r
        if r > 1:
            var = np.maximum(self._sqnorm2 / r - mse**2, 0.0) * r / (r - 1)
            se = np.sqrt(var / r)
        else:
            se = np.full_like(mse, np.nan)
        return ErrorCurve(self.times.copy(), mse, se, self._err / r, self._sq / r, r, ml_mse)


def empirical_mse(traces: Iterable[np.ndarray], theta, times=None, model: SensingModel | None = None) -> ErrorCurve:
    """Per-agent Monte Carlo MSE, bias and per-coordinate MSE.

    ``traces`` yields one ``(n_times, n_agents, d)`` estimate array per run
    (a ``(n_times, d)`` array is read as a single agent).  ``times`` defaults
    to ``1..n_times``.  With ``model`` given, the closed-form centralized MSE
    is attached.
    """
    theta = np.asarray(theta, dtype=float)
    acc = None
    for est in traces:
        est = np.asarray(est, dtype=float)
        if est.ndim == 2:
            est = est[:, None, :]
        if acc is None:
            acc = MseAccumulator(np.arange(1, est.shape[0] + 1) if times is None else times)
        acc.add(est - theta)
    if acc is None:
        raise ValueError("empirical_mse needs at least one trace")
    ml = None if model is None else ml_mse_closed_form(model, acc.times)
    return acc.result(ml)

"""FADE, consensus+innovations (CI) and centralized ML updates.

All step functions accept arrays with arbitrary leading batch axes so the
harness can advance many independent Monte Carlo runs at once.  Shapes:

* estimates ``theta_hat``: ``(..., N, d)``; row ``n`` is agent ``n``'s estimate
* running means ``y_bar`` and measurements: ``(..., N, m)`` with ``m = max d_n``,
  zero-padded past ``d_n`` (see :meth:`SensingModel.pad`)
* mixing matrices / Laplacians: ``(N, N)`` or ``(..., N, N)``

Mixing multiplies the ``N x N`` matrix into the ``N x d`` estimate block,
which is ``(W kron I_d)`` applied to the stacked vector without forming it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .model import Measurement, SensingModel
from .network import WeightMatrix, laplacian

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetworkEstimate:
    theta_hat: np.ndarray
    y_bar: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, model: SensingModel, batch: tuple[int, ...] = ()) -> "NetworkEstimate":
        return cls(
            np.zeros(batch + (model.agents, model.dim)),
            np.zeros(batch + (model.agents, model.max_rows)),
            0,
        )

    @property
    def stacked(self) -> np.ndarray:
        """Estimates as the stacked ``(..., d*N)`` vector."""
        return self.theta_hat.reshape(self.theta_hat.shape[:-2] + (-1,))


@dataclass(frozen=True)
class CiConfig:
    """Step sizes ``alpha(t) = 1/t`` and ``beta(t) = gain / t**r``."""

    r: float = 0.05
    gain: float = 1.0

    def __post_init__(self):
        if not 0 < self.r < 0.5:
            raise ValueError(f"CI exponent r must lie in (0, 1/2), got {self.r}")
        if not self.gain > 0:
            raise ValueError(f"CI consensus gain must be positive, got {self.gain}")

    def beta(self, t: int) -> float:
        return self.gain / t**self.r


def _padded(model: SensingModel, y) -> np.ndarray:
    if isinstance(y, Measurement):
        return model.pad(y.values)
    if isinstance(y, (list, tuple)):
        return model.pad(np.concatenate([np.atleast_1d(np.asarray(v, dtype=float)) for v in y]))
    y = np.asarray(y, dtype=float)
    if y.ndim >= 2 and y.shape[-2:] == (model.agents, model.max_rows):
        return y
    if y.shape[-1] == model.total_rows:
        return model.pad(y)
    raise ValueError(f"measurement of shape {y.shape} does not fit {model!r}")


def _mixing(w, n: int) -> np.ndarray:
    a = w.entries if isinstance(w, WeightMatrix) else np.asarray(w, dtype=float)
    if a.shape[-2:] != (n, n):
        raise ValueError(f"mixing matrix of shape {a.shape} does not match {n} agents")
    return a


def _check_state(state: NetworkEstimate, model: SensingModel):
    if state.theta_hat.shape[-2:] != (model.agents, model.dim):
        raise ValueError(f"estimate block of shape {state.theta_hat.shape} does not fit {model!r}")
    if state.y_bar.shape[-2:] != (model.agents, model.max_rows):
        raise ValueError(f"running-mean block of shape {state.y_bar.shape} does not fit {model!r}")


def running_mean_update(y_bar_prev, y_t, t: int):
    """``y_bar(t) = y_bar(t-1) + (y(t) - y_bar(t-1)) / t``."""
    if t < 1:
        raise ValueError("running means are defined from t = 1")
    y_bar_prev = np.asarray(y_bar_prev, dtype=float)
    return y_bar_prev + (np.asarray(y_t, dtype=float) - y_bar_prev) / t


def _apply_gains(model: SensingModel, residual: np.ndarray) -> np.ndarray:
    # (N, d, m) @ (..., N, m, 1) -> (..., N, d)
    return (model.padded_gains @ residual[..., None])[..., 0]


def fade_step(state: NetworkEstimate, w, y_t, model: SensingModel) -> NetworkEstimate:
    """One FADE iteration: local innovation update, then neighbour mixing.

    Each agent forms ``theta_hat_m + (1/t) C_m (y_m(t) - y_bar_m(t-1))`` and the
    network then replaces every estimate by its ``W(t)``-weighted average.
    """
    _check_state(state, model)
    t = state.t + 1
    y = _padded(model, y_t)
    local = state.theta_hat + _apply_gains(model, y - state.y_bar) / t
    mixed = _mixing(w, model.agents) @ local
    return NetworkEstimate(mixed, running_mean_update(state.y_bar, y, t), t)


def ci_step(state: NetworkEstimate, edge_set, y_t, model: SensingModel, cfg: CiConfig) -> NetworkEstimate:
    """One consensus+innovations iteration.

    ``theta(t) = (I - beta(t) L(t)) theta(t-1) + (1/t) C (y(t) - H theta(t-1))``
    applied blockwise.  ``edge_set`` may be an edge-set or a precomputed
    Laplacian array.  Running means are advanced only to keep traces aligned.
    """
    _check_state(state, model)
    t = state.t + 1
    y = _padded(model, y_t)
    if isinstance(edge_set, (set, frozenset)):
        lap = laplacian(edge_set, model.agents)
    else:
        lap = _mixing(edge_set, model.agents)
    beta = cfg.beta(t)
    if lap.ndim == 2 and log.isEnabledFor(logging.DEBUG):
        lam = float(np.linalg.eigvalsh(lap)[-1])
        if beta * lam > 2:
            log.debug("CI consensus matrix expands at t=%d: beta*lambda_max(L)=%.3g", t, beta * lam)
    theta = state.theta_hat
    predicted = (model.padded_sensing @ theta[..., None])[..., 0]
    new = theta - beta * (lap @ theta) + _apply_gains(model, y - predicted) / t
    return NetworkEstimate(new, running_mean_update(state.y_bar, y, t), t)


def ml_estimate(model: SensingModel, y_bar_t) -> np.ndarray:
    """Centralized estimate ``(1/N) sum_n C_n y_bar_n(t)``."""
    y = _padded(model, y_bar_t)
    return _apply_gains(model, y).mean(axis=-2)


def centralized_step(theta_prev, y_bar_prev, y_t, t: int, model: SensingModel) -> np.ndarray:
    """Recursive form of the centralized estimator.

    ``theta(t) = theta(t-1) + (1/t) (1/N) sum_m C_m (y_m(t) - y_bar_m(t-1))``.
    Equal to :func:`ml_estimate` of the running means at every ``t``.
    """
    if t < 1:
        raise ValueError("time steps start at 1")
    y = _padded(model, y_t)
    innovation = _apply_gains(model, y - np.asarray(y_bar_prev, dtype=float)).mean(axis=-2)
    return np.asarray(theta_prev, dtype=float) + innovation / t

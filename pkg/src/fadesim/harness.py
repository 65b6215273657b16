"""Seeded trajectories and Monte Carlo batches.

Every run draws from two private random streams, one for edge-sets and one
for measurement noise.  Stream seeds come from
``numpy.random.SeedSequence(base_seed, spawn_key=(run_index, stream_id))``
with ``stream_id`` 0 for edges and 1 for noise, so a run's realizations
depend only on ``(base_seed, run_index)``.  Enabled estimators all see the
same realizations, and switching an estimator off never shifts the draws
of the others.

Runs are advanced together in vectorized batches; the Monte Carlo sums are
reduced in run order, so summaries do not depend on scheduling.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import network as net
from .analysis import MseAccumulator, efficiency_constant, ml_mse_closed_form
from .errors import ConnectivityError, ObservabilityError
from .estimators import CiConfig, NetworkEstimate, ci_step, fade_step, ml_estimate
from .model import SensingModel, as_parameter, check_global_observability, random_low_rank_model, read_model

log = logging.getLogger(__name__)

ESTIMATORS = ("fade", "ci", "ml")
EDGE_STREAM = 0
NOISE_STREAM = 1
MODEL_STREAM = 2
NETWORK_STREAM = 3
NOISE_CHUNK = 250

DEFAULT_THETA = (100.0, 120.0, 70.0, 90.0, 200.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce an experiment.

    Agent and coordinate numbers (``blind_agent``, ``blind_coordinate``,
    ``trajectory_*``) are 1-based, as in config files; 0 disables blinding.
    Paths given here are used as-is.
    """

    theta: tuple = DEFAULT_THETA
    model_file: str | None = None
    agents: int = 50
    rows: int = 8
    rank: int = 4
    model_seed: int = 1
    blind_agent: int = 0
    blind_coordinate: int = 0
    ensemble_file: str | None = None
    weights_file: str | None = None
    edge_sets: int = 15
    density: float = 0.1
    network_seed: int = 2
    estimators: tuple = ESTIMATORS
    ci_r: float = 0.05
    ci_gain: float | str = "auto"
    horizon: int = 5000
    runs: int = 100
    base_seed: int = 2024
    record: str = "errors"
    decimate: int = 10
    batch: int = 25
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(x) for x in as_parameter(self.theta)))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        problems = []
        if self.horizon < 1:
            problems.append("horizon must be >= 1")
        if self.runs < 1:
            problems.append("runs must be >= 1")
        if not self.estimators or any(e not in ESTIMATORS for e in self.estimators):
            problems.append(f"estimators must be a non-empty subset of {ESTIMATORS}")
        if len(set(self.estimators)) != len(self.estimators):
            problems.append("estimators listed twice")
        if "ci" in self.estimators and not 0 < self.ci_r < 0.5:
            problems.append("ci_r must lie in (0, 1/2)")
        if self.ci_gain != "auto" and not (isinstance(self.ci_gain, (int, float)) and self.ci_gain > 0):
            problems.append("ci_gain must be 'auto' or a positive number")
        if self.record not in ("errors", "estimates"):
            problems.append("record must be 'errors' or 'estimates'")
        if self.decimate < 1:
            problems.append("decimate must be >= 1")
        if self.batch < 1 or self.workers < 1:
            problems.append("batch and workers must be >= 1")
        if self.model_file is None and (self.agents < 2 or self.rows < 1 or not 1 <= self.rank <= min(self.rows, self.dim)):
            problems.append("model generator needs agents >= 2 and 1 <= rank <= min(rows, dim)")
        if self.ensemble_file is None and not (0 < self.density <= 1 and self.edge_sets >= 1):
            problems.append("ensemble generator needs 0 < density <= 1 and edge_sets >= 1")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def dim(self) -> int:
        return len(self.theta)

    def record_times(self) -> np.ndarray:
        return recorded_times(self.horizon, self.decimate)


def recorded_times(horizon: int, decimate: int) -> np.ndarray:
    times = np.arange(decimate, horizon + 1, decimate)
    if times.size == 0 or times[-1] != horizon:
        times = np.append(times, horizon)
    return times


def stream_rng(base_seed: int, run_index: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(run_index, stream)))


def _setup_rng(seed: int, stream: int) -> np.random.Generator:
    # setup streams use the largest run index, which no Monte Carlo run reaches
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2**32 - 1, stream)))


def load_model(cfg: ExperimentConfig) -> SensingModel:
    if cfg.model_file is not None:
        model = read_model(cfg.model_file)
    else:
        model = random_low_rank_model(cfg.agents, cfg.dim, cfg.rows, cfg.rank, _setup_rng(cfg.model_seed, MODEL_STREAM))
    if model.dim != cfg.dim:
        raise ValueError(f"model has d = {model.dim} but theta has {cfg.dim} entries")
    if cfg.blind_agent:
        if not cfg.blind_coordinate:
            raise ValueError("blind_agent needs blind_coordinate")
        model = model.with_blinded(cfg.blind_agent - 1, cfg.blind_coordinate - 1)
    return model


def load_ensemble(cfg: ExperimentConfig, agents: int) -> net.EdgeSetEnsemble:
    if cfg.ensemble_file is not None:
        ens = net.read_ensemble(cfg.ensemble_file)
        if ens.nodes != agents:
            raise ValueError(f"ensemble has {ens.nodes} nodes but the model has {agents} agents")
        return ens
    return net.generate_random_ensemble(agents, cfg.edge_sets, cfg.density, _setup_rng(cfg.network_seed, NETWORK_STREAM))


def load_weights(cfg: ExperimentConfig, ens: net.EdgeSetEnsemble) -> list[net.WeightMatrix]:
    if cfg.weights_file is not None:
        weights = net.read_weights(cfg.weights_file)
        if len(weights) != ens.size or weights[0].size != ens.nodes:
            raise ValueError("weights file does not match the ensemble")
        return weights
    return [net.metropolis_weights(e, ens.nodes, k) for k, e in enumerate(ens.edge_sets)]


@dataclass(eq=False)
class Experiment:
    """A configuration with its model, ensemble and per-edge-set matrices realized."""

    cfg: ExperimentConfig
    model: SensingModel
    ensemble: net.EdgeSetEnsemble
    weights: list = field(repr=False)

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "Experiment":
        model = load_model(cfg)
        if not check_global_observability(model):
            raise ObservabilityError("stacked sensing matrix is rank deficient")
        ens = load_ensemble(cfg, model.agents)
        if not net.check_average_connectivity(ens):
            raise ConnectivityError("union of the edge-sets is not connected")
        weights = load_weights(cfg, ens)
        for w, e in zip(weights, ens.edge_sets):
            net.validate_weight_matrix(w, e)
        return cls(cfg, model, ens, weights)

    @property
    def theta(self) -> np.ndarray:
        return np.array(self.cfg.theta)

    @cached_property
    def weight_stack(self) -> np.ndarray:
        return np.stack([w.entries for w in self.weights])

    @cached_property
    def laplacian_stack(self) -> np.ndarray:
        return np.stack([net.laplacian(e, self.ensemble.nodes) for e in self.ensemble.edge_sets])

    @cached_property
    def laplacian_lambda_max(self) -> np.ndarray:
        return np.array([np.linalg.eigvalsh(lap)[-1] for lap in self.laplacian_stack])

    @cached_property
    def ci_config(self) -> CiConfig:
        gain = self.cfg.ci_gain
        if gain == "auto":
            lam = float(self.laplacian_lambda_max.max())
            gain = 1.0 / lam if lam > 0 else 1.0
        return CiConfig(self.cfg.ci_r, float(gain))

    @cached_property
    def spectral_report(self) -> net.SpectralReport:
        return net.average_matrices(self.ensemble, self.weights)


@dataclass(frozen=True, eq=False)
class RunTrace:
    """One trajectory.  ``records[name]`` is ``(n_times, n_agents, d)``;
    it holds estimates or estimation errors depending on ``kind``."""

    run_index: int
    base_seed: int
    edge_indices: np.ndarray
    times: np.ndarray
    kind: str
    records: dict


@dataclass(frozen=True, eq=False)
class McSummary:
    curves: dict
    times: np.ndarray
    runs: int
    efficiency: float
    ci_gain: float | None = None


def _as_experiment(obj) -> Experiment:
    return obj if isinstance(obj, Experiment) else Experiment.from_config(obj)


def simulate(exp: Experiment, run_indices, record: str | None = None, decimate: int | None = None):
    """Advance the runs ``run_indices`` together.

    Returns ``(edge_indices, times, records)``; ``edge_indices`` is
    ``(R, T)`` and each ``records[name]`` is ``(R, n_times, n_agents, d)``.
    """
    cfg = exp.cfg
    record = record or cfg.record
    times = recorded_times(cfg.horizon, decimate or cfg.decimate)
    model, theta = exp.model, exp.theta
    runs = list(run_indices)
    r_count, horizon = len(runs), cfg.horizon
    edge_rngs = [stream_rng(cfg.base_seed, i, EDGE_STREAM) for i in runs]
    noise_rngs = [stream_rng(cfg.base_seed, i, NOISE_STREAM) for i in runs]
    edges = np.stack([net.sample_edge_indices(exp.ensemble, g, horizon) for g in edge_rngs])

    batch = (r_count,)
    states = {}
    if "fade" in cfg.estimators:
        states["fade"] = NetworkEstimate.initial(model, batch)
    if "ci" in cfg.estimators:
        states["ci"] = NetworkEstimate.initial(model, batch)
        ci_cfg = exp.ci_config
    y_bar = np.zeros(batch + (model.agents, model.max_rows))
    n_agents = {"fade": model.agents, "ci": model.agents, "ml": 1}
    out = {
        name: np.empty((r_count, times.size, n_agents[name], model.dim))
        for name in ESTIMATORS
        if name in cfg.estimators
    }
    clean = model.pad(model.stacked @ theta)
    expanding = 0
    slot = 0
    chunk = None
    for t in range(1, horizon + 1):
        c = (t - 1) % NOISE_CHUNK
        if c == 0:
            size = min(NOISE_CHUNK, horizon - t + 1)
            noise = np.stack([g.standard_normal((size, model.total_rows)) for g in noise_rngs], axis=1)
            chunk = clean + model.pad(noise)
        y = chunk[c]
        k = edges[:, t - 1]
        if "fade" in states:
            states["fade"] = fade_step(states["fade"], exp.weight_stack[k], y, model)
        if "ci" in states:
            states["ci"] = ci_step(states["ci"], exp.laplacian_stack[k], y, model, ci_cfg)
            expanding += int(np.count_nonzero(ci_cfg.beta(t) * exp.laplacian_lambda_max[k] > 2))
        y_bar = y_bar + (y - y_bar) / t
        if slot < times.size and times[slot] == t:
            for name in out:
                est = ml_estimate(model, y_bar)[:, None, :] if name == "ml" else states[name].theta_hat
                out[name][:, slot] = est if record == "estimates" else est - theta
            slot += 1
    if expanding:
        log.warning(
            "CI consensus matrix I - beta(t) L(t) had norm > 1 on %d run-steps (runs %d..%d)",
            expanding, runs[0], runs[-1],
        )
    return edges, times, out


def run_trajectory(cfg, run_index: int, record: str | None = None, decimate: int | None = None) -> RunTrace:
    exp = _as_experiment(cfg)
    edges, times, out = simulate(exp, [run_index], record, decimate)
    return RunTrace(
        run_index,
        exp.cfg.base_seed,
        edges[0],
        times,
        record or exp.cfg.record,
        {name: arr[0] for name, arr in out.items()},
    )


def _batch_errors(args):
    exp, indices = args
    _, _, out = simulate(exp, indices, record="errors")
    return out


def run_monte_carlo(cfg, progress=None) -> McSummary:
    """Aggregate ``cfg.runs`` trajectories into per-estimator error curves."""
    exp = _as_experiment(cfg)
    cfg = exp.cfg
    times = cfg.record_times()
    accs = {name: MseAccumulator(times) for name in cfg.estimators}
    chunks = [
        list(range(start, min(start + cfg.batch, cfg.runs)))
        for start in range(0, cfg.runs, cfg.batch)
    ]
    jobs = [(exp, c) for c in chunks]
    if cfg.workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = pool.map(_batch_errors, jobs)
            _reduce(results, accs, chunks, progress)
    else:
        _reduce(map(_batch_errors, jobs), accs, chunks, progress)
    ml = ml_mse_closed_form(exp.model, times)
    curves = {name: acc.result(ml) for name, acc in accs.items()}
    gain = exp.ci_config.gain if "ci" in cfg.estimators else None
    return McSummary(curves, times, cfg.runs, efficiency_constant(exp.model), gain)


def _reduce(results, accs, chunks, progress):
    # results arrive in chunk order; runs are added one by one in index order
    for chunk, out in zip(chunks, results):
        for j, run_index in enumerate(chunk):
            for name, acc in accs.items():
                if not np.all(np.isfinite(out[name][j])):
                    raise FloatingPointError(f"run {run_index}: {name} estimate is not finite")
                acc.add(out[name][j])
        if progress is not None:
            progress(chunk[-1] + 1)


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})

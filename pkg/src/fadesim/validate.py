"""Check an experiment against the assumptions the estimators rely on."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import network as net
from .errors import AssumptionViolation, ConnectivityError, ObservabilityError, WeightMatrixError
from .harness import ExperimentConfig, load_ensemble, load_model
from .model import check_global_observability, numerical_rank

NOISE = "gaussian noise"
OBSERVABILITY = ObservabilityError.assumption
CONNECTIVITY = ConnectivityError.assumption
WEIGHTS = WeightMatrixError.assumption
SPECTRAL = "average-matrix spectra"


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool | None  # None = could not be evaluated
    detail: str

    def line(self) -> str:
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[self.passed]
        return f"{status}  {self.name}: {self.detail}"


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if c.passed is False]

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def validate_config(cfg: ExperimentConfig) -> ValidationReport:
    """Run every assumption check; never raises for assumption failures."""
    report = ValidationReport()
    add = report.checks.append
    add(Check(NOISE, True, "unit-covariance gaussian noise is built into the measurement sampler"))

    try:
        model = load_model(cfg)
    except ObservabilityError as exc:
        add(Check(OBSERVABILITY, False, str(exc)))
        for name in (CONNECTIVITY, WEIGHTS, SPECTRAL):
            add(Check(name, None, "skipped: no sensing model"))
        return report
    rank = numerical_rank(model.stacked)
    if check_global_observability(model):
        add(Check(OBSERVABILITY, True, f"stacked H ({model.total_rows}x{model.dim}) has full column rank {rank}"))
    else:
        add(Check(OBSERVABILITY, False, f"stacked H has rank {rank} < d = {model.dim}"))

    ens = None
    if cfg.ensemble_file is not None:
        nodes, edge_sets, probs = net.read_ensemble_raw(cfg.ensemble_file)
        try:
            ens = net.EdgeSetEnsemble(nodes, edge_sets, probs)
        except AssumptionViolation as exc:
            add(Check(CONNECTIVITY, False, str(exc)))
    else:
        try:
            ens = load_ensemble(cfg, model.agents)
        except ConnectivityError as exc:
            add(Check(CONNECTIVITY, False, str(exc)))
            edge_sets = None
    if ens is not None:
        edge_sets = ens.edge_sets
        nodes = ens.nodes
        if nodes != model.agents:
            add(Check(CONNECTIVITY, False, f"ensemble has {nodes} nodes, model has {model.agents} agents"))
        elif net.check_average_connectivity(ens):
            stats = net.ensemble_stats(ens)
            add(Check(CONNECTIVITY, True, (
                f"union of {ens.size} edge-sets is connected "
                f"(covers {stats['union_coverage']:.0%} of pairs, mean degree {stats['mean_degree']:.2f})"
            )))
        else:
            add(Check(CONNECTIVITY, False, f"union of the {ens.size} edge-sets leaves the graph disconnected"))

    weights = None
    if edge_sets is not None:
        sets = [net.make_edge_set(e, nodes) for e in edge_sets]
        if cfg.weights_file is not None:
            weights = net.read_weights(cfg.weights_file)
            if len(weights) != len(sets) or weights[0].size != nodes:
                add(Check(WEIGHTS, False, "weights file does not match the ensemble"))
                weights = None
            source = "weights file"
        else:
            weights = [net.metropolis_weights(e, nodes, k) for k, e in enumerate(sets)]
            source = "Metropolis"
        if weights is not None:
            problems = [
                f"W_{k + 1} " + "; ".join(p)
                for k, (w, e) in enumerate(zip(weights, sets))
                if (p := net.weight_matrix_problems(w, e))
            ]
            if problems:
                add(Check(WEIGHTS, False, " | ".join(problems)))
                weights = None
            else:
                add(Check(WEIGHTS, True, f"{len(weights)} {source} matrices are symmetric, nonnegative, "
                          "row-stochastic, positive-diagonal and mirror their edge-sets"))
    else:
        add(Check(WEIGHTS, None, "no ensemble to build weight matrices for"))

    if ens is not None and weights is not None and ens.nodes == model.agents:
        rep = net.average_matrices(ens, weights)
        ok = rep.rho_tilde < 1 and rep.second_eig_bar < 1
        add(Check(SPECTRAL, ok, (
            f"rho(W_tilde) = {rep.rho_tilde:.6g}, second eigenvalue modulus of W_bar = {rep.second_eig_bar:.6g}"
        )))
    else:
        add(Check(SPECTRAL, None, "skipped: ensemble or weights invalid"))
    return report


def assert_valid(cfg: ExperimentConfig) -> ValidationReport:
    report = validate_config(cfg)
    if not report.ok:
        failed = [c for c in report.checks if c.passed is False]
        exc_type = {
            OBSERVABILITY: ObservabilityError,
            CONNECTIVITY: ConnectivityError,
            WEIGHTS: WeightMatrixError,
        }.get(failed[0].name, AssumptionViolation) if failed else AssumptionViolation
        raise exc_type("; ".join(c.line() for c in report.checks if not c.passed))
    return report


def spectral_summary(report: net.SpectralReport) -> dict:
    return {
        "rho_tilde": report.rho_tilde,
        "second_eig_bar": report.second_eig_bar,
        "connected": report.connected,
        "contraction": report.contraction,
    }

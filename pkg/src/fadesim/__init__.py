"""Distributed parameter estimation over randomly switching networks.

FADE, consensus+innovations and the centralized maximum-likelihood
estimator for linear-gaussian sensing, with Metropolis mixing over i.i.d.
edge-set ensembles and a seeded Monte Carlo harness.
"""

__version__ = "0.1.0"

from .analysis import (
    ConsensusDecomposition,
    ErrorCurve,
    decompose,
    efficiency_constant,
    empirical_mse,
    ml_mse_closed_form,
)
from .errors import (
    AssumptionViolation,
    ConfigError,
    ConnectivityError,
    ObservabilityError,
    WeightMatrixError,
)
from .estimators import (
    CiConfig,
    NetworkEstimate,
    centralized_step,
    ci_step,
    fade_step,
    ml_estimate,
    running_mean_update,
)
from .harness import Experiment, ExperimentConfig, McSummary, RunTrace, run_monte_carlo, run_trajectory
from .model import (
    Measurement,
    SensingModel,
    build_gains,
    check_global_observability,
    random_low_rank_model,
    read_model,
    sample_measurement,
    write_model,
)
from .network import (
    EdgeSetEnsemble,
    SpectralReport,
    WeightMatrix,
    average_matrices,
    check_average_connectivity,
    generate_random_ensemble,
    laplacian,
    metropolis_weights,
    read_ensemble,
    sample_edge_index,
    write_ensemble,
)

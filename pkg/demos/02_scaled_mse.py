"""Scaled MSE: how close each estimator gets to the centralized optimum.

t * MSE of the centralized estimator is the constant tr((sum H_n^T H_n)^-1).
An asymptotically efficient distributed estimator approaches the same
constant at every agent.  Fewer runs than the bundled configs, to keep this
quick.
"""

from fadesim.harness import ExperimentConfig, run_monte_carlo

for label, density in (("sparse", 0.022), ("dense", 0.1)):
    cfg = ExperimentConfig(density=density, runs=20, decimate=500)
    summary = run_monte_carlo(cfg)
    print(f"\n{label} network, {summary.runs} runs, CI gain {summary.ci_gain:.3g}")
    print(f"centralized constant: {summary.efficiency:.5f}")
    print(f"{'t':>6} " + " ".join(f"{n:>12}" for n in summary.curves))
    for i, t in enumerate(summary.times):
        row = [summary.curves[n].scaled_mse[i, 0] / summary.efficiency for n in summary.curves]
        print(f"{t:>6} " + " ".join(f"{v:>12.4g}" for v in row))

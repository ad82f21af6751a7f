"""Figure rendering for recorded traces. File output only, no display.

Four standard views: per-coordinate iterate trajectories against the known
optimizer, cross-agent deviations on a log scale, constraint residuals, and
the agents' running estimates of the optimal value. Filenames derive from
the output stem, so a rerun overwrites the same files.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .trace import compute_metrics


def _finish(fig, path, paths):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)


def render_figures(trace, problem, stem):
    """Write the standard figures for one trace; returns the paths written.

    ``stem`` is the common filename prefix, typically the CSV path without
    its extension.
    """
    paths = []
    ks = trace.ks
    N, n = trace.n_agents, trace.n

    fig, axes = plt.subplots(n, 1, figsize=(7, 1.9 * n), sharex=True)
    axes = np.atleast_1d(axes)
    for j, ax in enumerate(axes):
        for i in range(N):
            ax.plot(ks, trace.x[:, i, j], lw=0.8)
        if trace.x_ref is not None:
            ax.axhline(trace.x_ref[j], color="black", ls="--", lw=0.8)
        ax.set_ylabel(f"x{j}")
    axes[-1].set_xlabel("round")
    axes[0].set_title(f"{trace.algorithm} on {trace.problem_name}: iterates")
    _finish(fig, f"{stem}_trajectories.png", paths)

    metrics = compute_metrics(trace, problem)
    fig, ax = plt.subplots(figsize=(7, 4))
    for key, label in (("delta_x", "primal spread"),
                       ("delta_mu", "inequality dual spread"),
                       ("delta_lambda", "equality dual spread")):
        if key in metrics and np.any(metrics[key] > 0):
            ax.semilogy(ks, np.maximum(metrics[key], 1e-300), lw=0.9, label=label)
    ax.set_xlabel("round")
    ax.set_ylabel("max pairwise distance")
    ax.set_title("cross-agent deviations")
    ax.legend()
    _finish(fig, f"{stem}_deviations.png", paths)

    if "feas_g" in metrics or "feas_h" in metrics:
        fig, ax = plt.subplots(figsize=(7, 4))
        if "feas_g" in metrics:
            ax.plot(ks, metrics["feas_g"], lw=0.9, label="inequality violation")
        if "feas_h" in metrics:
            ax.plot(ks, metrics["feas_h"], lw=0.9, label="equality residual")
        ax.set_xlabel("round")
        ax.set_ylabel("violation at the agent mean")
        ax.set_title("constraint residuals")
        ax.legend()
        _finish(fig, f"{stem}_feasibility.png", paths)

    fig, ax = plt.subplots(figsize=(7, 4))
    for i in range(N):
        ax.plot(ks, trace.y[:, i], lw=0.8)
    if trace.p_ref is not None:
        ax.axhline(trace.p_ref, color="black", ls="--", lw=0.8)
    ax.set_xlabel("round")
    ax.set_ylabel("estimated optimal value")
    ax.set_title("optimal-value tracking")
    _finish(fig, f"{stem}_value.png", paths)
    return paths

"""Run traces: everything a simulation writes down, one snapshot per round.

A snapshot at round k holds the states x, duals and the optimal-value
estimates y of every agent after k update rounds (k = 0 is the initial
state). Metrics derived from snapshots (spread across agents, feasibility
of the agent mean, distance to a reference solution) are computed lazily
from the arrays so the runners stay lean.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RunTrace:
    """Recorded history of one run.

    Array shapes: ``x`` is (R, N, n); ``mu`` is (R, N, m) or None; ``lam``
    is (R, N, n_eq) or None; ``y`` is (R, N); ``ks`` holds the R recorded
    round indices; ``alphas`` holds the step sizes actually used, one row
    per executed round (scalar schedules stored as shape (rounds,)).
    """

    algorithm: str
    problem_name: str
    ks: np.ndarray
    x: np.ndarray
    y: np.ndarray
    mu: np.ndarray = None
    lam: np.ndarray = None
    alphas: np.ndarray = None
    x_ref: np.ndarray = None
    p_ref: float = None
    meta: dict = field(default_factory=dict)

    @property
    def n_records(self):
        return self.x.shape[0]

    @property
    def n_agents(self):
        return self.x.shape[1]

    @property
    def n(self):
        return self.x.shape[2]

    @property
    def n_inequality(self):
        return 0 if self.mu is None else self.mu.shape[2]

    @property
    def n_equality(self):
        return 0 if self.lam is None else self.lam.shape[2]

    def final_x(self):
        return self.x[-1]

    def final_y(self):
        return self.y[-1]

    def mean_x(self):
        """Agent average of x per record, shape (R, n)."""
        return self.x.mean(axis=1)


def pairwise_spread(arr):
    """Max over agent pairs of the Euclidean distance, per record.

    ``arr`` is (R, N, d); the result is (R,). Zero when there is only one
    agent or the channel is empty.
    """
    R, N, d = arr.shape
    if N == 1 or d == 0:
        return np.zeros(R)
    out = np.zeros(R)
    for i in range(N):
        for j in range(i + 1, N):
            dist = np.linalg.norm(arr[:, i, :] - arr[:, j, :], axis=1)
            np.maximum(out, dist, out=out)
    return out


def compute_metrics(trace, problem):
    """Round-level metrics as a dict of (R,) arrays.

    Keys always present: delta_x. Present when the channel exists: delta_mu,
    delta_lambda. Present when the problem has the constraint: feas_g
    (largest positive part of g at the agent mean), feas_h (largest absolute
    equality residual at the agent mean). Present when references are known:
    dist_opt (sup-norm distance of the agent mean to x_ref) and y_err
    (worst agent's |y - p_ref|).
    """
    metrics = {"delta_x": pairwise_spread(trace.x)}
    if trace.mu is not None:
        metrics["delta_mu"] = pairwise_spread(trace.mu)
    if trace.lam is not None:
        metrics["delta_lambda"] = pairwise_spread(trace.lam)
    x_hat = trace.mean_x()
    if problem.n_inequality:
        g_hat = np.array([problem.inequality_values(xh) for xh in x_hat])
        metrics["feas_g"] = np.maximum(g_hat, 0.0).max(axis=1)
    if problem.n_equality:
        h_hat = np.array([problem.equality_residual(xh) for xh in x_hat])
        metrics["feas_h"] = np.abs(h_hat).max(axis=1)
    if trace.x_ref is not None:
        metrics["dist_opt"] = np.abs(x_hat - trace.x_ref[None, :]).max(axis=1)
    if trace.p_ref is not None:
        metrics["y_err"] = np.abs(trace.y - trace.p_ref).max(axis=1)
    return metrics


def rounds_to_tolerance(trace, tol, x_ref=None):
    """Settling round for the agent mean against a reference point.

    Returns the first recorded round from which the sup-norm distance of the
    mean to x_ref stays at or below tol for the rest of the trace, so a brief
    swing through the tolerance ball does not count as convergence.  Returns
    None when the trace ends outside tolerance or no reference is known.
    """
    if x_ref is None:
        x_ref = trace.x_ref
    if x_ref is None:
        return None
    x_ref = np.asarray(x_ref, dtype=float)
    dist = np.abs(trace.mean_x() - x_ref[None, :]).max(axis=1)
    bad = np.nonzero(dist > tol)[0]
    if bad.size == 0:
        return int(trace.ks[0])
    if bad[-1] == dist.shape[0] - 1:
        return None
    return int(trace.ks[bad[-1] + 1])


def summarize(trace, problem):
    """Human-oriented end-of-run summary lines."""
    metrics = compute_metrics(trace, problem)
    lines = [
        f"algorithm {trace.algorithm} on {trace.problem_name}: "
        f"{int(trace.ks[-1])} rounds, {trace.n_agents} agents",
        f"  spread of x across agents: {metrics['delta_x'][-1]:.3e}",
    ]
    if "feas_g" in metrics:
        lines.append(f"  inequality violation at the mean: {metrics['feas_g'][-1]:.3e}")
    if "feas_h" in metrics:
        lines.append(f"  equality residual at the mean: {metrics['feas_h'][-1]:.3e}")
    if "dist_opt" in metrics:
        lines.append(f"  sup-norm distance to the reference optimum: {metrics['dist_opt'][-1]:.3e}")
    if "y_err" in metrics:
        lines.append(f"  worst value-estimate error: {metrics['y_err'][-1]:.3e}")
    for key in ("dual_radius_min", "bounds_rounds"):
        if key in trace.meta:
            lines.append(f"  {key}: {trace.meta[key]}")
    return lines

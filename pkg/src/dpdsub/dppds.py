"""Distributed penalty primal-dual subgradient method (dppds).

Problems with equality constraints (and optionally inequality constraints)
over one local set that all agents share. The saddle function replaces
mu' g with mu' max(g, 0) and adds lam' |h|, which keeps optimal multipliers
meaningful without compact dual sets: the dual iterates walk free, and the
step-size conditions checked by ``validate_penalty_step_conditions`` are
what keeps them bounded. A configurable cap aborts the run with diagnostics
if the multipliers blow up anyway, which is the visible symptom of a
schedule whose conditions only held as finite-horizon evidence.

Mixing, value tracking, recording and probe machinery are shared with the
Lagrangian solver.
"""

import numpy as np

from dataclasses import dataclass

from .convex import penalty_primal_subgradient, penalty_supgradient, penalty_value
from .dlpds import (
    _alpha_vector,
    _initial_x,
    _record_rounds,
    _spread_and_step,
    check_tracker_conservation,
    draw_primal_probes,
    mix,
)
from .schedules import PerAgentSchedules, validate_penalty_step_conditions
from .trace import RunTrace


@dataclass
class DppdsAgentState:
    """All agents' states stacked row-wise; two dual channels."""

    x: np.ndarray
    mu: np.ndarray
    lam: np.ndarray
    y: np.ndarray
    f_prev: np.ndarray

    def copy(self):
        return DppdsAgentState(self.x.copy(), self.mu.copy(), self.lam.copy(),
                               self.y.copy(), self.f_prev.copy())


def dppds_round(state, pieces, shared_set, W, alpha, k):
    """One synchronous round for all agents; returns the next state.

    The dual updates are plain unprojected ascent steps on the penalty
    supgradients, both of which are componentwise nonnegative, so the duals
    can only grow or mix; nonnegativity is preserved by balanced weights.
    """
    N = state.x.shape[0]
    mixed = mix(W, state.x, state.mu, state.y, state.lam)
    x_next = np.empty_like(state.x)
    mu_next = np.empty_like(state.mu)
    lam_next = np.empty_like(state.lam)
    s_x = np.empty_like(state.x)
    gplus = np.empty_like(state.mu)
    habs = np.empty_like(state.lam)
    f_curr = np.empty(N)
    for i in range(N):
        s_x[i] = penalty_primal_subgradient(pieces[i], mixed.v_x[i],
                                            mixed.v_mu[i], mixed.v_lam[i])
        x_next[i] = shared_set.project(mixed.v_x[i] - alpha[i] * s_x[i])
        gplus[i], habs[i] = penalty_supgradient(pieces[i], mixed.v_x[i])
        mu_next[i] = mixed.v_mu[i] + alpha[i] * gplus[i]
        lam_next[i] = mixed.v_lam[i] + alpha[i] * habs[i]
        f_curr[i] = pieces[i].f(state.x[i])
    if k == 0:
        y_next = N * f_curr
    else:
        y_next = mixed.v_y + N * (f_curr - state.f_prev)
    next_state = DppdsAgentState(x=x_next, mu=mu_next, lam=lam_next,
                                 y=y_next, f_prev=f_curr)
    return next_state, mixed, s_x, gplus, habs


def check_penalty_relations(state, next_state, mixed, s_x, gplus, habs, pieces,
                            alpha, probes_x, probes_dual, k, tol=1e-8):
    """Verify the one-round penalty relations at probe points.

    The primal relation mirrors the Lagrangian one with the penalty function
    in place of the Lagrangian. The dual relation says the unprojected dual
    steps cannot move the iterates toward any nonnegative probe multiplier
    faster than the penalty gap plus the squared step allows.
    """
    N = state.x.shape[0]
    h_at_v = np.array([
        penalty_value(pieces[i], mixed.v_x[i], mixed.v_mu[i], mixed.v_lam[i])
        for i in range(N)
    ])
    e_x = next_state.x - mixed.v_x
    lhs_primal = float(((e_x + alpha[:, None] * s_x) ** 2).sum())
    step_term = float((alpha ** 2 * (s_x ** 2).sum(axis=1)).sum())
    for p, x_probe in enumerate(probes_x):
        telescope = float(((state.x - x_probe) ** 2).sum()
                          - ((next_state.x - x_probe) ** 2).sum())
        gap = sum(
            alpha[i] * (h_at_v[i] - penalty_value(pieces[i], x_probe,
                                                  mixed.v_mu[i], mixed.v_lam[i]))
            for i in range(N)
        )
        rhs = step_term + telescope - 2.0 * gap
        if lhs_primal > rhs + tol:
            raise AssertionError(
                f"penalty primal relation violated at round {k}, probe {p}: "
                f"lhs {lhs_primal:.12g} > rhs {rhs:.12g}"
            )
    sq_steps = float((alpha ** 2 * ((gplus ** 2).sum(axis=1)
                                    + (habs ** 2).sum(axis=1))).sum())
    for p, (mu_probe, lam_probe) in enumerate(probes_dual):
        telescope = float(((state.mu - mu_probe) ** 2).sum()
                          - ((next_state.mu - mu_probe) ** 2).sum()
                          + ((state.lam - lam_probe) ** 2).sum()
                          - ((next_state.lam - lam_probe) ** 2).sum())
        gap = sum(
            alpha[i] * (h_at_v[i] - penalty_value(pieces[i], mixed.v_x[i],
                                                  mu_probe, lam_probe))
            for i in range(N)
        )
        rhs = telescope + 2.0 * gap + sq_steps
        if rhs < -tol:
            raise AssertionError(
                f"penalty dual relation violated at round {k}, probe {p}: "
                f"rhs {rhs:.12g} < 0"
            )


def check_dual_sum_recursion(state, next_state, gplus, habs, alpha, k, tol=1e-12):
    """Summed duals must grow by exactly the step-weighted penalty residuals.

    Balanced weights preserve channel sums under mixing, so the only change
    to the summed multipliers is the sum of the local ascent steps. This is
    an identity of the update law, not an asymptotic statement, which is why
    the tolerance is tight.
    """
    mu_drift = abs(float(next_state.mu.sum() - state.mu.sum()
                         - (alpha[:, None] * gplus).sum()))
    lam_drift = abs(float(next_state.lam.sum() - state.lam.sum()
                          - (alpha[:, None] * habs).sum()))
    if max(mu_drift, lam_drift) > tol:
        raise AssertionError(
            f"dual sum recursion broke at round {k}: "
            f"mu drift {mu_drift:.3e}, lam drift {lam_drift:.3e}"
        )


def draw_penalty_dual_probes(n_inequality, n_equality, count, seed, scale=5.0):
    """Nonnegative probe multiplier pairs (mu, lam) for the dual relation."""
    rng = np.random.default_rng([int(seed), 7335])
    mus = rng.uniform(0.0, scale, size=(count, n_inequality))
    lams = rng.uniform(0.0, scale, size=(count, n_equality))
    return list(zip(mus, lams))


def run_dppds(problem, G, schedule, rounds, *, record_every=1,
              debug_asserts=False, probe_count=8, early_stop=None,
              dual_cap=1e9, x0=None, graph_start=0, seed=0):
    """Simulate the penalty method and return the run trace.

    Preconditions checked here: all local sets are structurally identical
    (the update law projects every agent onto the same set), and the step
    schedule survives ``validate_penalty_step_conditions`` on the run
    horizon; a FAIL verdict aborts before the first round.
    """
    N = problem.n_agents
    if G.n_agents != N:
        raise ValueError("graph and problem disagree on the number of agents")
    if rounds < 1:
        raise ValueError("need at least one round")
    if not problem.has_identical_sets():
        raise ValueError("the penalty solver needs identical local sets")
    if problem.n_inequality == 0 and problem.n_equality == 0:
        raise ValueError("no constraints; use run_primal_only")
    base = schedule.base if isinstance(schedule, PerAgentSchedules) else schedule
    report = validate_penalty_step_conditions(base, max(rounds, 1024))
    if not report.ok:
        raise ValueError("step schedule fails its conditions:\n" + report.summary())

    shared_set = problem.local_sets[0]
    m, n_eq = problem.n_inequality, problem.n_equality
    pieces = [problem.penalty_pieces(i) for i in range(N)]
    x = _initial_x(problem, x0)
    f0 = np.array([problem.objectives[i](x[i]) for i in range(N)])
    state = DppdsAgentState(x=x, mu=np.zeros((N, m)), lam=np.zeros((N, n_eq)),
                            y=N * f0, f_prev=f0.copy())
    meta = {"graph": G.name, "seed": seed, "graph_offset": graph_start,
            "schedule_verdict": report.verdict}

    probes_x = probes_dual = None
    if debug_asserts:
        probes_x = draw_primal_probes(problem, probe_count, seed)
        probes_dual = draw_penalty_dual_probes(m, n_eq, probe_count, seed)

    records_at = _record_rounds(rounds, record_every)
    rec_k, rec_x, rec_mu, rec_lam, rec_y, alphas = [], [], [], [], [], []

    def record(k, st):
        rec_k.append(k)
        rec_x.append(st.x.copy())
        rec_mu.append(st.mu.copy())
        rec_lam.append(st.lam.copy())
        rec_y.append(st.y.copy())

    if 0 in records_at:
        record(0, state)
    for k in range(rounds):
        W = G.weights_at(graph_start + k)
        alpha = _alpha_vector(schedule, k, N)
        next_state, mixed, s_x, gplus, habs = dppds_round(
            state, pieces, shared_set, W, alpha, k)
        alphas.append(alpha.copy())
        if debug_asserts:
            check_penalty_relations(state, next_state, mixed, s_x, gplus, habs,
                                    pieces, alpha, probes_x, probes_dual, k)
        check_dual_sum_recursion(state, next_state, gplus, habs, alpha, k)
        check_tracker_conservation(next_state.y, next_state.f_prev, k)
        worst_dual = max(
            float(np.abs(next_state.mu).max()) if m else 0.0,
            float(np.abs(next_state.lam).max()) if n_eq else 0.0,
        )
        if worst_dual > dual_cap:
            raise RuntimeError(
                f"multiplier blow-up at round {k + 1}: max |dual| {worst_dual:.3e} "
                f"exceeds the cap {dual_cap:.3e}; the step schedule is too aggressive"
            )
        stop = False
        if early_stop is not None:
            spread, step = _spread_and_step(next_state.x, state.x)
            stop = spread <= early_stop and step <= early_stop
        state = next_state
        executed = k + 1
        if executed in records_at or stop:
            if not rec_k or rec_k[-1] != executed:
                record(executed, state)
        if stop:
            meta["stopped_at"] = executed
            break

    return RunTrace(
        algorithm="dppds",
        problem_name=problem.name,
        ks=np.array(rec_k, dtype=int),
        x=np.stack(rec_x),
        y=np.stack(rec_y),
        mu=np.stack(rec_mu) if m else None,
        lam=np.stack(rec_lam) if n_eq else None,
        alphas=np.stack(alphas),
        x_ref=problem.x_ref,
        p_ref=problem.p_ref,
        meta=meta,
    )

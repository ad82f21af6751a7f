"""Distributed Lagrangian primal-dual subgradient method (dlpds).

Problems with a shared inequality constraint and per-agent local sets. Each
round every agent mixes the states it hears with its consensus weights, then
takes one projected primal subgradient step on its own Lagrangian piece, one
projected dual supgradient step, and one dynamic-average update of its
running estimate of the optimal value.

The dual steps are projected onto compact sets built beforehand by the
bound protocol in ``bounds``; that protocol consumes the first (N-1) * B
rounds of the same graph sequence, after which the main loop starts with a
fresh step-size index.

``run_primal_only`` is the degenerate case without coupling constraints:
the same mixed projected subgradient step on the private objectives alone
(any coupling constraints the problem declares are ignored), still carrying
the optimal-value tracker.
"""

from dataclasses import dataclass

import numpy as np

from .bounds import DualBoundConfig, build_dual_boxes
from .convex import (
    Box,
    LagrangianPieces,
    lagrangian_dual_supgradient,
    lagrangian_primal_subgradient,
    lagrangian_value,
)
from .trace import RunTrace


@dataclass
class DlpdsAgentState:
    """All agents' states stacked row-wise: row i belongs to agent i.

    ``f_prev`` caches each agent's objective value at its previous iterate,
    which is what the value tracker differences.
    """

    x: np.ndarray
    mu: np.ndarray
    y: np.ndarray
    f_prev: np.ndarray

    def copy(self):
        return DlpdsAgentState(self.x.copy(), self.mu.copy(),
                               self.y.copy(), self.f_prev.copy())


@dataclass
class MixedIntermediates:
    """Consensus-weighted combinations v of the neighbors' states."""

    v_x: np.ndarray
    v_mu: np.ndarray = None
    v_y: np.ndarray = None
    v_lam: np.ndarray = None


def mix(W, x, mu=None, y=None, lam=None):
    """Apply one round's weights to every channel that is present."""
    W = np.asarray(W, dtype=float)
    return MixedIntermediates(
        v_x=W @ x,
        v_mu=None if mu is None else W @ mu,
        v_y=None if y is None else W @ y,
        v_lam=None if lam is None else W @ lam,
    )


def _alpha_vector(schedule, k, n_agents):
    return np.broadcast_to(np.asarray(schedule.alpha(k), dtype=float), (n_agents,))


def dlpds_round(state, pieces, local_sets, dual_boxes, W, alpha, k):
    """One synchronous round for all agents; returns the next state.

    ``alpha`` is the length-N array of this round's step sizes. Also returns
    the mixed intermediates and the primal/dual step directions, which the
    debug checks and tests want to see.
    """
    N = state.x.shape[0]
    use_duals = state.mu.shape[1] > 0
    mixed = mix(W, state.x, state.mu if use_duals else None, state.y)
    x_next = np.empty_like(state.x)
    mu_next = np.empty_like(state.mu)
    d_x = np.empty_like(state.x)
    d_mu = np.empty_like(state.mu)
    f_curr = np.empty(N)
    for i in range(N):
        v_mu_i = mixed.v_mu[i] if use_duals else np.zeros(0)
        d_x[i] = lagrangian_primal_subgradient(pieces[i], mixed.v_x[i], v_mu_i)
        x_next[i] = local_sets[i].project(mixed.v_x[i] - alpha[i] * d_x[i])
        if use_duals:
            d_mu[i] = lagrangian_dual_supgradient(pieces[i], mixed.v_x[i])
            mu_next[i] = dual_boxes[i].ball.project(v_mu_i + alpha[i] * d_mu[i])
        f_curr[i] = pieces[i].f(state.x[i])
    if k == 0:
        # The tracker starts one round late: its first value is each agent's
        # own objective scaled by N, with no mixing applied yet.
        y_next = N * f_curr
    else:
        y_next = mixed.v_y + N * (f_curr - state.f_prev)
    next_state = DlpdsAgentState(x=x_next, mu=mu_next, y=y_next, f_prev=f_curr)
    return next_state, mixed, d_x, d_mu


# ---------------------------------------------------------------------------
# debug probes: the per-round inequalities the convergence argument rests on
# ---------------------------------------------------------------------------

def draw_primal_probes(problem, count, seed):
    """Deterministic probe points inside the intersection of the local sets."""
    S = problem.intersection_set()
    rng = np.random.default_rng([int(seed), 7333])
    if isinstance(S, Box):
        return rng.uniform(S.lo, S.hi, size=(count, problem.n))
    raw = rng.normal(scale=3.0, size=(count, problem.n))
    return np.stack([S.project(z) for z in raw])


def draw_dual_probes(ball, count, seed):
    """Deterministic probe multipliers inside a shared dual ball."""
    rng = np.random.default_rng([int(seed), 7334])
    raw = rng.uniform(0.0, max(ball.radius, 1.0), size=(count, ball.dim))
    return np.stack([ball.project(z) for z in raw])


def check_lagrangian_relations(state, next_state, mixed, d_x, d_mu, pieces,
                               alpha, probes_x, probes_mu, k, tol=1e-8):
    """Verify the one-round primal and dual relations at probe points.

    The primal relation bounds the squared pre-projection step error by the
    step magnitude, the telescoping distance to the probe, and the Lagrangian
    gap at the probe; the dual relation is its mirror image. A violation
    beyond ``tol`` means the implementation broke the geometry the analysis
    relies on, so it aborts the run.
    """
    N = state.x.shape[0]
    use_duals = state.mu.shape[1] > 0
    e_x = next_state.x - mixed.v_x
    lhs_primal = float(((e_x + alpha[:, None] * d_x) ** 2).sum())
    step_term = float((alpha ** 2 * (d_x ** 2).sum(axis=1)).sum())
    l_at_v = np.array([
        lagrangian_value(pieces[i], mixed.v_x[i],
                         mixed.v_mu[i] if use_duals else np.zeros(0))
        for i in range(N)
    ])
    for p, x_probe in enumerate(probes_x):
        telescope = float(((state.x - x_probe) ** 2).sum()
                          - ((next_state.x - x_probe) ** 2).sum())
        gap = sum(
            alpha[i] * (l_at_v[i] - lagrangian_value(
                pieces[i], x_probe, mixed.v_mu[i] if use_duals else np.zeros(0)))
            for i in range(N)
        )
        rhs = step_term + telescope - 2.0 * gap
        if lhs_primal > rhs + tol:
            raise AssertionError(
                f"primal iteration relation violated at round {k}, probe {p}: "
                f"lhs {lhs_primal:.12g} > rhs {rhs:.12g}"
            )
    if not use_duals:
        return
    e_mu = next_state.mu - mixed.v_mu
    lhs_dual = float(((e_mu - alpha[:, None] * d_mu) ** 2).sum())
    dual_step_term = float((alpha ** 2 * (d_mu ** 2).sum(axis=1)).sum())
    for p, mu_probe in enumerate(probes_mu):
        telescope = float(((state.mu - mu_probe) ** 2).sum()
                          - ((next_state.mu - mu_probe) ** 2).sum())
        gap = sum(
            alpha[i] * (l_at_v[i] - lagrangian_value(pieces[i], mixed.v_x[i], mu_probe))
            for i in range(N)
        )
        rhs = dual_step_term + telescope + 2.0 * gap
        if lhs_dual > rhs + tol:
            raise AssertionError(
                f"dual iteration relation violated at round {k}, probe {p}: "
                f"lhs {lhs_dual:.12g} > rhs {rhs:.12g}"
            )


def check_tracker_conservation(y_next, f_curr, k, tol=1e-10):
    """The tracker sums must equal N times the summed objectives exactly."""
    n = y_next.size
    drift = abs(float(y_next.sum()) - n * float(f_curr.sum()))
    if drift > tol:
        raise AssertionError(
            f"value tracker lost conservation at round {k}: drift {drift:.3e}"
        )


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _initial_x(problem, x0):
    # Default start: each agent projects the origin onto its local set. For
    # problems whose constraint is slack there this avoids kicking the dual
    # channel with one huge first residual.
    if x0 is None:
        zero = np.zeros(problem.n)
        return np.stack([S.project(zero) for S in problem.local_sets])
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim == 1:
        x0 = np.tile(x0, (problem.n_agents, 1))
    for i, S in enumerate(problem.local_sets):
        if not S.contains(x0[i]):
            raise ValueError(f"x0 row {i} lies outside agent {i}'s local set")
    return x0.copy()


def _record_rounds(rounds, record_every):
    ks = list(range(0, rounds + 1, max(1, int(record_every))))
    if ks[-1] != rounds:
        ks.append(rounds)
    return set(ks)


def _spread_and_step(x_next, x):
    spread = 0.0
    N = x_next.shape[0]
    for i in range(N):
        for j in range(i + 1, N):
            spread = max(spread, float(np.linalg.norm(x_next[i] - x_next[j])))
    step = float(np.abs(x_next - x).max())
    return spread, step


def _run_lagrangian(problem, G, schedule, rounds, use_duals, bound_config,
                    dual_boxes, record_every, debug_asserts, probe_count,
                    early_stop, x0, graph_start, seed, algorithm):
    N = problem.n_agents
    if G.n_agents != N:
        raise ValueError("graph and problem disagree on the number of agents")
    if problem.n_equality:
        raise ValueError("equality constraints need the penalty solver")
    if rounds < 1:
        raise ValueError("need at least one round")
    m = problem.n_inequality if use_duals else 0
    if use_duals:
        pieces = [problem.lagrangian_pieces(i) for i in range(N)]
    else:
        pieces = [LagrangianPieces(agent=i, f=problem.objectives[i]) for i in range(N)]
    meta = {"graph": G.name, "seed": seed}
    offset = graph_start
    boxes = dual_boxes
    if m and boxes is None:
        config = bound_config or DualBoundConfig(seed=seed)
        boxes, used = build_dual_boxes(problem, G, config, start_round=graph_start)
        offset = graph_start + used
        meta["bounds_rounds"] = used
        meta["b_star"] = boxes[0].b_star
        meta["c_star"] = boxes[0].c_star
    if m:
        meta["dual_radius_min"] = min(bx.radius for bx in boxes)
    meta["graph_offset"] = offset

    x = _initial_x(problem, x0)
    mu = np.zeros((N, m))
    f0 = np.array([problem.objectives[i](x[i]) for i in range(N)])
    state = DlpdsAgentState(x=x, mu=mu, y=N * f0, f_prev=f0.copy())

    probes_x = probes_mu = None
    if debug_asserts:
        probes_x = draw_primal_probes(problem, probe_count, seed)
        if m:
            shared = min(boxes, key=lambda bx: bx.radius).ball
            probes_mu = draw_dual_probes(shared, probe_count, seed)

    records_at = _record_rounds(rounds, record_every)
    rec_k, rec_x, rec_mu, rec_y, alphas = [], [], [], [], []

    def record(k, st):
        rec_k.append(k)
        rec_x.append(st.x.copy())
        rec_mu.append(st.mu.copy())
        rec_y.append(st.y.copy())

    if 0 in records_at:
        record(0, state)
    executed = 0
    for k in range(rounds):
        W = G.weights_at(offset + k)
        alpha = _alpha_vector(schedule, k, N)
        next_state, mixed, d_x, d_mu = dlpds_round(
            state, pieces, problem.local_sets, boxes, W, alpha, k)
        alphas.append(alpha.copy())
        executed = k + 1
        if debug_asserts:
            check_lagrangian_relations(state, next_state, mixed, d_x, d_mu,
                                       pieces, alpha, probes_x,
                                       probes_mu if m else (), k)
        check_tracker_conservation(next_state.y, next_state.f_prev, k)
        stop = False
        if early_stop is not None:
            spread, step = _spread_and_step(next_state.x, state.x)
            stop = spread <= early_stop and step <= early_stop
        state = next_state
        if executed in records_at or stop:
            if not rec_k or rec_k[-1] != executed:
                record(executed, state)
        if stop:
            meta["stopped_at"] = executed
            break

    trace = RunTrace(
        algorithm=algorithm,
        problem_name=problem.name,
        ks=np.array(rec_k, dtype=int),
        x=np.stack(rec_x),
        y=np.stack(rec_y),
        mu=np.stack(rec_mu) if m else None,
        alphas=np.stack(alphas),
        x_ref=problem.x_ref,
        p_ref=problem.p_ref,
        meta=meta,
    )
    return trace


def run_dlpds(problem, G, schedule, rounds, *, bound_config=None, dual_boxes=None,
              record_every=1, debug_asserts=False, probe_count=8, early_stop=None,
              x0=None, graph_start=0, seed=0):
    """Simulate the full primal-dual method and return the run trace.

    When ``dual_boxes`` is not supplied, the bound protocol runs first on
    graph rounds ``graph_start .. graph_start + (N-1)B - 1`` and the main
    loop continues on the rounds after them, with step-size index restarting
    at zero.
    """
    if problem.n_inequality == 0:
        raise ValueError("no inequality constraint; use run_primal_only")
    return _run_lagrangian(problem, G, schedule, rounds, True, bound_config,
                           dual_boxes, record_every, debug_asserts, probe_count,
                           early_stop, x0, graph_start, seed, "dlpds")


def run_primal_only(problem, G, schedule, rounds, *, record_every=1,
                    debug_asserts=False, probe_count=8, early_stop=None,
                    x0=None, graph_start=0, seed=0):
    """Simulate the consensus-only special case without coupling constraints.

    Solves min over the intersection of the local sets of the summed private
    objectives; any inequality the problem declares is ignored. The trace has
    no dual channel.
    """
    return _run_lagrangian(problem, G, schedule, rounds, False, None, None,
                           record_every, debug_asserts, probe_count,
                           early_stop, x0, graph_start, seed, "primal_only")

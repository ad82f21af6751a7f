"""Dual feasible sets small enough to project onto, large enough to matter.

The Lagrangian-channel solver projects its multiplier iterates onto compact
sets, and those sets must contain the optimal multipliers or the saddle
point moves. A strictly feasible point x with g(x) <= -delta < 0 gives the
classic bound: any optimal multiplier has norm at most
(f(x) - q) / min_l(-g_l(x)) for any lower bound q on the dual function. The
construction here makes that bound computable per agent from samples, then
spreads the worst constants over the network with max/min consensus so all
agents agree on a common, safe radius.

Overestimating the numerator or underestimating the denominator only makes
the radius larger, never unsafe, which is why sampling plus slack is enough.
"""

from dataclasses import dataclass

import numpy as np

from .consensus import max_min_consensus_step
from .convex import Box, NonnegBall
from .problems import ProblemSpec


@dataclass(frozen=True)
class SlaterMargin:
    """A strictly feasible margin delta together with a sampled witness."""

    delta: float
    witness: np.ndarray
    n_qualifying: int


@dataclass(frozen=True)
class DualBoundConfig:
    """Knobs of the bound construction.

    margin is the strict-feasibility margin delta (samples must satisfy
    g(x) <= -delta componentwise), mu_tilde the probe multiplier of the dual
    value estimate (zero unless given), budget the per-agent sample count,
    theta the strictly positive slack added to every radius. b0 and c0
    override the sampled constants when provided.
    """

    margin: float = 0.5
    mu_tilde: np.ndarray = None
    budget: int = 4096
    theta: float = 1.0
    b0: np.ndarray = None
    c0: np.ndarray = None
    seed: int = 0


@dataclass(frozen=True)
class DualBox:
    """One agent's realized dual feasible set with its provenance constants."""

    radius: float
    ball: NonnegBall
    b_star: float
    c_star: float
    theta: float


def _sample_local_set(problem, agent, budget, seed, stream):
    """Deterministic grid plus random points covering one local set."""
    S = problem.local_sets[agent]
    rng = np.random.default_rng([int(seed), int(stream), int(agent)])
    if isinstance(S, Box):
        per_dim = max(2, int(round(budget ** (1.0 / problem.n))))
        axes = [np.linspace(lo, hi, per_dim) for lo, hi in zip(S.lo, S.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([m.ravel() for m in mesh], axis=1)
        random_part = rng.uniform(S.lo, S.hi, size=(budget, problem.n))
        return np.vstack([grid, random_part])
    # General sets: project scattered points; projections are members.
    raw = rng.normal(scale=3.0, size=(budget, problem.n))
    return np.stack([S.project(z) for z in raw])


def _check_mu_tilde(problem, mu_tilde):
    if mu_tilde is None:
        return np.zeros(problem.n_inequality)
    mu = np.atleast_1d(np.asarray(mu_tilde, dtype=float))
    if mu.size != problem.n_inequality:
        raise ValueError("mu_tilde length does not match the constraint count")
    if (mu < 0).any():
        raise ValueError("mu_tilde must be nonnegative")
    return mu


def estimate_local_dual_value(problem, agent, mu_tilde=None, budget=4096, seed=0):
    """A lower bound on inf over the local set of f_i(x) + mu_tilde' g(x).

    The minimum over finitely many sampled points can only overestimate the
    infimum, so the sampled minimum is pushed down by a slack of one tenth of
    the observed spread. Looser is safer here: the value feeds the radius
    numerator negatively.
    """
    mu = _check_mu_tilde(problem, mu_tilde)
    points = _sample_local_set(problem, agent, budget, seed, stream=2101)
    values = problem.objectives[agent].values(points)
    for coef, g in zip(mu, problem.inequality):
        if coef != 0.0:
            values = values + coef * g.values(points)
    spread = float(values.max() - values.min())
    return float(values.min()) - 0.1 * spread - 1e-9


def local_bound_init(problem, agent, config=None):
    """Initial contraction constants (b0, c0) for one agent, plus the witness.

    b0 bounds f_i(x) - q_i from above over the margin set
    {x in X_i : g(x) <= -delta}; c0 = delta bounds min_l(-g_l(x)) from below
    on that same set. Both come out strictly positive by construction.
    Raises if no sampled point clears the margin, which usually means the
    margin is too aggressive for the instance.
    """
    config = config or DualBoundConfig()
    if problem.n_inequality == 0:
        raise ValueError("the bound construction needs an inequality constraint")
    if config.margin <= 0:
        raise ValueError("margin must be strictly positive")
    points = _sample_local_set(problem, agent, config.budget, config.seed, stream=2102)
    g_vals = np.stack([g.values(points) for g in problem.inequality], axis=1)
    qualifying = (g_vals <= -config.margin).all(axis=1)
    n_qual = int(qualifying.sum())
    if n_qual == 0:
        raise ValueError(
            f"agent {agent}: no sampled point satisfies g <= -{config.margin}; "
            "lower the margin or enlarge the budget"
        )
    f_vals = problem.objectives[agent].values(points[qualifying])
    q_lower = estimate_local_dual_value(problem, agent, config.mu_tilde,
                                        config.budget, config.seed)
    spread = float(f_vals.max() - f_vals.min())
    b0 = float(f_vals.max()) - q_lower + 0.1 * spread + 1e-9
    c0 = float(config.margin)
    witness = SlaterMargin(delta=c0, witness=points[qualifying][int(np.argmax(f_vals))],
                           n_qualifying=n_qual)
    return b0, c0, witness


def build_dual_boxes(problem, G, config=None, start_round=0):
    """Run the distributed bound protocol and return one DualBox per agent.

    Each agent starts from its local constants, then (N-1) * B rounds of
    max-consensus on b and min-consensus on c make everyone agree on the
    worst pair exactly (the steps select values, they never average). The
    common radius is N * b / c plus the agent's slack theta. Raises if the
    constants still disagree after the protocol, which means the declared
    connectivity window is wrong.

    Returns (boxes, rounds_used).
    """
    config = config or DualBoundConfig()
    N = G.n_agents
    if problem.n_agents != N:
        raise ValueError("graph and problem disagree on the number of agents")
    if config.b0 is not None:
        b = np.broadcast_to(np.asarray(config.b0, dtype=float), (N,)).copy()
    else:
        b = np.array([local_bound_init(problem, i, config)[0] for i in range(N)])
    if config.c0 is not None:
        c = np.broadcast_to(np.asarray(config.c0, dtype=float), (N,)).copy()
    else:
        c = np.full(N, float(config.margin))
    if (b <= 0).any() or (c <= 0).any():
        raise ValueError("bound constants must be strictly positive")

    rounds_used = (N - 1) * G.window
    for k in range(rounds_used):
        W = G.weights_at(start_round + k)
        b, c = max_min_consensus_step(b, c, W)

    if not (np.all(b == b[0]) and np.all(c == c[0])):
        raise RuntimeError(
            "bound protocol did not reach agreement in (N-1)*B rounds; "
            f"b={b.tolist()}, c={c.tolist()}; check the connectivity window"
        )
    theta = np.broadcast_to(np.asarray(config.theta, dtype=float), (N,))
    if (theta <= 0).any():
        raise ValueError("theta must be strictly positive")
    m = problem.n_inequality
    boxes = [
        DualBox(radius=float(N * b[0] / c[0] + theta[i]),
                ball=NonnegBall(radius=float(N * b[0] / c[0] + theta[i]), dim=m),
                b_star=float(b[0]), c_star=float(c[0]), theta=float(theta[i]))
        for i in range(N)
    ]
    return boxes, rounds_used

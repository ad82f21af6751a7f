"""Time-varying communication networks as sequences of weight matrices.

A network round is a row-stochastic matrix W(k) where W[i, j] is the weight
agent i places on the value it hears from agent j. The algorithms in this
package need three standing properties from the sequence:

* non-degeneracy: self-weights and every nonzero off-diagonal weight stay
  above a fixed floor, so no agent ever tunes a neighbor arbitrarily low;
* balance: every W(k) is doubly stochastic, which is what makes sums of
  agent states invariant under mixing;
* periodic connectivity: the union of the communication edges over every
  window of a fixed length B is strongly connected, so information keeps
  circulating even though single rounds may be almost empty.

Generators return a ``GraphSequence``; validators return a
``ValidationReport`` listing each violating round instead of failing fast,
because a report of all offenders is what you want when debugging a
hand-built schedule.
"""

from dataclasses import dataclass, field

import numpy as np

# One communication round: an (N, N) row-stochastic array. W[i, j] is the
# weight agent i gives agent j; the digraph edge (j -> i) exists whenever
# i != j and W[i, j] > 0.
WeightMatrix = np.ndarray


@dataclass
class GraphSequence:
    """A deterministic sequence of weight matrices plus its declared contract.

    Parameters
    ----------
    n_agents : int
        Number of agents N.
    window : int
        Declared connectivity window B: the union of edges over any
        ``window`` consecutive rounds is claimed strongly connected.
    weight_floor : float
        Declared lower bound on self-weights and nonzero off-diagonals.
    builder : callable
        Maps a round index k >= 0 to the (N, N) weight matrix of that round.
    name : str
        Tag used in reports and config echo.
    seed : int
        Seed recorded for reproducibility; deterministic generators ignore it.
    """

    n_agents: int
    window: int
    weight_floor: float
    builder: object
    name: str = "custom"
    seed: int = 0

    def weights_at(self, k):
        """Weight matrix of round k (k >= 0)."""
        if k < 0:
            raise ValueError("round index must be nonnegative")
        W = np.asarray(self.builder(int(k)), dtype=float)
        if W.shape != (self.n_agents, self.n_agents):
            raise ValueError("builder returned a matrix of the wrong shape")
        return W

    def stack(self, horizon, start=0):
        """All matrices for rounds start .. start+horizon-1 as one array."""
        return np.stack([self.weights_at(start + k) for k in range(horizon)])


@dataclass
class ValidationReport:
    """Outcome of a validator sweep over a round range."""

    rule: str
    horizon: int
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def add(self, round_index, detail):
        self.violations.append((int(round_index), detail))

    def summary(self):
        if self.ok:
            return f"{self.rule}: ok over {self.horizon} rounds"
        head = "; ".join(f"round {k}: {d}" for k, d in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        return f"{self.rule}: {len(self.violations)} violation(s): {head}{more}"


def weights_at(G, k):
    """Free-function form of ``GraphSequence.weights_at``."""
    return G.weights_at(k)


def _metropolis(n, edges):
    """Symmetric Metropolis weights for one round of undirected edges.

    Each edge (i, j) gets 1 / (1 + max(deg_i, deg_j)) and diagonals absorb
    the slack, which yields a doubly stochastic matrix for any undirected
    edge set. An empty round degenerates to the identity.
    """
    W = np.zeros((n, n))
    deg = np.zeros(n, dtype=int)
    for i, j in edges:
        deg[i] += 1
        deg[j] += 1
    for i, j in edges:
        w = 1.0 / (1.0 + max(deg[i], deg[j]))
        W[i, j] += w
        W[j, i] += w
    np.fill_diagonal(W, 1.0 - W.sum(axis=1))
    return W


def metropolis_sequence(n_agents, edge_schedule, window, weight_floor=0.1,
                        laziness=0.0, name="metropolis", seed=0):
    """Build a balanced sequence from a per-round undirected edge schedule.

    Parameters
    ----------
    edge_schedule : callable
        Maps round k to an iterable of undirected edges (i, j), i != j.
        Duplicate edges are a schedule bug and raise.
    window : int
        Connectivity window the schedule is declared to satisfy. The claim is
        checked by ``validate_periodic_connectivity``, not here.
    laziness : float
        Optional blend toward the identity, W <- (1 - laziness) W + laziness I,
        which trades mixing speed for larger self-weights.
    """
    if not 0.0 <= laziness < 1.0:
        raise ValueError("laziness must lie in [0, 1)")

    def build(k):
        edges = [(int(i), int(j)) for i, j in edge_schedule(k)]
        seen = set()
        for i, j in edges:
            if i == j or not (0 <= i < n_agents and 0 <= j < n_agents):
                raise ValueError(f"round {k}: bad edge ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"round {k}: duplicate edge ({i}, {j})")
            seen.add(key)
        W = _metropolis(n_agents, edges)
        if laziness > 0.0:
            W = (1.0 - laziness) * W + laziness * np.eye(n_agents)
        return W

    return GraphSequence(n_agents=n_agents, window=window, weight_floor=weight_floor,
                         builder=build, name=name, seed=seed)


def rotating_ring_sequence(n_agents, weight_floor=0.1, seed=0):
    """One ring edge per round, rotating around the cycle.

    Round k activates the single undirected pair (k mod N, k+1 mod N), so any
    N consecutive rounds cover the whole ring and the natural window is B = N.
    With one active edge the Metropolis weight is 1/2 on the pair.
    """

    def schedule(k):
        i = k % n_agents
        return [(i, (i + 1) % n_agents)]

    return metropolis_sequence(n_agents, schedule, window=n_agents,
                               weight_floor=weight_floor, name="rotating_ring", seed=seed)


def complete_sequence(n_agents, weight_floor=None, seed=0):
    """Static complete graph with uniform averaging weights 1/N."""
    floor = 1.0 / n_agents if weight_floor is None else weight_floor
    W = np.full((n_agents, n_agents), 1.0 / n_agents)
    return GraphSequence(n_agents=n_agents, window=1, weight_floor=floor,
                         builder=lambda k: W.copy(), name="complete", seed=seed)


def identity_sequence(n_agents, seed=0):
    """No communication at all; useful for decoupling tests, never connected."""
    return GraphSequence(n_agents=n_agents, window=1, weight_floor=1.0,
                         builder=lambda k: np.eye(n_agents), name="identity", seed=seed)


def random_connected_sequence(n_agents, extra_edges=1, weight_floor=None, seed=0):
    """Every round draws a random spanning path plus a few extra edges.

    Each single round is connected, so the sequence is compliant with window
    B = 1. Draws are derived from (seed, k), which keeps ``weights_at`` a pure
    function of the round index.
    """
    if weight_floor is None:
        weight_floor = 1.0 / (1.0 + n_agents)

    def schedule(k):
        rng = np.random.default_rng([seed, 9176, k])
        order = rng.permutation(n_agents)
        edges = {(min(a, b), max(a, b)) for a, b in zip(order[:-1], order[1:])}
        for _ in range(extra_edges):
            a, b = rng.choice(n_agents, size=2, replace=False)
            edges.add((min(a, b), max(a, b)))
        return sorted(edges)

    return metropolis_sequence(n_agents, schedule, window=1, weight_floor=weight_floor,
                               name="random_connected", seed=seed)


def duty_cycled_path_sequence(n_agents, period, weight_floor=0.1, seed=0):
    """A line graph active once per ``period`` rounds, identity in between.

    Exercises empty rounds: the window is the duty-cycle period.
    """
    path = [(i, i + 1) for i in range(n_agents - 1)]

    def schedule(k):
        return path if k % period == 0 else []

    return metropolis_sequence(n_agents, schedule, window=period,
                               weight_floor=weight_floor, name="duty_cycled_path", seed=seed)


GENERATORS = {
    "rotating_ring": rotating_ring_sequence,
    "complete": complete_sequence,
    "identity": identity_sequence,
    "random_connected": random_connected_sequence,
}


# ---------------------------------------------------------------------------
# validators
# ---------------------------------------------------------------------------

def validate_nondegeneracy(G, horizon, weight_floor=None, tol=1e-12, stacked=None):
    """Check self-weights and nonzero off-diagonals stay above the floor."""
    floor = G.weight_floor if weight_floor is None else weight_floor
    W = G.stack(horizon) if stacked is None else stacked
    report = ValidationReport(rule="nondegeneracy", horizon=horizon)
    diag = np.diagonal(W, axis1=1, axis2=2)
    off = W[:, ~np.eye(G.n_agents, dtype=bool)]
    nonzero = np.abs(off) > tol
    bad = (
        (diag < floor - tol).any(axis=1)
        | ((off < floor - tol) & nonzero).any(axis=1)
        | (off > 1.0 + tol).any(axis=1)
        | (W < -tol).any(axis=(1, 2))
    )
    for k in np.nonzero(bad)[0]:
        report.add(k, f"weights break the floor {floor} (min diag {diag[k].min():.6g})")
    return report


def validate_balanced(G, horizon, tol=1e-9, stacked=None):
    """Check every round is doubly stochastic (row and column sums one)."""
    W = G.stack(horizon) if stacked is None else stacked
    report = ValidationReport(rule="balanced", horizon=horizon)
    row_err = np.max(np.abs(W.sum(axis=2) - 1.0), axis=1)
    col_err = np.max(np.abs(W.sum(axis=1) - 1.0), axis=1)
    bad = (row_err > tol) | (col_err > tol)
    for k in np.nonzero(bad)[0]:
        report.add(k, f"row/column sums off by {max(row_err[k], col_err[k]):.3g}")
    return report


def _reachability_closure(adj):
    """Boolean transitive closure of stacked adjacency masks (..., N, N)."""
    n = adj.shape[-1]
    reach = adj | np.eye(n, dtype=bool)
    # Squaring a reachability mask doubles the path length it captures, so
    # ceil(log2(n)) squarings cover all paths of length up to n.
    steps = max(1, int(np.ceil(np.log2(max(n, 2)))))
    for _ in range(steps):
        reach = reach | (np.matmul(reach.astype(np.uint8), reach.astype(np.uint8)) > 0)
    return reach


def validate_periodic_connectivity(G, horizon, window=None, tol=1e-12, stacked=None):
    """Check the edge union over every length-B window is strongly connected.

    Every window start in [0, horizon - B] is checked; a violation names the
    window start round.
    """
    B = G.window if window is None else int(window)
    report = ValidationReport(rule=f"periodic_connectivity(B={B})", horizon=horizon)
    if horizon < B:
        report.add(0, f"horizon {horizon} shorter than window {B}")
        return report
    W = G.stack(horizon) if stacked is None else stacked
    masks = W > tol
    n_windows = horizon - B + 1
    # Sliding union over the window, then one batched closure for all windows.
    unions = np.empty((n_windows, G.n_agents, G.n_agents), dtype=bool)
    for k in range(n_windows):
        unions[k] = masks[k:k + B].any(axis=0)
    reach = _reachability_closure(unions)
    bad = ~reach.all(axis=(1, 2))
    for k in np.nonzero(bad)[0]:
        report.add(k, "window union not strongly connected")
    return report


def validate_graph_sequence(G, horizon):
    """Run all three standing checks over one shared matrix stack."""
    stacked = G.stack(horizon)
    return [
        validate_nondegeneracy(G, horizon, stacked=stacked),
        validate_balanced(G, horizon, stacked=stacked),
        validate_periodic_connectivity(G, horizon, stacked=stacked),
    ]

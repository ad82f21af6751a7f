"""Finite-time max/min agreement and the dynamic average tracker."""

import numpy as np
import pytest

from dpdsub.consensus import dynamic_average_step, max_min_consensus_step
from dpdsub.network import (
    complete_sequence,
    duty_cycled_path_sequence,
    metropolis_sequence,
    random_connected_sequence,
    rotating_ring_sequence,
)


def _two_edge_ring(n_agents=5, window=3):
    # Two adjacent ring edges per round: the whole ring is covered every
    # three rounds, giving a genuinely time-varying window-3 sequence.
    def schedule(k):
        a = (2 * k) % n_agents
        return [(a, (a + 1) % n_agents), ((a + 1) % n_agents, (a + 2) % n_agents)]

    return metropolis_sequence(n_agents, schedule, window=window, name="two_edge_ring")


def test_max_min_step_on_directed_ring():
    # Each agent hears exactly one neighbor, so the extremes need two hops.
    W = 0.5 * np.eye(3) + 0.5 * np.roll(np.eye(3), 1, axis=1)
    b = np.array([1.0, 2.0, 3.0])
    c = np.array([1.0, 2.0, 3.0])
    b, c = max_min_consensus_step(b, c, W)
    np.testing.assert_array_equal(b, [2.0, 3.0, 3.0])
    np.testing.assert_array_equal(c, [1.0, 2.0, 1.0])
    b, c = max_min_consensus_step(b, c, W)
    np.testing.assert_array_equal(b, [3.0, 3.0, 3.0])
    np.testing.assert_array_equal(c, [1.0, 1.0, 1.0])


def test_consensus_is_exact_by_the_window_bound():
    # Selection never does arithmetic, so agreement on max_j b_j(0) and
    # min_j c_j(0) must be bitwise exact within (N-1)B rounds.
    cases = [
        (rotating_ring_sequence(5), 5),
        (complete_sequence(4), 1),
        (random_connected_sequence(6, seed=5), 1),
        (duty_cycled_path_sequence(4, period=3), 3),
        (_two_edge_ring(), 3),
    ]
    rng = np.random.default_rng(2024)
    for G, B in cases:
        assert G.window == B
        b = rng.normal(size=G.n_agents)
        c = b.copy()
        b_star, c_star = b.max(), c.min()
        for k in range((G.n_agents - 1) * B):
            b, c = max_min_consensus_step(b, c, G.weights_at(k))
        assert (b == b_star).all(), G.name
        assert (c == c_star).all(), G.name


def test_consensus_ignores_zero_weight_channels():
    # A zero column entry means no edge: the value must not leak through.
    W = np.array([[1.0, 0.0], [0.0, 1.0]])
    b, c = max_min_consensus_step(np.array([1.0, 9.0]), np.array([1.0, 9.0]), W)
    np.testing.assert_array_equal(b, [1.0, 9.0])
    np.testing.assert_array_equal(c, [1.0, 9.0])


def test_tracker_step_hand_value():
    W = np.full((2, 2), 0.5)
    out = dynamic_average_step(np.array([0.0, 2.0]), W, np.array([1.0, -1.0]))
    np.testing.assert_allclose(out, [2.0, 0.0])


def test_tracker_step_rejects_shape_mismatch():
    W = np.full((2, 2), 0.5)
    with pytest.raises(ValueError):
        dynamic_average_step(np.zeros(3), W, np.zeros(3))
    with pytest.raises(ValueError):
        dynamic_average_step(np.zeros(2), W, np.zeros(3))


def test_tracker_conserves_the_channel_sum():
    rng = np.random.default_rng(8)
    G = _two_edge_ring()
    z = rng.normal(size=5)
    total = z.sum()
    for k in range(60):
        inc = rng.normal(size=5)
        z = dynamic_average_step(z, G.weights_at(k), inc)
        total += inc.sum()
        assert abs(z.sum() - total) <= 1e-12 * 5


def test_tracker_follows_a_settling_signal():
    # Signals xi_i(k) = c + 2^{-k} eta_i settle to a common constant; the
    # tracker must end up within 1e-6 of the running mean, and the balanced
    # weights keep the channel sum glued to the signal sum throughout.
    G = _two_edge_ring()
    rng = np.random.default_rng(7)
    c = 2.0
    eta = rng.normal(size=5)

    def xi(k):
        return c + (0.5 ** k) * eta

    z = xi(0).copy()
    for k in range(200):
        z = dynamic_average_step(z, G.weights_at(k), xi(k + 1) - xi(k))
        assert abs(z.sum() - xi(k + 1).sum()) <= 1e-12 * 5
    assert float(np.abs(z - xi(200).mean()).max()) <= 1e-6

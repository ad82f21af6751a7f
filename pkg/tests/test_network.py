"""Weight-matrix generators and the standing network property validators."""

import numpy as np
import pytest

from dpdsub.network import (
    GraphSequence,
    complete_sequence,
    duty_cycled_path_sequence,
    identity_sequence,
    metropolis_sequence,
    random_connected_sequence,
    rotating_ring_sequence,
    validate_balanced,
    validate_graph_sequence,
    validate_nondegeneracy,
    validate_periodic_connectivity,
    weights_at,
)


def test_metropolis_single_edge_pair():
    G = metropolis_sequence(2, lambda k: [(0, 1)], window=1)
    np.testing.assert_allclose(G.weights_at(0), [[0.5, 0.5], [0.5, 0.5]])


def test_metropolis_three_agent_path():
    G = metropolis_sequence(3, lambda k: [(0, 1), (1, 2)], window=1)
    third = 1.0 / 3.0
    expect = [[2 * third, third, 0.0],
              [third, third, third],
              [0.0, third, 2 * third]]
    np.testing.assert_allclose(G.weights_at(5), expect)


def test_rotating_ring_round_weights():
    G = rotating_ring_sequence(5)
    W0 = G.weights_at(0)
    expect = np.eye(5)
    expect[0, 0] = expect[1, 1] = expect[0, 1] = expect[1, 0] = 0.5
    np.testing.assert_allclose(W0, expect)
    W3 = G.weights_at(3)
    assert W3[3, 4] == W3[4, 3] == 0.5
    assert G.window == 5
    # Five consecutive rounds sweep the whole ring.
    edges = set()
    for k in range(5):
        Wk = G.weights_at(k)
        edges |= {(i, j) for i in range(5) for j in range(5)
                  if i != j and Wk[i, j] > 0}
    assert len(edges) == 10


def test_metropolis_rejects_malformed_edge_schedules():
    with pytest.raises(ValueError):
        metropolis_sequence(3, lambda k: [(1, 1)], window=1).weights_at(0)
    with pytest.raises(ValueError):
        metropolis_sequence(3, lambda k: [(0, 9)], window=1).weights_at(0)
    with pytest.raises(ValueError):
        metropolis_sequence(3, lambda k: [(0, 1), (1, 0)], window=1).weights_at(0)
    with pytest.raises(ValueError):
        metropolis_sequence(3, lambda k: [], window=1, laziness=1.0)


def test_laziness_blends_toward_identity():
    plain = metropolis_sequence(2, lambda k: [(0, 1)], window=1)
    lazy = metropolis_sequence(2, lambda k: [(0, 1)], window=1, laziness=0.5)
    np.testing.assert_allclose(lazy.weights_at(0),
                               0.5 * plain.weights_at(0) + 0.5 * np.eye(2))


def test_stack_and_free_weights_at():
    G = rotating_ring_sequence(4)
    S = G.stack(6)
    assert S.shape == (6, 4, 4)
    np.testing.assert_allclose(S[2], G.weights_at(2))
    np.testing.assert_allclose(weights_at(G, 3), G.weights_at(3))
    S_shift = G.stack(3, start=2)
    np.testing.assert_allclose(S_shift[0], G.weights_at(2))
    with pytest.raises(ValueError):
        G.weights_at(-1)


def test_builder_shape_mismatch_raises():
    G = GraphSequence(n_agents=3, window=1, weight_floor=0.1,
                      builder=lambda k: np.eye(2), name="broken", seed=0)
    with pytest.raises(ValueError):
        G.weights_at(0)


def test_generated_sequences_pass_all_validators():
    cases = [
        (rotating_ring_sequence(5), 15),
        (complete_sequence(4), 6),
        (random_connected_sequence(6, extra_edges=2, seed=3), 12),
        (duty_cycled_path_sequence(4, period=3), 12),
    ]
    for G, horizon in cases:
        for report in validate_graph_sequence(G, horizon):
            assert report.ok, report.summary()


def test_identity_sequence_fails_connectivity():
    G = identity_sequence(3)
    report = validate_periodic_connectivity(G, horizon=6)
    assert not report.ok
    assert len(report.violations) == 6
    assert "not strongly connected" in report.summary()


def test_nondegeneracy_flags_weights_below_floor():
    # A single Metropolis edge weighs 1/2, so a floor of 0.6 must trip.
    G = rotating_ring_sequence(5, weight_floor=0.6)
    report = validate_nondegeneracy(G, horizon=5)
    assert not report.ok


def test_balanced_flags_row_stochastic_only_matrices():
    W = np.array([[1.0, 0.0], [0.5, 0.5]])
    G = GraphSequence(n_agents=2, window=1, weight_floor=0.1,
                      builder=lambda k: W, name="lopsided", seed=0)
    report = validate_balanced(G, horizon=3)
    assert not report.ok
    assert len(report.violations) == 3


def test_connectivity_respects_the_declared_window():
    # The duty-cycled path is only connected over its full period.
    G = duty_cycled_path_sequence(4, period=3)
    assert validate_periodic_connectivity(G, horizon=9).ok
    assert not validate_periodic_connectivity(G, horizon=9, window=2).ok
    short = validate_periodic_connectivity(G, horizon=2)
    assert not short.ok and "shorter than window" in short.summary()


def test_random_connected_rounds_are_pure_in_the_round_index():
    G = random_connected_sequence(5, seed=11)
    np.testing.assert_allclose(G.weights_at(7), G.weights_at(7))
    G2 = random_connected_sequence(5, seed=11)
    np.testing.assert_allclose(G.weights_at(7), G2.weights_at(7))
    assert not np.allclose(G.weights_at(7), G.weights_at(8))

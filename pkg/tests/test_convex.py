"""Projections and saddle-function pieces against closed forms and grids."""

import numpy as np
import pytest

from dpdsub.convex import (
    AffineMap,
    Box,
    Composite,
    EuclideanBall,
    LagrangianPieces,
    NonnegBall,
    NonnegOrthant,
    PenaltyPieces,
    abs_map,
    lagrangian_dual_supgradient,
    lagrangian_primal_subgradient,
    lagrangian_value,
    linear_oracle,
    neg_sqrt_oracle,
    penalty_primal_subgradient,
    penalty_supgradient,
    penalty_value,
    plus_projection,
    quadratic_oracle,
    sets_equal,
)
from dpdsub.problems import build_quadratic_problem


def test_box_projection_is_a_clamp():
    S = Box([-2.0, -1.0], [2.0, 3.0])
    np.testing.assert_allclose(S.project([5.0, -4.0]), [2.0, -1.0])
    np.testing.assert_allclose(S.project([0.5, 2.0]), [0.5, 2.0])
    assert S.contains([2.0, 3.0])
    assert not S.contains([2.1, 0.0])
    assert S.dim == 2
    with pytest.raises(ValueError):
        Box([1.0], [0.0])


def test_ball_projection_is_radial():
    S = EuclideanBall([1.0, 1.0], 1.0)
    np.testing.assert_allclose(S.project([3.0, 1.0]), [2.0, 1.0])
    np.testing.assert_allclose(S.project([1.2, 0.9]), [1.2, 0.9])
    assert S.contains([1.0, 2.0])
    assert not S.contains([1.0, 2.01])
    with pytest.raises(ValueError):
        EuclideanBall([0.0], -1.0)


def test_orthant_and_componentwise_maps():
    np.testing.assert_allclose(plus_projection([-1.0, 0.0, 2.5]), [0.0, 0.0, 2.5])
    np.testing.assert_allclose(abs_map([-1.5, 2.0]), [1.5, 2.0])
    S = NonnegOrthant(3)
    np.testing.assert_allclose(S.project([-1.0, 0.5, -0.2]), [0.0, 0.5, 0.0])
    assert S.contains([0.0, 0.0, 1.0])
    assert not S.contains([-0.1, 0.0, 0.0])


def test_nonneg_ball_projection_clamps_then_rescales():
    S = NonnegBall(radius=2.0, dim=2)
    np.testing.assert_allclose(S.project([-1.0, 3.0]), [0.0, 2.0])
    np.testing.assert_allclose(S.project([1.0, 1.0]), [1.0, 1.0])
    np.testing.assert_allclose(S.project([3.0, 4.0]), [1.2, 1.6])
    assert S.contains([0.0, 2.0])
    assert not S.contains([0.0, 2.1])
    assert not S.contains([-0.1, 0.0])
    with pytest.raises(ValueError):
        NonnegBall(radius=-1.0, dim=2)


def _grid_nearest(z, radius, spacing):
    # Dense feasible grid over the quarter disk; brute-force nearest point.
    axis = np.arange(0.0, radius + spacing, spacing)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    pts = pts[np.linalg.norm(pts, axis=1) <= radius]
    d = np.linalg.norm(pts - z[None, :], axis=1)
    j = int(np.argmin(d))
    return pts[j], float(d[j])


def test_nonneg_ball_beats_dense_grid():
    # The factored projection must never lose to any feasible grid point,
    # and the grid must confirm it is optimal to within its own resolution.
    rng = np.random.default_rng(77)
    spacing = 2e-3
    for _ in range(20):
        radius = float(rng.uniform(0.3, 1.2))
        S = NonnegBall(radius=radius, dim=2)
        z = rng.normal(scale=1.5, size=2)
        p = S.project(z)
        assert S.contains(p, tol=1e-12)
        best, best_dist = _grid_nearest(z, radius, spacing)
        proj_dist = float(np.linalg.norm(z - p))
        assert proj_dist <= best_dist + 1e-12
        assert best_dist - proj_dist <= 3.0 * spacing
        assert float(np.linalg.norm(p - best)) <= 0.05


def test_composite_projection_matches_closed_forms():
    rng = np.random.default_rng(31)
    # Two overlapping boxes: the intersection is a box, so Dykstra must
    # reproduce a plain clamp.
    A = Box([-2.0, -2.0], [1.0, 1.0])
    B = Box([0.0, -1.0], [3.0, 3.0])
    inter = Box([0.0, -1.0], [1.0, 1.0])
    C = Composite((A, B))
    for _ in range(50):
        z = rng.normal(scale=3.0, size=2)
        np.testing.assert_allclose(C.project(z), inter.project(z), atol=1e-8)
    # Ball inside a box: intersection is the ball.
    ball = EuclideanBall([0.0, 0.0], 1.0)
    C = Composite((Box([-3.0, -3.0], [3.0, 3.0]), ball))
    for _ in range(50):
        z = rng.normal(scale=3.0, size=2)
        np.testing.assert_allclose(C.project(z), ball.project(z), atol=1e-8)
    # Box inside a ball: intersection is the box.
    box = Box([-1.0, -1.0], [1.0, 1.0])
    C = Composite((EuclideanBall([0.0, 0.0], 5.0), box))
    for _ in range(50):
        z = rng.normal(scale=3.0, size=2)
        np.testing.assert_allclose(C.project(z), box.project(z), atol=1e-8)
    with pytest.raises(ValueError):
        Composite(())
    with pytest.raises(ValueError):
        Composite((Box([0.0], [1.0]), Box([0.0, 0.0], [1.0, 1.0])))


def _sample_sets(rng):
    lo = rng.uniform(-2.0, 0.0, size=3)
    return [
        Box(lo, lo + rng.uniform(0.5, 3.0, size=3)),
        EuclideanBall(rng.normal(size=3), float(rng.uniform(0.5, 2.0))),
        NonnegBall(radius=float(rng.uniform(0.5, 2.0)), dim=3),
        NonnegOrthant(3),
        Composite((Box(-np.ones(3), np.ones(3)),
                   EuclideanBall(np.zeros(3), 1.5))),
    ]


def test_projection_satisfies_distance_contraction():
    # ||P(z) - y||^2 <= ||z - y||^2 - ||P(z) - z||^2 for every y in the set.
    rng = np.random.default_rng(12)
    for _ in range(400):
        for S in _sample_sets(rng):
            z = rng.normal(scale=3.0, size=3)
            y = S.project(rng.normal(scale=2.0, size=3))
            p = S.project(z)
            lhs = float(np.sum((p - y) ** 2))
            rhs = float(np.sum((z - y) ** 2) - np.sum((p - z) ** 2))
            assert lhs <= rhs + 1e-9


def test_oracles_satisfy_subgradient_inequality():
    rng = np.random.default_rng(13)
    lin = linear_oracle([1.0, -2.0, 0.5], offset=0.3)
    quad = quadratic_oracle([0.5, -1.0, 2.0], weight=0.7)
    root = neg_sqrt_oracle(1, 3)
    for _ in range(2000):
        for f in (lin, quad, root):
            x = rng.uniform(0.1, 6.0, size=3)
            y = rng.uniform(0.1, 6.0, size=3)
            g = f.gradient(x)
            assert f(y) >= f(x) + float(g @ (y - x)) - 1e-9


def test_oracle_batch_agrees_with_scalar_eval():
    rng = np.random.default_rng(14)
    X = rng.uniform(0.1, 5.0, size=(40, 3))
    for f in (linear_oracle([2.0, 0.0, -1.0], offset=1.0),
              quadratic_oracle([1.0, 1.0, 1.0], weight=0.2),
              neg_sqrt_oracle(0, 3)):
        np.testing.assert_allclose(f.values(X), [f(x) for x in X], atol=1e-12)


def test_neg_sqrt_oracle_rejects_nonpositive_input():
    f = neg_sqrt_oracle(0, 2)
    assert f([4.0, 0.0]) == -2.0
    np.testing.assert_allclose(f.gradient([4.0, 0.0]), [-0.25, 0.0])
    with pytest.raises(ValueError):
        f([0.0, 1.0])
    with pytest.raises(ValueError):
        f.gradient([-1.0, 1.0])
    with pytest.raises(ValueError):
        neg_sqrt_oracle(2, 2)


def test_affine_map_residual():
    h = AffineMap([[1.0, 1.0], [2.0, 0.0]], [3.0, 1.0])
    np.testing.assert_allclose(h.residual([1.0, 2.0]), [0.0, 1.0])
    assert h.n_rows == 2 and h.dim == 2


def test_lagrangian_piece_hand_values():
    piece = LagrangianPieces(0, quadratic_oracle([0.0]),
                             (linear_oracle([1.0], -0.5),))
    assert lagrangian_value(piece, np.array([1.0]), np.array([1.0])) == 1.5
    np.testing.assert_allclose(
        lagrangian_primal_subgradient(piece, np.array([1.0]), np.array([1.0])),
        [3.0])
    np.testing.assert_allclose(
        lagrangian_dual_supgradient(piece, np.array([1.0])), [0.5])


def _penalty_toy():
    return PenaltyPieces(0, quadratic_oracle([0.0]),
                         inequality=(linear_oracle([1.0], -0.5),),
                         equality=AffineMap([[1.0]], [0.25]))


def test_penalty_piece_hand_values():
    piece = _penalty_toy()
    x = np.array([1.0])
    assert penalty_value(piece, x, np.array([1.0]), np.array([1.0])) == 2.25
    gplus, habs = penalty_supgradient(piece, x)
    np.testing.assert_allclose(gplus, [0.5])
    np.testing.assert_allclose(habs, [0.75])


def test_penalty_subgradient_breaks_ties_toward_zero():
    piece = _penalty_toy()
    # g(0.5) = 0: the inequality kink contributes nothing even for huge mu.
    d = penalty_primal_subgradient(piece, np.array([0.5]),
                                   np.array([50.0]), np.array([0.0]))
    np.testing.assert_allclose(d, [1.0])
    # h(0.25) = 0: sign(0) = 0 kills the equality term too.
    d = penalty_primal_subgradient(piece, np.array([0.25]),
                                   np.array([0.0]), np.array([7.0]))
    np.testing.assert_allclose(d, [0.5])


def test_penalty_supgradient_is_exact_in_the_duals():
    # The saddle function is affine in (mu, lam), so the supgradient step
    # reproduces value differences exactly, not just as an upper model.
    piece = _penalty_toy()
    rng = np.random.default_rng(15)
    for _ in range(200):
        x = rng.uniform(-2.0, 2.0, size=1)
        mu0, mu1 = rng.uniform(0.0, 5.0, size=(2, 1))
        lam0, lam1 = rng.uniform(0.0, 5.0, size=(2, 1))
        gplus, habs = penalty_supgradient(piece, x)
        lhs = penalty_value(piece, x, mu1, lam1) - penalty_value(piece, x, mu0, lam0)
        rhs = float((mu1 - mu0) @ gplus + (lam1 - lam0) @ habs)
        assert abs(lhs - rhs) <= 1e-12


def test_quadratic_problem_piece_hand_values():
    prob = build_quadratic_problem()
    piece = prob.penalty_pieces(0)
    x = np.ones(5)
    assert piece.f(x) == pytest.approx(16.5, abs=1e-12)
    d = penalty_primal_subgradient(piece, x, np.zeros(0), np.zeros(1))
    np.testing.assert_allclose(d, [-1.6, -0.6, -1.6, 1.4, 2.4], atol=1e-12)


def test_sets_equal_structural_rules():
    assert sets_equal(Box([0.0], [1.0]), Box([0.0], [1.0]))
    assert not sets_equal(Box([0.0], [1.0]), Box([0.0], [2.0]))
    assert not sets_equal(Box([0.0], [1.0]), EuclideanBall([0.5], 0.5))
    assert sets_equal(NonnegBall(2.0, 3), NonnegBall(2.0, 3))
    assert not sets_equal(NonnegBall(2.0, 3), NonnegBall(2.0, 4))
    assert sets_equal(
        Composite((Box([0.0], [1.0]), NonnegOrthant(1))),
        Composite((Box([0.0], [1.0]), NonnegOrthant(1))))

"""Centralized baselines and reference solutions.

Two kinds of ground truth for judging the distributed runs. The
centralized subgradient iteration applies the same primal-dual update to
the pooled problem data, so it shows what the step-size schedule alone can
achieve when communication is free. The reference solver goes after the
actual optimizer: a KKT solve when the problem is quadratic with affine
equality constraints, a coarse-to-fine feasible grid search otherwise.
"""

import numpy as np

from dataclasses import dataclass

from .bounds import DualBoundConfig, DualBox, local_bound_init
from .convex import (
    Box,
    ConvexFnOracle,
    LagrangianPieces,
    NonnegBall,
    PenaltyPieces,
    lagrangian_dual_supgradient,
    lagrangian_primal_subgradient,
    penalty_primal_subgradient,
    penalty_supgradient,
)
from .dlpds import _record_rounds
from .schedules import validate_penalty_step_conditions
from .trace import RunTrace


def centralized_dual_box(problem, config=None):
    """Dual ball from centrally pooled constants; no consensus involved.

    With every agent's (b0, c0) on one table the worst pair is read off
    directly, which is exactly the value the distributed protocol agrees on.
    """
    config = config or DualBoundConfig()
    N = problem.n_agents
    pairs = [local_bound_init(problem, i, config)[:2] for i in range(N)]
    b_star = max(b for b, _ in pairs)
    c_star = min(c for _, c in pairs)
    theta = float(np.max(np.broadcast_to(np.asarray(config.theta, dtype=float), (N,))))
    if theta <= 0:
        raise ValueError("theta must be strictly positive")
    radius = float(N * b_star / c_star + theta)
    return DualBox(radius=radius,
                   ball=NonnegBall(radius=radius, dim=problem.n_inequality),
                   b_star=float(b_star), c_star=float(c_star), theta=theta)


def pooled_objective(problem):
    """One oracle for the summed objective f = sum of the private pieces."""
    return ConvexFnOracle(
        dim=problem.n,
        value=problem.f_total,
        subgrad=lambda x: sum(f.gradient(x) for f in problem.objectives),
        kind="pooled_sum",
        batch=lambda X: _f_total_batch(problem, X),
    )


def centralized_subgradient(problem, schedule, rounds, *, bound_config=None,
                            dual_box=None, record_every=1, x0=None,
                            early_stop=None, dual_cap=1e9, seed=0):
    """Run the single-agent primal-dual iteration on the full problem data.

    The iterate lives in the intersection of the local sets. In the
    inequality case the iteration works on the sum of the per-agent saddle
    pieces, so the dual direction comes out N-scaled and the multiplier
    settles at the same value the distributed agents' duals track. In the
    penalty case the iteration treats the pooled objective as one agent's,
    with unscaled dual increments, matching the distributed solver's dual
    update law. Both choices coincide with the distributed round under the
    identity graph when N = 1. The trace has a single agent row whose value
    column is the true pooled objective at the current iterate, not a
    tracker estimate.
    """
    if rounds < 1:
        raise ValueError("need at least one round")
    m, n_eq = problem.n_inequality, problem.n_equality
    mode = "penalty" if n_eq else ("lagrangian" if m else "primal")
    N = problem.n_agents
    X = problem.intersection_set()
    f_pooled = pooled_objective(problem)

    if mode == "penalty":
        report = validate_penalty_step_conditions(schedule, max(rounds, 1024))
        if not report.ok:
            raise ValueError("step schedule fails its conditions:\n" + report.summary())
        pooled = PenaltyPieces(agent=0, f=f_pooled,
                               inequality=problem.inequality,
                               equality=problem.equality)
    else:
        pieces = [problem.lagrangian_pieces(i) for i in range(N)]

    box = None
    if mode == "lagrangian":
        box = dual_box or centralized_dual_box(problem, bound_config)

    if x0 is None:
        # Same start convention as the distributed runners: project the origin.
        x = X.project(np.zeros(problem.n))
    else:
        x = np.asarray(x0, dtype=float).reshape(problem.n).copy()
        if not X.contains(x):
            raise ValueError("x0 lies outside the intersection of the local sets")
    mu = np.zeros(m)
    lam = np.zeros(n_eq)

    records_at = _record_rounds(rounds, record_every)
    rec_k, rec_x, rec_mu, rec_lam, rec_y, alphas = [], [], [], [], [], []

    def record(k):
        rec_k.append(k)
        rec_x.append(x.copy())
        rec_mu.append(mu.copy())
        rec_lam.append(lam.copy())
        rec_y.append(problem.f_total(x))

    if 0 in records_at:
        record(0)
    meta = {"mode": mode, "seed": seed}
    if box is not None:
        meta.update(b_star=box.b_star, c_star=box.c_star, dual_radius=box.radius)
    for k in range(rounds):
        alpha = float(schedule.alpha(k))
        alphas.append(alpha)
        if mode == "penalty":
            s_x = penalty_primal_subgradient(pooled, x, mu, lam)
            x_next = X.project(x - alpha * s_x)
            gplus, habs = penalty_supgradient(pooled, x)
            mu = mu + alpha * gplus
            lam = lam + alpha * habs
            worst = max(float(np.abs(mu).max()) if m else 0.0,
                        float(np.abs(lam).max()) if n_eq else 0.0)
            if worst > dual_cap:
                raise RuntimeError(
                    f"multiplier blow-up at round {k + 1}: max |dual| {worst:.3e} "
                    f"exceeds the cap {dual_cap:.3e}"
                )
        elif mode == "lagrangian":
            d_x = sum(lagrangian_primal_subgradient(pc, x, mu) for pc in pieces)
            x_next = X.project(x - alpha * d_x)
            d_mu = sum(lagrangian_dual_supgradient(pc, x) for pc in pieces)
            mu = box.ball.project(mu + alpha * d_mu)
        else:
            d_x = f_pooled.gradient(x)
            x_next = X.project(x - alpha * d_x)
        step = float(np.abs(x_next - x).max())
        x = x_next
        executed = k + 1
        stop = early_stop is not None and step <= early_stop
        if executed in records_at or stop:
            if not rec_k or rec_k[-1] != executed:
                record(executed)
        if stop:
            meta["stopped_at"] = executed
            break

    return RunTrace(
        algorithm="centralized",
        problem_name=problem.name,
        ks=np.array(rec_k, dtype=int),
        x=np.stack(rec_x)[:, None, :],
        y=np.array(rec_y, dtype=float)[:, None],
        mu=np.stack(rec_mu)[:, None, :] if m else None,
        lam=np.stack(rec_lam)[:, None, :] if n_eq else None,
        alphas=np.array(alphas, dtype=float),
        x_ref=problem.x_ref,
        p_ref=problem.p_ref,
        meta=meta,
    )


# ---------------------------------------------------------------------------
# reference solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceSolution:
    """Best available answer for one instance, with how it was obtained.

    ``spacing`` is the final grid cell edge for grid answers (the value error
    is at most a Lipschitz multiple of it); None for exact solves. ``mu`` is
    the inequality price in the N-scaled convention, ``nu`` the equality
    multiplier from the KKT system.
    """

    x: np.ndarray
    value: float
    mu: np.ndarray = None
    nu: np.ndarray = None
    method: str = "grid"
    spacing: float = None


def _f_total_batch(problem, X):
    total = problem.objectives[0].values(X)
    for f in problem.objectives[1:]:
        total = total + f.values(X)
    return total


def _recover_quadratic(problem, tol=1e-9):
    """Extract (H, q) with grad f_total(x) = H x + q, or None if not affine.

    Gradients of a quadratic are affine, so finite differences of gradient
    calls recover the Hessian exactly; a probe at 2 e_j catches oracles whose
    gradient only pretends to be affine.
    """
    n = problem.n
    g0 = sum(f.gradient(np.zeros(n)) for f in problem.objectives)
    H = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        col = sum(f.gradient(e) for f in problem.objectives) - g0
        probe = sum(f.gradient(2.0 * e) for f in problem.objectives) - g0
        if not np.allclose(probe, 2.0 * col, atol=tol, rtol=0.0):
            return None
        H[:, j] = col
    if not np.allclose(H, H.T, atol=tol, rtol=0.0):
        return None
    if np.linalg.eigvalsh(H).min() <= tol:
        return None
    return H, g0


def _points_for(span, resolution, refinements):
    """Points per axis so the final refined cell edge is at most resolution.

    Each refinement re-grids a window two cells wide, so the cell shrinks by
    (P-1)/2 per sweep and the final edge is 2^R * span / (P-1)^(R+1).
    """
    need = (2.0 ** refinements) * span / resolution
    return max(5, 1 + int(np.ceil(need ** (1.0 / (refinements + 1)))))


def _grid_argmin(batch_value, box, points_per_dim, refinements, feasible=None):
    """Coarse-to-fine grid minimizer over a box; returns (x, value, spacing).

    Each sweep grids the current window, keeps the best (feasible) point and
    shrinks the window to one cell around it. Honest only for unimodal
    landscapes, which is all this module feeds it.
    """
    n = box.dim
    if points_per_dim ** n > 2_000_000:
        raise ValueError("grid too large; lower points_per_dim")
    lo = box.lo.astype(float).copy()
    hi = box.hi.astype(float).copy()
    best_x, best_v = None, np.inf
    spacing = hi - lo
    for _ in range(refinements + 1):
        axes = [np.linspace(lo[d], hi[d], points_per_dim) for d in range(n)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        vals = batch_value(mesh)
        if feasible is not None:
            ok = feasible(mesh)
            if not ok.any():
                raise ValueError("no feasible grid point in the search window")
            vals = np.where(ok, vals, np.inf)
        idx = int(np.argmin(vals))
        if float(vals[idx]) < best_v:
            best_v, best_x = float(vals[idx]), mesh[idx].copy()
        spacing = (hi - lo) / (points_per_dim - 1)
        lo = np.maximum(box.lo, best_x - spacing)
        hi = np.minimum(box.hi, best_x + spacing)
    return best_x, best_v, float(spacing.max())


def _grid_price(problem, box, points_per_dim, refinements, iterations=30):
    """Inequality price by bisection on the constraint at the priced argmin.

    For a single inequality the map mu -> g(argmin of f + N mu g over the
    box) is nonincreasing; the price is where it crosses zero. Resolution is
    limited by the inner grid, not by the bisection count.
    """
    g = problem.inequality[0]
    N = problem.n_agents

    def x_of(mu):
        def batch(X):
            return _f_total_batch(problem, X) + N * mu * g.values(X)
        x, _, _ = _grid_argmin(batch, box, points_per_dim, refinements)
        return x

    if g(x_of(0.0)) <= 0:
        return 0.0
    hi = 1.0
    while g(x_of(hi)) > 0:
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError("no finite price balances the constraint")
    lo = 0.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if g(x_of(mid)) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def reference_solve(problem, resolution=0.05, *, refinements=2,
                    with_price=True):
    """Compute the best available optimizer for an instance.

    Quadratic objectives with only affine equality constraints get the exact
    KKT solve (checked against the local sets; falls back to the grid if the
    solution leaves them). Everything else runs the coarse-to-fine feasible
    grid, which needs box local sets and at most six dimensions; the grid is
    sized so its final cell edge is at most ``resolution``. The price is
    computed for single-inequality grid instances unless disabled.
    """
    if resolution <= 0:
        raise ValueError("resolution must be strictly positive")
    m, n_eq = problem.n_inequality, problem.n_equality
    if n_eq and m == 0:
        recovered = _recover_quadratic(problem)
        if recovered is not None:
            H, q = recovered
            A, b = problem.equality.rows, problem.equality.rhs
            r = A.shape[0]
            system = np.block([[H, A.T], [A, np.zeros((r, r))]])
            rhs = np.concatenate([-q, b])
            sol = np.linalg.solve(system, rhs)
            x, nu = sol[:problem.n], sol[problem.n:]
            if all(S.contains(x) for S in problem.local_sets):
                return ReferenceSolution(x=x, value=problem.f_total(x),
                                         nu=nu, method="kkt")
    if n_eq:
        raise ValueError(
            "no reference method for this instance: equality constraints are "
            "only solved in the quadratic case"
        )
    X = problem.intersection_set()
    if not isinstance(X, Box):
        raise ValueError("the grid reference needs box local sets")
    if problem.n > 6:
        raise ValueError("the grid reference is limited to six dimensions")

    feasible = None
    if m:
        def feasible(mesh):
            ok = np.ones(mesh.shape[0], dtype=bool)
            for g in problem.inequality:
                ok &= g.values(mesh) <= 0.0
            return ok

    points = _points_for(float((X.hi - X.lo).max()), resolution, refinements)
    x, value, spacing = _grid_argmin(lambda Z: _f_total_batch(problem, Z), X,
                                     points, refinements, feasible)
    mu = None
    if with_price and m == 1:
        mu = np.array([_grid_price(problem, X, points, refinements)])
    return ReferenceSolution(x=x, value=value, mu=mu, method="grid",
                             spacing=spacing)

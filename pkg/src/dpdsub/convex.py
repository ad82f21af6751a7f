"""First-order convex building blocks shared by all algorithms.

The solvers in this package only ever touch a problem through three kinds of
object: function oracles that return a value and one subgradient, affine maps
for equality constraints, and projectable sets for the primal and dual
feasible regions. Everything here is deliberately small and allocation-light
because the simulators call these objects once per agent per round.
"""

from dataclasses import dataclass

import numpy as np

# Decision variables and duals are plain 1-d float arrays.
DecisionVector = np.ndarray


def plus_projection(v):
    """Componentwise projection onto the nonnegative orthant, max(v, 0)."""
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def abs_map(v):
    """Componentwise absolute value, written to mirror ``plus_projection``."""
    return np.abs(np.asarray(v, dtype=float))


# ---------------------------------------------------------------------------
# function oracles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexFnOracle:
    """A convex function exposed through value and subgradient callables.

    Parameters
    ----------
    dim : int
        Dimension of the argument vector.
    value : callable
        Maps a length-``dim`` array to a float.
    subgrad : callable
        Maps a length-``dim`` array to one subgradient (length-``dim`` array).
        Any measurable selection is acceptable; the callers never assume
        differentiability.
    kind : str
        Short tag used by reporting and the config round trip.
    batch : callable, optional
        Maps a (P, dim) array to P values at once. Purely a fast path for
        grid sweeps; when absent, ``values`` falls back to a loop.
    """

    dim: int
    value: object
    subgrad: object
    kind: str = "custom"
    batch: object = None

    def __call__(self, x):
        return float(self.value(np.asarray(x, dtype=float)))

    def gradient(self, x):
        return np.asarray(self.subgrad(np.asarray(x, dtype=float)), dtype=float)

    def values(self, X):
        """Values at the rows of a (P, dim) array."""
        X = np.asarray(X, dtype=float)
        if self.batch is not None:
            return np.asarray(self.batch(X), dtype=float)
        return np.array([self.value(x) for x in X], dtype=float)


def linear_oracle(coeffs, offset=0.0):
    """f(x) = coeffs.x + offset, subgradient is the constant coefficient vector."""
    c = np.asarray(coeffs, dtype=float)

    def val(x):
        return float(c @ x + offset)

    def grad(x):
        return c.copy()

    return ConvexFnOracle(dim=c.size, value=val, subgrad=grad, kind="linear",
                          batch=lambda X: X @ c + offset)


def quadratic_oracle(center, weight=1.0, dim=None):
    """f(x) = weight * ||x - center||^2 with gradient 2 * weight * (x - center)."""
    c = np.asarray(center, dtype=float)
    if dim is not None and c.size != dim:
        raise ValueError("center length does not match dim")
    w = float(weight)

    def val(x):
        d = x - c
        return w * float(d @ d)

    def grad(x):
        return 2.0 * w * (x - c)

    return ConvexFnOracle(dim=c.size, value=val, subgrad=grad, kind="quadratic",
                          batch=lambda X: w * ((X - c) ** 2).sum(axis=1))


def neg_sqrt_oracle(coord, dim):
    """f(x) = -sqrt(x[coord]), the concave-utility objective used by one agent.

    The function is convex and finite only for x[coord] > 0; evaluation at a
    nonpositive coordinate is a contract violation and raises.
    """
    j = int(coord)
    if not 0 <= j < dim:
        raise ValueError("coordinate index out of range")

    def val(x):
        z = x[j]
        if z <= 0.0:
            raise ValueError(f"neg_sqrt oracle evaluated at x[{j}]={z!r} <= 0")
        return float(-np.sqrt(z))

    def grad(x):
        z = x[j]
        if z <= 0.0:
            raise ValueError(f"neg_sqrt oracle evaluated at x[{j}]={z!r} <= 0")
        g = np.zeros(dim)
        g[j] = -0.5 / np.sqrt(z)
        return g

    def batch(X):
        z = X[:, j]
        if (z <= 0.0).any():
            raise ValueError(f"neg_sqrt oracle evaluated at a nonpositive x[{j}]")
        return -np.sqrt(z)

    return ConvexFnOracle(dim=dim, value=val, subgrad=grad, kind="neg_sqrt", batch=batch)


@dataclass(frozen=True)
class AffineMap:
    """h(x) = rows @ x - rhs, the residual map of affine equality constraints."""

    rows: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        rhs = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if rows.shape[0] != rhs.size:
            raise ValueError("row count does not match rhs length")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "rhs", rhs)

    @property
    def n_rows(self):
        return self.rows.shape[0]

    @property
    def dim(self):
        return self.rows.shape[1]

    def residual(self, x):
        return self.rows @ np.asarray(x, dtype=float) - self.rhs


# ---------------------------------------------------------------------------
# projectable sets
# ---------------------------------------------------------------------------

class ProjectableSet:
    """Closed convex set with a Euclidean projection and a membership test."""

    dim = None

    def project(self, z):
        raise NotImplementedError

    def contains(self, x, tol=1e-9):
        raise NotImplementedError

    def reference_point(self):
        """A cheap deterministic interior-ish point, used as a default start."""
        return self.project(np.zeros(self.dim))


@dataclass(frozen=True)
class Box(ProjectableSet):
    """Axis-aligned box {x : lo <= x <= hi}; projection is a clamp."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or (lo > hi).any():
            raise ValueError("box bounds must satisfy lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.size

    def project(self, z):
        return np.clip(np.asarray(z, dtype=float), self.lo, self.hi)

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return bool((x >= self.lo - tol).all() and (x <= self.hi + tol).all())

    def reference_point(self):
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class EuclideanBall(ProjectableSet):
    """Ball {x : ||x - center|| <= radius}; projection is a radial pull."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        r = float(self.radius)
        if r < 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def dim(self):
        return self.center.size

    def project(self, z):
        d = np.asarray(z, dtype=float) - self.center
        nrm = float(np.linalg.norm(d))
        if nrm <= self.radius:
            return self.center + d
        return self.center + d * (self.radius / nrm)

    def contains(self, x, tol=1e-9):
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.center)) <= self.radius + tol

    def reference_point(self):
        return self.center.copy()


@dataclass(frozen=True)
class NonnegOrthant(ProjectableSet):
    """Nonnegative orthant; projection is the componentwise plus operation."""

    dim: int

    def project(self, z):
        return plus_projection(z)

    def contains(self, x, tol=1e-9):
        return bool((np.asarray(x, dtype=float) >= -tol).all())

    def reference_point(self):
        return np.zeros(self.dim)


@dataclass(frozen=True)
class NonnegBall(ProjectableSet):
    """Intersection of the nonnegative orthant with a ball centered at zero.

    This is the realized shape of the dual feasible sets. Because the ball is
    centered at the apex of the orthant, projecting onto the intersection
    factors exactly: clamp to the orthant first, then rescale radially if the
    clamped point is too long.
    """

    radius: float
    dim: int

    def __post_init__(self):
        if float(self.radius) < 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "radius", float(self.radius))

    def project(self, z):
        w = plus_projection(z)
        nrm = float(np.linalg.norm(w))
        if nrm <= self.radius:
            return w
        return w * (self.radius / nrm)

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return bool((x >= -tol).all()) and float(np.linalg.norm(np.maximum(x, 0.0))) <= self.radius + tol

    def reference_point(self):
        return np.zeros(self.dim)


@dataclass(frozen=True)
class Composite(ProjectableSet):
    """Intersection of member sets, projected with Dykstra's alternating scheme.

    Plain alternating projections converge to some point of the intersection;
    the Dykstra correction terms are what make the limit the nearest point.
    """

    members: tuple
    max_iter: int = 4000
    tol: float = 1e-12

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("composite set needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise ValueError("member sets disagree on dimension")
        object.__setattr__(self, "members", members)

    @property
    def dim(self):
        return self.members[0].dim

    def project(self, z):
        x = np.asarray(z, dtype=float).copy()
        corrections = [np.zeros_like(x) for _ in self.members]
        for _ in range(self.max_iter):
            # The iterate can sit still for a whole sweep while the correction
            # terms are still moving, so convergence is judged on those.
            delta = 0.0
            for s, member in enumerate(self.members):
                y = x + corrections[s]
                x = member.project(y)
                shift = y - x
                delta = max(delta, float(np.max(np.abs(shift - corrections[s]))))
                corrections[s] = shift
            if delta < self.tol:
                break
        return x

    def contains(self, x, tol=1e-9):
        return all(m.contains(x, tol) for m in self.members)


def project(S, z):
    """Euclidean projection of ``z`` onto the projectable set ``S``."""
    return S.project(z)


def sets_equal(a, b):
    """Structural equality of two projectable sets (same shape, same data)."""
    if type(a) is not type(b) or a.dim != b.dim:
        return False
    if isinstance(a, Box):
        return bool(np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi))
    if isinstance(a, EuclideanBall):
        return bool(np.array_equal(a.center, b.center) and a.radius == b.radius)
    if isinstance(a, NonnegOrthant):
        return True
    if isinstance(a, NonnegBall):
        return a.radius == b.radius
    if isinstance(a, Composite):
        return len(a.members) == len(b.members) and all(
            sets_equal(u, v) for u, v in zip(a.members, b.members)
        )
    return False


# ---------------------------------------------------------------------------
# per-agent saddle-function pieces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LagrangianPieces:
    """One agent's share of the Lagrangian: its objective plus mu' g.

    The inequality constraint g is known to every agent, so each piece holds
    the full tuple of constraint component oracles next to the private
    objective.
    """

    agent: int
    f: ConvexFnOracle
    constraints: tuple = ()

    @property
    def n_constraints(self):
        return len(self.constraints)

    def constraint_values(self, x):
        return np.array([g(x) for g in self.constraints], dtype=float)


def _check_dual(mu, n, name="mu"):
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if mu.size != n:
        raise ValueError(f"{name} has length {mu.size}, expected {n}")
    if (mu < -1e-12).any():
        raise ValueError(f"{name} must be nonnegative")
    return mu


def lagrangian_value(pieces, x, mu):
    """L_i(x, mu) = f_i(x) + mu' g(x) for nonnegative mu."""
    mu = _check_dual(mu, pieces.n_constraints)
    return pieces.f(x) + float(mu @ pieces.constraint_values(x))


def lagrangian_primal_subgradient(pieces, x, mu):
    """A subgradient of L_i(., mu) at x: Df_i(x) + sum_l mu_l Dg_l(x)."""
    mu = _check_dual(mu, pieces.n_constraints)
    d = pieces.f.gradient(x)
    for coef, g in zip(mu, pieces.constraints):
        if coef != 0.0:
            d = d + coef * g.gradient(x)
    return d

def lagrangian_dual_supgradient(pieces, x):
    """A supgradient of the concave map mu -> L_i(x, mu), which is just g(x)."""
    return pieces.constraint_values(x)


@dataclass(frozen=True)
class PenaltyPieces:
    """One agent's share of the penalty saddle function.

    The penalty form replaces mu' g with mu' max(g, 0) and adds lam' |h| for
    the affine equality constraint, which keeps the duals meaningful without
    a compact dual set.
    """

    agent: int
    f: ConvexFnOracle
    inequality: tuple = ()
    equality: AffineMap = None

    @property
    def n_inequality(self):
        return len(self.inequality)

    @property
    def n_equality(self):
        return 0 if self.equality is None else self.equality.n_rows

    def inequality_values(self, x):
        return np.array([g(x) for g in self.inequality], dtype=float)


def penalty_value(pieces, x, mu, lam):
    """H_i(x, mu, lam) = f_i(x) + mu' max(g(x), 0) + lam' |h(x)|."""
    mu = _check_dual(mu, pieces.n_inequality, "mu")
    lam = _check_dual(lam, pieces.n_equality, "lam")
    total = pieces.f(x)
    if pieces.n_inequality:
        total += float(mu @ plus_projection(pieces.inequality_values(x)))
    if pieces.n_equality:
        total += float(lam @ abs_map(pieces.equality.residual(x)))
    return total


def penalty_primal_subgradient(pieces, x, mu, lam):
    """A subgradient of H_i(., mu, lam) at x.

    Ties are broken toward zero: the kink of max(g, 0) at g = 0 contributes
    nothing, and |h| at h = 0 contributes nothing. Both selections lie in the
    respective subdifferentials, so the convexity inequality is preserved.
    """
    mu = _check_dual(mu, pieces.n_inequality, "mu")
    lam = _check_dual(lam, pieces.n_equality, "lam")
    d = pieces.f.gradient(x)
    for coef, g in zip(mu, pieces.inequality):
        if coef != 0.0 and g(x) > 0.0:
            d = d + coef * g.gradient(x)
    if pieces.n_equality:
        signs = np.sign(pieces.equality.residual(x))
        d = d + (lam * signs) @ pieces.equality.rows
    return d


def penalty_supgradient(pieces, x):
    """Supgradient of (mu, lam) -> H_i(x, mu, lam): the pair (max(g,0), |h|).

    H_i is affine in the duals, so this supgradient is exact.
    """
    gplus = plus_projection(pieces.inequality_values(x)) if pieces.n_inequality else np.zeros(0)
    habs = abs_map(pieces.equality.residual(x)) if pieces.n_equality else np.zeros(0)
    return gplus, habs

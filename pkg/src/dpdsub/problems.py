"""Problem descriptions the simulators run on.

A problem couples N private convex objectives with constraints every agent
knows: optionally a vector inequality g(x) <= 0, optionally an affine
equality h(x) = 0, and one projectable local set per agent. Two standard
instances ship with the package (a concave-utility resource allocation and a
quadratic consensus problem with an equality constraint) plus a small text
format for custom instances.
"""

from dataclasses import dataclass

import numpy as np

from .convex import (
    AffineMap,
    Box,
    Composite,
    ConvexFnOracle,
    EuclideanBall,
    LagrangianPieces,
    PenaltyPieces,
    linear_oracle,
    neg_sqrt_oracle,
    quadratic_oracle,
    sets_equal,
)


@dataclass(frozen=True)
class ProblemSpec:
    """A multi-agent constrained convex program.

    Parameters
    ----------
    name : str
        Instance tag used by the harness and reports.
    n : int
        Decision dimension.
    objectives : tuple of ConvexFnOracle
        One private objective per agent; the global objective is their sum.
    inequality : tuple of ConvexFnOracle
        Components of the shared inequality constraint g(x) <= 0 (may be empty).
    equality : AffineMap or None
        Shared affine equality constraint h(x) = 0 (may be absent).
    local_sets : tuple of ProjectableSet
        One local constraint set per agent.
    x_ref : ndarray or None
        Known optimizer, used only for error reporting.
    p_ref : float or None
        Known optimal value, used only for error reporting.
    """

    name: str
    n: int
    objectives: tuple
    inequality: tuple
    equality: object
    local_sets: tuple
    x_ref: np.ndarray = None
    p_ref: float = None

    def __post_init__(self):
        if len(self.objectives) != len(self.local_sets):
            raise ValueError("need one local set per objective")
        if not self.objectives:
            raise ValueError("need at least one agent")
        for f in self.objectives:
            if f.dim != self.n:
                raise ValueError("objective dimension mismatch")
        for g in self.inequality:
            if g.dim != self.n:
                raise ValueError("inequality dimension mismatch")
        if self.equality is not None and self.equality.dim != self.n:
            raise ValueError("equality dimension mismatch")
        for S in self.local_sets:
            if S.dim != self.n:
                raise ValueError("local set dimension mismatch")
        if self.x_ref is not None:
            object.__setattr__(self, "x_ref", np.asarray(self.x_ref, dtype=float))

    @property
    def n_agents(self):
        return len(self.objectives)

    @property
    def n_inequality(self):
        return len(self.inequality)

    @property
    def n_equality(self):
        return 0 if self.equality is None else self.equality.n_rows

    def f_total(self, x):
        return float(sum(f(x) for f in self.objectives))

    def inequality_values(self, x):
        return np.array([g(x) for g in self.inequality], dtype=float)

    def equality_residual(self, x):
        if self.equality is None:
            return np.zeros(0)
        return self.equality.residual(x)

    def lagrangian_pieces(self, agent):
        return LagrangianPieces(agent=agent, f=self.objectives[agent],
                                constraints=self.inequality)

    def penalty_pieces(self, agent):
        return PenaltyPieces(agent=agent, f=self.objectives[agent],
                             inequality=self.inequality, equality=self.equality)

    def has_identical_sets(self):
        first = self.local_sets[0]
        return all(sets_equal(first, S) for S in self.local_sets[1:])

    def intersection_set(self):
        """The intersection of the local sets, as one projectable set."""
        if all(isinstance(S, Box) for S in self.local_sets):
            lo = np.max([S.lo for S in self.local_sets], axis=0)
            hi = np.min([S.hi for S in self.local_sets], axis=0)
            if (lo > hi).any():
                raise ValueError("local boxes have empty intersection")
            return Box(lo=lo, hi=hi)
        if self.has_identical_sets():
            return self.local_sets[0]
        return Composite(members=self.local_sets)


# ---------------------------------------------------------------------------
# shipped instances
# ---------------------------------------------------------------------------

# Per-agent box bounds of the resource-allocation instance. Agent i owns the
# concave utility sqrt(x_i), so its objective oracle is -sqrt(x_i).
_NUM_BOUNDS = (
    (0.5, 5.5),
    (0.55, 5.25),
    (0.5, 6.0),
    (0.5, 5.0),
    (0.525, 5.75),
)

_NUM_CAPACITY = 5.0


def build_num_problem(identical_sets=False):
    """Rate allocation: minimize sum_i -sqrt(x_i) subject to sum(x) <= 5.

    Five agents, five rates, per-agent box limits. The optimum splits the
    capacity evenly at (1, 1, 1, 1, 1) with value -5. With
    ``identical_sets=True`` every agent uses the intersection box instead of
    its own one, which is the shape the penalty-channel solver requires.
    """
    n = 5
    objectives = tuple(neg_sqrt_oracle(i, n) for i in range(n))
    capacity = linear_oracle(np.ones(n), -_NUM_CAPACITY)
    boxes = tuple(Box(lo=np.full(n, lo), hi=np.full(n, hi)) for lo, hi in _NUM_BOUNDS)
    name = "num"
    if identical_sets:
        lo = np.max([b.lo for b in boxes], axis=0)
        hi = np.min([b.hi for b in boxes], axis=0)
        boxes = tuple(Box(lo=lo, hi=hi) for _ in range(n))
        name = "num_shared_set"
    return ProblemSpec(name=name, n=n, objectives=objectives,
                       inequality=(capacity,), equality=None, local_sets=boxes,
                       x_ref=np.ones(n), p_ref=-5.0)


# Quadratic instance: agent i tracks its private anchor point. The anchor
# coordinates sum to 5 in every column, so the mean anchor is (1, ..., 1) and
# already satisfies the coupling constraint sum(x) = 5.
_QUAD_ANCHORS = np.array([
    [5.0, 2.5, 5.0, -2.5, -5.0],
    [2.5, 5.0, -2.5, -5.0, 5.0],
    [5.0, -2.5, -5.0, 5.0, 2.5],
    [-2.5, -5.0, 5.0, 2.5, 5.0],
    [-5.0, 5.0, 2.5, 5.0, -2.5],
])

_QUAD_WEIGHT = 0.2
_QUAD_TARGET = 5.0


def build_quadratic_problem(as_inequality=False):
    """Quadratic tracking: minimize sum_i (1/5)||x - anchor_i||^2, sum(x) = 5.

    All five agents share the box [-5, 5]^5. The optimum is (1, ..., 1) with
    value 82.5. With ``as_inequality=True`` the coupling becomes
    sum(x) <= 5, which leaves the optimum unchanged because the unconstrained
    minimizer already sits on the hyperplane; this variant gives the
    Lagrangian-channel solver a quadratic instance to run on.
    """
    n = 5
    objectives = tuple(quadratic_oracle(_QUAD_ANCHORS[i], _QUAD_WEIGHT) for i in range(n))
    box = Box(lo=np.full(n, -5.0), hi=np.full(n, 5.0))
    sets = tuple(box for _ in range(n))
    if as_inequality:
        coupling = linear_oracle(np.ones(n), -_QUAD_TARGET)
        return ProblemSpec(name="quadratic_ineq", n=n, objectives=objectives,
                           inequality=(coupling,), equality=None, local_sets=sets,
                           x_ref=np.ones(n), p_ref=82.5)
    equality = AffineMap(rows=np.ones((1, n)), rhs=np.array([_QUAD_TARGET]))
    return ProblemSpec(name="quadratic", n=n, objectives=objectives,
                       inequality=(), equality=equality, local_sets=sets,
                       x_ref=np.ones(n), p_ref=82.5)


# ---------------------------------------------------------------------------
# custom instances from a sectioned text description
# ---------------------------------------------------------------------------

def _parse_vector(text):
    return np.array([float(tok) for tok in text.replace(",", " ").split()])


def _parse_kv_block(lines):
    out = {}
    for line in lines:
        if "=" not in line:
            raise ValueError(f"expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _build_objective(fields, n):
    kind = fields.get("kind")
    if kind == "quadratic":
        center = _parse_vector(fields["center"])
        weight = float(fields.get("weight", 1.0))
        if center.size != n:
            raise ValueError("objective center has the wrong length")
        return quadratic_oracle(center, weight)
    if kind == "linear":
        coeffs = _parse_vector(fields["coeffs"])
        if coeffs.size != n:
            raise ValueError("objective coeffs have the wrong length")
        return linear_oracle(coeffs, float(fields.get("offset", 0.0)))
    if kind == "neg_sqrt":
        return neg_sqrt_oracle(int(fields["coord"]), n)
    raise ValueError(f"unknown objective kind {kind!r}")


def _build_set(fields, n):
    if "box" in fields:
        lo_text, sep, hi_text = fields["box"].partition(" to ")
        if not sep:
            raise ValueError("box wants 'lo... to hi...'")
        lo, hi = _parse_vector(lo_text), _parse_vector(hi_text)
        if lo.size != n or hi.size != n:
            raise ValueError("box bounds have the wrong length")
        return Box(lo=lo, hi=hi)
    if "ball" in fields:
        center_text, sep, radius_text = fields["ball"].partition("|")
        if not sep:
            raise ValueError("ball wants 'center... | radius'")
        center = _parse_vector(center_text)
        if center.size != n:
            raise ValueError("ball center has the wrong length")
        return EuclideanBall(center=center, radius=float(radius_text))
    raise ValueError("set block needs a 'box' or 'ball' entry")


def _split_row(line, n, what):
    left, sep, right = line.partition("|")
    if not sep:
        raise ValueError(f"{what} row wants 'coeffs... | constant'")
    coeffs = _parse_vector(left)
    if coeffs.size != n:
        raise ValueError(f"{what} row has the wrong length")
    return coeffs, float(right)


def build_custom(text, name="custom"):
    """Build a problem from its text description.

    The format is line oriented with ``#`` comments. Global keys ``n`` and
    ``agents`` come first, then one ``[objective i]`` block per agent
    (kinds: quadratic, linear, neg_sqrt), per-agent ``[set i]`` blocks or one
    shared ``[set]`` block (box or ball), an optional ``[inequality]`` block
    with one ``coeffs | rhs`` line per component (meaning coeffs.x <= rhs),
    and an optional ``[equality]`` block with one ``row | rhs`` line per
    equality row (meaning row.x = rhs). Optional global keys ``x_ref`` and
    ``p_ref`` attach a known solution for error reporting.
    """
    sections = {"": []}
    current = ""
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current in sections:
                raise ValueError(f"duplicate section [{current}]")
            sections[current] = []
        else:
            sections[current].append(line)

    top = _parse_kv_block(sections.pop(""))
    try:
        n = int(top["n"])
        n_agents = int(top["agents"])
    except KeyError as missing:
        raise ValueError(f"missing global key {missing}") from None
    x_ref = _parse_vector(top["x_ref"]) if "x_ref" in top else None
    p_ref = float(top["p_ref"]) if "p_ref" in top else None

    objectives = []
    for i in range(1, n_agents + 1):
        block = sections.pop(f"objective {i}", None)
        if block is None:
            raise ValueError(f"missing [objective {i}] block")
        objectives.append(_build_objective(_parse_kv_block(block), n))

    if "set" in sections:
        shared = _build_set(_parse_kv_block(sections.pop("set")), n)
        local_sets = [shared] * n_agents
    else:
        local_sets = []
        for i in range(1, n_agents + 1):
            block = sections.pop(f"set {i}", None)
            if block is None:
                raise ValueError(f"missing [set {i}] block (or one shared [set])")
            local_sets.append(_build_set(_parse_kv_block(block), n))

    inequality = []
    for line in sections.pop("inequality", []):
        coeffs, rhs = _split_row(line, n, "inequality")
        # The row means coeffs . x <= rhs, stored as g(x) = coeffs . x - rhs.
        inequality.append(linear_oracle(coeffs, -rhs))

    equality = None
    eq_lines = sections.pop("equality", [])
    if eq_lines:
        rows, rhs = [], []
        for line in eq_lines:
            coeffs, constant = _split_row(line, n, "equality")
            rows.append(coeffs)
            rhs.append(constant)
        equality = AffineMap(rows=np.array(rows), rhs=np.array(rhs))

    if sections:
        raise ValueError(f"unknown sections: {sorted(sections)}")
    return ProblemSpec(name=name, n=n, objectives=tuple(objectives),
                       inequality=tuple(inequality), equality=equality,
                       local_sets=tuple(local_sets), x_ref=x_ref, p_ref=p_ref)


def build_named_problem(token, base_dir=None):
    """Resolve a config token: num, quadratic, variants, or custom:<path>."""
    builders = {
        "num": lambda: build_num_problem(),
        "num_shared_set": lambda: build_num_problem(identical_sets=True),
        "quadratic": lambda: build_quadratic_problem(),
        "quadratic_ineq": lambda: build_quadratic_problem(as_inequality=True),
    }
    if token in builders:
        return builders[token]()
    if token.startswith("custom:"):
        from pathlib import Path

        path = Path(token.split(":", 1)[1])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return build_custom(path.read_text(), name=path.stem)
    raise ValueError(f"unknown problem {token!r}")

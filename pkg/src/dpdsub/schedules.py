"""Step-size schedules and the conditions the solvers need from them.

The Lagrangian-channel solver and the centralized baselines need the classic
diminishing conditions: alpha(k) -> 0, sum alpha = inf, sum alpha^2 < inf.
The penalty-channel solver runs its duals without a compact dual set, so it
additionally needs the running sum s(k) = alpha(0) + ... + alpha(k) to be
tame: alpha(k+1) s(k) -> 0, sum alpha(k+1)^2 s(k) < inf, and
sum alpha(k+1)^2 s(k)^2 < inf.

Whether a given schedule satisfies series conditions is not decidable from a
finite prefix, so the validator reports one of three verdicts per condition:
PASS (analytic, for schedule families where the conditions are provable,
e.g. a/(k+1) via the dyadic-block bound s(k) <= log2(k)+1), FAIL (a
divergence or a stalled limit is visible in the prefix), or EVIDENCE (the
prefix is consistent with the condition but proves nothing). FAIL is the
only verdict that stops a run.
"""

from dataclasses import dataclass, field

import numpy as np

PASS = "PASS"
FAIL = "FAIL"
EVIDENCE = "EVIDENCE"


@dataclass(frozen=True)
class StepSizeSchedule:
    """Deterministic step-size sequence alpha(k), k >= 0.

    kinds: ``harmonic`` alpha(k) = param / (k+1); ``power`` alpha(k) =
    (k+1)**(-param) with param in (0, 1]; ``constant`` alpha(k) = param.
    """

    kind: str
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("harmonic", "power", "constant"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.param <= 0:
            raise ValueError("schedule parameter must be positive")
        if self.kind == "power" and not 0 < self.param <= 1:
            raise ValueError("power exponent must lie in (0, 1]")

    def alpha(self, k):
        if self.kind == "harmonic":
            return self.param / (k + 1.0)
        if self.kind == "power":
            return float((k + 1.0) ** (-self.param))
        return self.param

    def alphas(self, horizon):
        """alpha(0..horizon-1) as one array."""
        k = np.arange(horizon, dtype=float)
        if self.kind == "harmonic":
            return self.param / (k + 1.0)
        if self.kind == "power":
            return (k + 1.0) ** (-self.param)
        return np.full(horizon, self.param)

    def label(self):
        if self.kind == "harmonic" and self.param == 1.0:
            return "harmonic"
        return f"{self.kind}:{self.param:g}"


def parse_schedule(text):
    """Parse ``harmonic``, ``harmonic:a``, ``power:p`` or ``constant:c``."""
    parts = text.strip().split(":")
    kind = parts[0].strip()
    if len(parts) == 1:
        if kind != "harmonic":
            raise ValueError(f"schedule {kind!r} needs a parameter, e.g. {kind}:0.5")
        return StepSizeSchedule("harmonic", 1.0)
    if len(parts) != 2:
        raise ValueError(f"cannot parse schedule spec {text!r}")
    return StepSizeSchedule(kind, float(parts[1]))


@dataclass
class StepConditionReport:
    """Per-condition verdicts for one schedule over one inspection horizon.

    Any verdict other than FAIL that was not established analytically is
    finite-horizon evidence, not proof, and is labeled as such.
    """

    schedule: str
    horizon: int
    conditions: list = field(default_factory=list)
    analytic: bool = False

    def add(self, name, verdict, detail):
        self.conditions.append((name, verdict, detail))

    @property
    def verdict(self):
        if any(v == FAIL for _, v, _ in self.conditions):
            return FAIL
        if self.analytic and all(v == PASS for _, v, _ in self.conditions):
            return PASS
        return EVIDENCE

    @property
    def ok(self):
        return self.verdict != FAIL

    def summary(self):
        lines = [f"schedule {self.schedule}: {self.verdict} (horizon {self.horizon})"]
        for name, verdict, detail in self.conditions:
            lines.append(f"  {name}: {verdict} ({detail})")
        return "\n".join(lines)


def _limit_verdict(tail, mid):
    """Verdict for 'this sequence tends to zero' from two prefix samples."""
    if tail > 1.0:
        return FAIL, f"tail value {tail:.3g} is large"
    if tail > 0.01 and tail >= 0.9 * mid:
        return FAIL, f"tail value {tail:.3g} is not shrinking"
    return EVIDENCE, f"tail value {tail:.3g}"


def _convergence_verdict(term_tail, term_mid, k_tail, k_mid):
    """Verdict for 'sum of this nonnegative sequence is finite'.

    For nonincreasing terms, summability forces k * term(k) -> 0, so a tail
    where that product is large or growing certifies divergence.
    """
    w_tail = k_tail * term_tail
    w_mid = k_mid * term_mid
    if w_tail > 0.05:
        return FAIL, f"k*term = {w_tail:.3g} at the tail"
    if w_tail > 1e-3 and w_tail >= w_mid:
        return FAIL, f"k*term grew from {w_mid:.3g} to {w_tail:.3g}"
    return EVIDENCE, f"k*term = {w_tail:.3g} at the tail"


def _divergence_verdict(term_tail, term_mid, k_tail, k_mid):
    """Verdict for 'sum of this nonnegative sequence diverges'."""
    w_tail = k_tail * term_tail
    if w_tail < 1e-3 and k_tail * term_tail < k_mid * term_mid:
        return FAIL, f"k*term = {w_tail:.3g} shrinking, sum looks finite"
    return EVIDENCE, f"k*term = {w_tail:.3g} at the tail"


def _analytic_all_six(schedule):
    """Schedules whose six conditions hold provably.

    For alpha(k) = a/(k+1) the running sum obeys the dyadic-block bound
    s(k) <= a (log2(k) + 1) for k >= 2, which makes every weighted series a
    multiple of sum log(k)^q / k^2 and hence finite. For alpha = (k+1)^(-p)
    the running sum grows like k^(1-p); all six conditions reduce to power
    comparisons that hold exactly when p > 3/4.
    """
    if schedule.kind == "harmonic":
        return True
    if schedule.kind == "power" and schedule.param > 0.75:
        return True
    return False


def _analytic_classic_three(schedule):
    # sum alpha^2 = sum (k+1)^(-2p) already converges for any p > 1/2
    if schedule.kind == "harmonic":
        return True
    if schedule.kind == "power" and schedule.param > 0.5:
        return True
    return False


def _validate_conditions(schedule, horizon, all_six, analytic):
    """Shared engine for both validators.

    For analytic schedules the verdict of every condition is PASS by proof;
    the measured prefix numbers stay in the details. Everything else gets
    the finite-prefix heuristics, whose FAIL means a divergence or a stalled
    limit is already visible.
    """
    horizon = int(horizon)
    if horizon < 16:
        raise ValueError("horizon too short to say anything")
    report = StepConditionReport(schedule=schedule.label(), horizon=horizon,
                                 analytic=analytic)
    a = schedule.alphas(horizon + 1)
    s = np.cumsum(a)
    k_tail, k_mid = horizon - 1, horizon // 2

    def record(name, verdict_detail):
        verdict, detail = verdict_detail
        if report.analytic:
            verdict = PASS
        report.add(name, verdict, detail)

    record("alpha_to_zero", _limit_verdict(a[k_tail], a[k_mid]))
    record("sum_alpha_diverges",
           _divergence_verdict(a[k_tail], a[k_mid], k_tail, k_mid))
    record("sum_alpha_sq_finite",
           _convergence_verdict(a[k_tail] ** 2, a[k_mid] ** 2, k_tail, k_mid))
    if not all_six:
        return report
    # The three running-sum conditions weigh alpha(k+1) against s(k).
    record("alpha_next_times_s_to_zero",
           _limit_verdict(a[k_tail + 1] * s[k_tail], a[k_mid + 1] * s[k_mid]))
    record("sum_alpha_sq_s_finite",
           _convergence_verdict(a[k_tail + 1] ** 2 * s[k_tail],
                                a[k_mid + 1] ** 2 * s[k_mid], k_tail, k_mid))
    record("sum_alpha_sq_s_sq_finite",
           _convergence_verdict(a[k_tail + 1] ** 2 * s[k_tail] ** 2,
                                a[k_mid + 1] ** 2 * s[k_mid] ** 2, k_tail, k_mid))
    return report


def validate_penalty_step_conditions(schedule, horizon=1_000_000):
    """Check the six step-size conditions the penalty-channel solver needs.

    Returns a ``StepConditionReport``; ``report.ok`` is False only when some
    condition visibly fails on the prefix. The six conditions, in report
    order: alpha -> 0, sum alpha = inf, sum alpha^2 < inf,
    alpha(k+1) s(k) -> 0, sum alpha(k+1)^2 s(k) < inf,
    sum alpha(k+1)^2 s(k)^2 < inf.
    """
    return _validate_conditions(schedule, horizon, all_six=True,
                                analytic=_analytic_all_six(schedule))


def validate_diminishing_conditions(schedule, horizon=1_000_000):
    """Check only the classic three conditions (Lagrangian solver, baselines)."""
    return _validate_conditions(schedule, horizon, all_six=False,
                                analytic=_analytic_classic_three(schedule))


# ---------------------------------------------------------------------------
# heterogeneous per-agent schedules
# ---------------------------------------------------------------------------

@dataclass
class PerAgentSchedules:
    """Per-agent step sizes alpha_i(k) = base(k) * factor_i(k).

    Factors live in [deviation, 1], so at every round the smallest agent step
    is at least ``deviation`` times the largest, which is the coupling the
    convergence analysis needs from heterogeneous steps.
    """

    base: StepSizeSchedule
    factors: np.ndarray
    deviation: float

    @property
    def n_agents(self):
        return self.factors.shape[1]

    @property
    def rounds(self):
        return self.factors.shape[0]

    def alpha(self, k):
        """Length-N array of agent step sizes at round k."""
        if not 0 <= k < self.rounds:
            raise ValueError(f"round {k} outside the generated horizon {self.rounds}")
        return self.base.alpha(k) * self.factors[k]


def per_agent_schedule(base, n_agents, rounds, deviation=1.0, seed=0):
    """Draw deterministic per-agent factors in [deviation, 1].

    With ``deviation`` = 1 every agent uses the base schedule exactly.
    """
    if not 0.0 < deviation <= 1.0:
        raise ValueError("deviation must lie in (0, 1]")
    if deviation == 1.0:
        factors = np.ones((rounds, n_agents))
    else:
        rng = np.random.default_rng([int(seed), 40409])
        factors = rng.uniform(deviation, 1.0, size=(rounds, n_agents))
    return PerAgentSchedules(base=base, factors=factors, deviation=float(deviation))

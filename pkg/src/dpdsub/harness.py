"""Experiment harness: config parsing, validated runs, delimited output.

A config is a flat key=value file. The harness builds the problem, graph
and schedule it names, refuses to run when the standing graph or step-size
assumptions fail, dispatches to the right solver and writes the recorded
trace as one CSV row per (round, agent). The CSV layout depends only on
the algorithm and the problem shape, and the whole pipeline is
deterministic, so rerunning a config reproduces the output byte for byte.
"""

import csv
import dataclasses
import inspect
import io

import numpy as np

from dataclasses import dataclass

from .baselines import centralized_subgradient
from .bounds import DualBoundConfig
from .dlpds import run_dlpds, run_primal_only
from .dppds import run_dppds
from .network import GENERATORS, validate_graph_sequence
from .problems import build_named_problem
from .schedules import (
    FAIL,
    parse_schedule,
    per_agent_schedule,
    validate_diminishing_conditions,
    validate_penalty_step_conditions,
)
from .trace import compute_metrics, summarize


@dataclass
class ExperimentConfig:
    """Everything one run needs, with the defaults of the stock experiments."""

    problem: str = "num"
    algorithm: str = "dlpds"
    rounds: int = 20000
    seed: int = 0
    schedule: str = "harmonic:1"
    graph: str = "rotating_ring"
    graph_window: int = None
    weight_floor: float = 0.1
    slater_margin: float = 0.5
    theta: float = 1.0
    mu_tilde: np.ndarray = None
    bound_budget: int = 4096
    record_every: int = 1
    debug_asserts: bool = False
    probe_count: int = 8
    early_stop: float = None
    dual_cap: float = 1e9
    step_deviation: float = 1.0
    out: str = None
    figures: bool = False


_INT_KEYS = {"rounds", "seed", "graph_window", "bound_budget", "record_every",
             "probe_count"}
_FLOAT_KEYS = {"weight_floor", "slater_margin", "theta", "early_stop",
               "dual_cap", "step_deviation"}
_BOOL_KEYS = {"debug_asserts", "figures"}
_STR_KEYS = {"problem", "algorithm", "schedule", "graph", "out"}
_ALGORITHMS = ("dlpds", "dppds", "primal_only", "centralized")


def _parse_bool(raw):
    token = raw.strip().lower()
    if token in ("true", "yes", "on", "1"):
        return True
    if token in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def parse_config(text):
    """Parse key=value lines into an ExperimentConfig.

    Blank lines and # comments are skipped. Every problem is reported, not
    just the first: unknown keys, unparsable values, bad algorithm names.
    """
    values = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key=value, got {raw.strip()!r}")
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _BOOL_KEYS:
                values[key] = _parse_bool(value)
            elif key in _STR_KEYS:
                values[key] = value
            elif key == "mu_tilde":
                values[key] = np.array([float(t) for t in value.split(",")])
            else:
                errors.append(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            errors.append(f"line {lineno}: bad value for {key!r}: {exc}")
    if "algorithm" in values and values["algorithm"] not in _ALGORITHMS:
        errors.append(
            f"unknown algorithm {values['algorithm']!r}; "
            f"choose one of {', '.join(_ALGORITHMS)}"
        )
    if "graph" in values and values["graph"] not in GENERATORS:
        errors.append(
            f"unknown graph {values['graph']!r}; "
            f"choose one of {', '.join(sorted(GENERATORS))}"
        )
    if errors:
        raise ValueError("config problems:\n  " + "\n  ".join(errors))
    return ExperimentConfig(**values)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


@dataclass
class ExperimentResult:
    """A finished (or validated) run with everything used to produce it."""

    config: ExperimentConfig
    problem: object
    graph: object
    schedule: object
    graph_reports: list
    schedule_report: object
    trace: object = None

    @property
    def ok(self):
        return (all(r.ok for r in self.graph_reports)
                and self.schedule_report.ok)

    def validation_lines(self):
        lines = [r.summary() for r in self.graph_reports]
        lines.append(self.schedule_report.summary())
        return lines


def _build_graph(config, n_agents):
    builder = GENERATORS[config.graph]
    kwargs = {"seed": config.seed}
    if "weight_floor" in inspect.signature(builder).parameters:
        kwargs["weight_floor"] = config.weight_floor
    G = builder(n_agents, **kwargs)
    if config.graph_window is not None:
        if config.graph_window < 1:
            raise ValueError("graph_window must be a positive round count")
        G = dataclasses.replace(G, window=config.graph_window)
    return G


def _validation_horizon(config, G):
    # the Lagrangian solver consumes (N-1)*B extra graph rounds for the
    # bound protocol before its main loop, so validate those too
    horizon = config.rounds
    if config.algorithm == "dlpds":
        horizon += (G.n_agents - 1) * G.window
    return max(horizon, G.window)


def validate_experiment(config, base_dir=None):
    """Build everything a run would use and check the standing assumptions.

    Returns an ExperimentResult without a trace; ``ok`` says whether a run
    may proceed. The schedule report is the penalty one for the penalty
    solver and the classic diminishing one otherwise.
    """
    problem = build_named_problem(config.problem, base_dir)
    base = parse_schedule(config.schedule)
    if not 0.0 < config.step_deviation <= 1.0:
        raise ValueError("step_deviation must lie in (0, 1]")
    schedule = base
    if config.step_deviation < 1.0:
        if config.algorithm == "centralized":
            raise ValueError("per-agent step factors do not apply to the "
                             "centralized baseline")
        schedule = per_agent_schedule(base, problem.n_agents, config.rounds,
                                      config.step_deviation, config.seed)
    if config.algorithm == "centralized":
        # the pooled baseline never communicates, so no graph to check
        G, graph_reports = None, []
    else:
        G = _build_graph(config, problem.n_agents)
        graph_reports = validate_graph_sequence(G, _validation_horizon(config, G))
    cond_horizon = max(config.rounds, 1024)
    if config.algorithm == "dppds" or (config.algorithm == "centralized"
                                       and problem.n_equality):
        schedule_report = validate_penalty_step_conditions(base, cond_horizon)
    else:
        schedule_report = validate_diminishing_conditions(base, cond_horizon)
    return ExperimentResult(config=config, problem=problem, graph=G,
                            schedule=schedule, graph_reports=graph_reports,
                            schedule_report=schedule_report)


def run_experiment(config, base_dir=None):
    """Validate, dispatch and run one experiment; returns the full result.

    Raises instead of running when a graph validator reports violations or
    the schedule verdict is FAIL.
    """
    result = validate_experiment(config, base_dir)
    bad = [r.summary() for r in result.graph_reports if not r.ok]
    if bad:
        raise ValueError("graph sequence fails its assumptions:\n  "
                         + "\n  ".join(bad))
    if result.schedule_report.verdict == FAIL:
        raise ValueError("step schedule fails its conditions:\n"
                         + result.schedule_report.summary())
    problem, G, schedule = result.problem, result.graph, result.schedule
    common = dict(record_every=config.record_every,
                  early_stop=config.early_stop, seed=config.seed)
    if config.algorithm == "dlpds":
        bound_config = DualBoundConfig(margin=config.slater_margin,
                                       mu_tilde=config.mu_tilde,
                                       budget=config.bound_budget,
                                       theta=config.theta, seed=config.seed)
        trace = run_dlpds(problem, G, schedule, config.rounds,
                          bound_config=bound_config,
                          debug_asserts=config.debug_asserts,
                          probe_count=config.probe_count, **common)
    elif config.algorithm == "dppds":
        trace = run_dppds(problem, G, schedule, config.rounds,
                          debug_asserts=config.debug_asserts,
                          probe_count=config.probe_count,
                          dual_cap=config.dual_cap, **common)
    elif config.algorithm == "primal_only":
        trace = run_primal_only(problem, G, schedule, config.rounds,
                                debug_asserts=config.debug_asserts,
                                probe_count=config.probe_count, **common)
    else:
        bound_config = DualBoundConfig(margin=config.slater_margin,
                                       mu_tilde=config.mu_tilde,
                                       budget=config.bound_budget,
                                       theta=config.theta, seed=config.seed)
        trace = centralized_subgradient(problem, schedule, config.rounds,
                                        bound_config=bound_config,
                                        dual_cap=config.dual_cap, **common)
    return dataclasses.replace(result, trace=trace)


# ---------------------------------------------------------------------------
# delimited output
# ---------------------------------------------------------------------------

def _fmt(value):
    return format(float(value), ".12g")


def csv_header(trace, problem):
    """Column names for a trace; a pure function of the shapes involved."""
    cols = ["k", "agent"]
    cols += [f"x{j}" for j in range(trace.n)]
    cols += [f"mu{j}" for j in range(trace.n_inequality)]
    cols += [f"lambda{j}" for j in range(trace.n_equality)]
    cols.append("y")
    cols.append("delta_x")
    if trace.mu is not None:
        cols.append("delta_mu")
    if trace.lam is not None:
        cols.append("delta_lambda")
    if problem.n_inequality:
        cols.append("feas_g")
    if problem.n_equality:
        cols.append("feas_h")
    if trace.x_ref is not None:
        cols.append("dist_opt")
    if trace.p_ref is not None:
        cols.append("y_err")
    return cols


def render_csv(trace, problem):
    """The full CSV text for a trace: one row per (recorded round, agent).

    Values carry 12 significant digits; the per-round metric columns repeat
    on every agent row of that round. Row order is (round, agent), so equal
    traces serialize to identical bytes.
    """
    metrics = compute_metrics(trace, problem)
    metric_keys = [key for key in ("delta_x", "delta_mu", "delta_lambda",
                                   "feas_g", "feas_h", "dist_opt", "y_err")
                   if key in metrics]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_header(trace, problem))
    for r in range(trace.n_records):
        shared = [_fmt(metrics[key][r]) for key in metric_keys]
        for i in range(trace.n_agents):
            row = [str(int(trace.ks[r])), str(i)]
            row += [_fmt(v) for v in trace.x[r, i]]
            if trace.mu is not None:
                row += [_fmt(v) for v in trace.mu[r, i]]
            if trace.lam is not None:
                row += [_fmt(v) for v in trace.lam[r, i]]
            row.append(_fmt(trace.y[r, i]))
            row += shared
            writer.writerow(row)
    return buf.getvalue()


def emit_csv(trace, problem, path):
    """Write the trace as CSV; returns the path."""
    text = render_csv(trace, problem)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def summary_lines(result):
    """End-of-run report: validators first, then the trace summary."""
    lines = result.validation_lines()
    if result.trace is not None:
        lines.extend(summarize(result.trace, result.problem))
        meta = result.trace.meta
        if "bounds_rounds" in meta:
            lines.append(
                f"  dual bounds: {meta['bounds_rounds']} protocol rounds, "
                f"radius >= {meta['dual_radius_min']:.6g}"
            )
        if "stopped_at" in meta:
            lines.append(f"  early stop at round {meta['stopped_at']}")
    return lines

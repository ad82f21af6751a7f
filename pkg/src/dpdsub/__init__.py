"""Distributed primal-dual subgradient methods over time-varying networks.

A library plus simulator for multi-agent constrained convex optimization:
agents minimize a sum of private objectives under shared inequality and
equality constraints, communicating over a switching balanced digraph. Two
solvers are provided (a Lagrangian method with projected duals and a
penalty method with free duals), together with the graph and step-size
validators, the distributed dual-bound protocol, centralized baselines,
reference oracles and an experiment harness with a CSV/figure pipeline.
"""

from .baselines import (
    ReferenceSolution,
    centralized_dual_box,
    centralized_subgradient,
    reference_solve,
)
from .bounds import (
    DualBoundConfig,
    DualBox,
    SlaterMargin,
    build_dual_boxes,
    estimate_local_dual_value,
    local_bound_init,
)
from .consensus import dynamic_average_step, max_min_consensus_step
from .convex import (
    AffineMap,
    Box,
    Composite,
    ConvexFnOracle,
    EuclideanBall,
    LagrangianPieces,
    NonnegBall,
    NonnegOrthant,
    PenaltyPieces,
    ProjectableSet,
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
    project,
    quadratic_oracle,
)
from .dlpds import (
    DlpdsAgentState,
    MixedIntermediates,
    dlpds_round,
    mix,
    run_dlpds,
    run_primal_only,
)
from .dppds import DppdsAgentState, dppds_round, run_dppds
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    emit_csv,
    load_config,
    parse_config,
    run_experiment,
    validate_experiment,
)
from .network import (
    GraphSequence,
    ValidationReport,
    complete_sequence,
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
from .problems import (
    ProblemSpec,
    build_custom,
    build_named_problem,
    build_num_problem,
    build_quadratic_problem,
)
from .schedules import (
    PerAgentSchedules,
    StepConditionReport,
    StepSizeSchedule,
    parse_schedule,
    per_agent_schedule,
    validate_diminishing_conditions,
    validate_penalty_step_conditions,
)
from .trace import RunTrace, compute_metrics, rounds_to_tolerance, summarize

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "Box",
    "Composite",
    "ConvexFnOracle",
    "DlpdsAgentState",
    "DppdsAgentState",
    "DualBoundConfig",
    "DualBox",
    "EuclideanBall",
    "ExperimentConfig",
    "ExperimentResult",
    "GraphSequence",
    "LagrangianPieces",
    "MixedIntermediates",
    "NonnegBall",
    "NonnegOrthant",
    "PenaltyPieces",
    "PerAgentSchedules",
    "ProblemSpec",
    "ProjectableSet",
    "ReferenceSolution",
    "RunTrace",
    "SlaterMargin",
    "StepConditionReport",
    "StepSizeSchedule",
    "ValidationReport",
    "abs_map",
    "build_custom",
    "build_dual_boxes",
    "build_named_problem",
    "build_num_problem",
    "build_quadratic_problem",
    "centralized_dual_box",
    "centralized_subgradient",
    "complete_sequence",
    "compute_metrics",
    "dlpds_round",
    "dppds_round",
    "dynamic_average_step",
    "emit_csv",
    "estimate_local_dual_value",
    "identity_sequence",
    "lagrangian_dual_supgradient",
    "lagrangian_primal_subgradient",
    "lagrangian_value",
    "linear_oracle",
    "load_config",
    "local_bound_init",
    "max_min_consensus_step",
    "metropolis_sequence",
    "mix",
    "neg_sqrt_oracle",
    "parse_config",
    "parse_schedule",
    "penalty_primal_subgradient",
    "penalty_supgradient",
    "penalty_value",
    "per_agent_schedule",
    "plus_projection",
    "project",
    "quadratic_oracle",
    "random_connected_sequence",
    "reference_solve",
    "rotating_ring_sequence",
    "rounds_to_tolerance",
    "run_dlpds",
    "run_dppds",
    "run_experiment",
    "run_primal_only",
    "summarize",
    "validate_balanced",
    "validate_diminishing_conditions",
    "validate_experiment",
    "validate_graph_sequence",
    "validate_nondegeneracy",
    "validate_penalty_step_conditions",
    "validate_periodic_connectivity",
    "weights_at",
]

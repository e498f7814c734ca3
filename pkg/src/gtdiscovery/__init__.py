"""Group-testing device discovery for multi-cluster, energy-constrained networks."""

from .bounds import (
    BoundKind,
    BoundValue,
    alpha,
    evaluate_bound,
    exp_bound_fixed,
    exp_bound_random,
    gamma,
    min_probes_from_bound,
    union_bound_fixed,
    union_bound_random,
)
from .design import (
    ConstraintResidual,
    EnergyReport,
    constraint_residual_fixed,
    constraint_residual_random,
    energy_report,
    optimal_base_q,
    optimal_q,
    optimal_q_fixed,
    optimal_q_random,
)
from .engine import (
    ActivitySet,
    DecodeResult,
    GTMatrix,
    ResultsVector,
    comp_decode,
    generate_matrix,
    sample_activity,
    shadow_probability_fixed,
    simulate_probes,
)
from .model import (
    ClusterSpec,
    Fixed,
    NetworkConfig,
    PlanOrigin,
    Random,
    SamplingPlan,
    load_config,
    make_config,
    parse_config,
    sparsity_regime_check,
    validate_config,
)
from .montecarlo import (
    SuccessEstimate,
    SweepRecord,
    estimate_success,
    min_probes_for_target,
    run_trial,
    success_time,
    sweep_probes,
    sweep_q,
)

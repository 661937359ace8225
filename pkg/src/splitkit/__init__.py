"""Monotone operator splitting built on one geometric template.

Each named method embeds its problem in a product space and iterates relaxed
projections onto separating half-spaces; the modules factor that into
reusable layers:

- space:      vectors, product layouts, linear maps, subspaces
- operators:  operator specs, prox atoms, resolvent calculus
- geometry:   half-space cuts, the Fejer / strong outer loops, traces
- algorithms: classical splitting methods as engine configurations
- projective: (block, asynchronous) projective splitting
- problems:   seeded instances with planted solutions
- cli:        the ``splitkit`` command
"""

from .errors import (
    EmptyIntersectionError,
    OracleError,
    ParameterError,
    ScheduleError,
    SplitkitError,
)
from .space import LinOp, MetricKernel, SpaceLayout, Subspace, Vec, as_array
from .operators import (
    AffineMonotone,
    IndicatorAffine,
    IndicatorBall,
    IndicatorBox,
    IndicatorHalfspace,
    IndicatorSubspace,
    Inverse,
    L1Norm,
    LinearAtom,
    NormalConeSubspace,
    OperatorSpec,
    PartialInverse,
    ProductOperator,
    Prox,
    QuadraticAtom,
    Scaled,
    Skew,
    YosidaOperator,
    ZeroAtom,
    ZeroOperator,
    inverse_resolvent_eval,
    resolvent_eval,
    yosida_eval,
)
from .geometry import (
    CutReport,
    LoopConfig,
    RunTrace,
    TraceRow,
    graph_cut_halfspace,
    haugazeau_combine,
    outer_loop_run,
)
from .algorithms import (
    PrimalDualPair,
    Schedule,
    run_averaged_iteration,
    run_backward_backward,
    run_chambolle_pock,
    run_condat_vu,
    run_davis_yin,
    run_douglas_rachford,
    run_dual_forward_backward,
    run_dykstra,
    run_euler,
    run_fbhf,
    run_forward_backward,
    run_partial_inverse,
    run_partial_inverse_composite,
    run_partial_yosida,
    run_projected_landweber,
    run_proximal_point,
    run_resolvent_composition,
    run_tseng_fbf,
)
from .projective import (
    BlockSchedule,
    SaddleProblem,
    ScheduleEntry,
    make_block_schedule,
    parse_schedule,
    run_block_kt_projective,
    run_kt_projective,
    run_saddle_projective,
    schedule_to_text,
    validate_block_schedule,
)
from .problems import (
    OracleSolution,
    PROBLEM_KINDS,
    ProblemInstance,
    gen_problem,
    oracle_solve,
    residual_eval,
)

__version__ = "0.1.0"

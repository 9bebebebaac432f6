"""rbkit: redundancy-bottleneck curves for discrete source channels.

Builds problems from a target distribution plus per-source channels, traces
the prediction/compression tradeoff with an alternating-maximization solver,
decomposes both terms into per-source contributions, and cross-checks the
small-rate limit against exact Blackwell redundancy computed by vertex
enumeration.
"""

__version__ = "0.1.0"

from .probability import (
    CondDist,
    Dist,
    DomainError,
    JointTable,
    ShapeError,
    conditional_mutual_information,
    entropy,
    kl_divergence,
    mutual_information,
    specific_cmi_source,
    specific_cmi_target,
)
from .problem import (
    RBProblem,
    SourceChannel,
    SourceWeights,
    ValidationError,
    build_problem,
    merge_alphabets,
    problem_from_json,
    problem_to_json,
    rb_bounds,
    source_mutual_informations,
)
from .solver import (
    BottleneckChannel,
    IterationState,
    RBCurve,
    RBPoint,
    SolverConfig,
    ba_step,
    default_beta_grid,
    induced_joint,
    init_bottleneck,
    init_state,
    rb_at_rate,
    solve_lagrangian,
    sweep,
)
from .blackwell import (
    DeficiencyResult,
    ExactBlackwellResult,
    FeasiblePolytope,
    SizeError,
    build_polytope,
    deficiency,
    deficiency_bound_check,
    enumerate_vertices,
    exact_blackwell_redundancy,
)
from .analysis import (
    DecompositionRow,
    SourceCurve,
    build_report,
    decompose,
    per_source_curves,
    polyline_crossings,
)
from .gates import make_gate

__all__ = [name for name in dir() if not name.startswith("_")]

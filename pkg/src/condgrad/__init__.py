"""condgrad: projection-free finite-sum optimization with oracle accounting.

The package splits along the algorithm's seams: problems (finite-sum data
families and file formats), oracles (counted gradient / value / estimate
access), lmo (feasible regions and linear minimization), condg (the prox
subsolver), solvers (the sliding method and baselines), and harness
(configs, reference optima, experiment output). The cli module exposes the
condgrad command.
"""

__version__ = "0.1.0"

from .condg import (  # noqa: F401
    CondGBudgetError,
    CondGResult,
    QuadSubproblem,
    condg_solve,
    fw_gap,
    grad_h,
    linesearch_beta,
)
from .lmo import (  # noqa: F401
    Box,
    L1Ball,
    NuclearBall,
    PowerIterConfig,
    PowerIterationError,
    contains,
    diameter,
    lmo,
)
from .oracles import (  # noqa: F401
    OracleCounters,
    SmoothingConfig,
    coord_estimate,
    default_smoothing,
    full_coord_estimate,
    full_gradient,
    gradient_query,
    value_query,
)
from .problems import (  # noqa: F401
    CustomProblem,
    LabeledExample,
    LibsvmParseError,
    LogisticProblem,
    MatrixCompletionData,
    MatrixCompletionProblem,
    QuadraticProblem,
    make_mask,
    parse_libsvm,
    serialize_libsvm,
)
from .records import MetricRow, RunRecord  # noqa: F401
from .solvers import (  # noqa: F401
    CgsOptions,
    EpochSchedule,
    RunOptions,
    ScgsOptions,
    SolverState,
    StorcOptions,
    arcs_run,
    cg_run,
    cgs_run,
    schedule_convex,
    schedule_strongly_convex,
    scgs_run,
    storc_run,
)

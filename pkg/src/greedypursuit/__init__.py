"""Greedy optimization over finite atom sets.

Matching pursuit, orthogonal MP, Frank-Wolfe and their norm-corrective and
affine-invariant variants, plus the geometric constants (directional widths,
coherence, curvature) that govern their convergence and a harness that checks
the resulting rate bounds numerically.
"""

from .atoms import AtomSet, HalfDictionary, l1_vertices, random_unit_sphere, scale, simplex_vertices, symmetrize, theta_pair
from .errors import (
    ConvergenceError,
    DegenerateAtomError,
    DomainError,
    GapSignError,
    GreedyError,
    SchemaError,
    UnsupportedError,
)
from .geometry import (
    GeometryReport,
    RateBound,
    atomic_norm,
    cumulative_coherence,
    curvature_Cf,
    curvature_CfMP,
    directional_width,
    effective_inradius,
    mdw,
    rate_bound,
    strong_convexity_muFMP,
)
from .harness import ExperimentReport, check_envelope, run_appendix_a, run_corollary2, run_fw_to_mp
from .lmo import LmoConfig, LmoResult, lmo_approx_fw, lmo_approx_mp, lmo_exact, measure_delta
from .objectives import LeastSquares, LogSumExp, QuadraticObjective, SmoothObjective, linearization_gap, surrogate
from .solvers import (
    ActiveSet,
    SolverSpec,
    StepRecord,
    Trace,
    affine_fw_step,
    affine_gmp_step,
    atom_correction,
    fw_step,
    gmp_step,
    mp_step,
    ncfw_step,
    omp_step,
    run,
)
from .subproblems import golden_section, least_squares_over_span, project_onto_convex_hull, project_simplex

__version__ = "0.1.0"

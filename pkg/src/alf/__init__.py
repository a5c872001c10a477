"""Numerical laboratory for absolute Laplacian flows.

Graph-coupled nonlinear diffusion systems x' = -L F(x) + eps H(x): exact
graph/Laplacian algebra, polynomial response functions, slow-fast reduction
to the (x, k)-plane, transcritical singularity classification with canard
verdicts, symmetry certificates, and precision-configurable integration.
"""

from .dynamics import (
    IntegratorConfig,
    Perturbation,
    PerturbedSystem,
    StandardFormSystem,
    Trajectory,
    integrate,
    is_regular_perturbation,
    to_standard_form,
    vector_field,
)
from .errors import (
    AlfError,
    ConfigError,
    ContinuationFailedError,
    DimensionMismatchError,
    DivergenceError,
    GroupEnumerationCapError,
    IntegrationStalledError,
    InvalidGraphError,
    PreconditionError,
    SymmetryViolationError,
    UnsupportedStructureError,
    UnsupportedSymmetryError,
)
from .graph import (
    Graph,
    Permutation,
    build_complete,
    commutes_with_laplacian,
    connected_components,
    laplacian,
    laplacian_eigenvalues,
    zero_eigenvalue_count,
)
from .precision import ScalarContext, exact
from .prng import SplitMix64
from .response import (
    ResponseField,
    ResponseFunction,
    derivative,
    eval_response,
    gauge_shift,
    is_even,
)
from .slowfast import (
    ManifoldPoint,
    ManifoldSample,
    PlaneSystem,
    SingularityReport,
    analyze_singularity,
    consensus_stability,
    find_singular_points,
    flow_stability_probe,
    is_critical_perturbation,
    plane_reduce,
    sample_manifold,
    slow_divergence_exact,
    slow_divergence_integral,
    tangent_slope_estimate,
)
from .symmetry import (
    CanardCertificate,
    FixedPointSpace,
    PermutationGroup,
    check_equivariance,
    fixed_point_space,
    maximal_canard_certificate,
    symmetry_generated_equilibria,
)

__version__ = "0.1.0"

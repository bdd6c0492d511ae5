"""Rotational symmetry analysis for free spectrahedra and free polynomials.

The toolkit evaluates monic and homogeneous matrix pencils on matrix
tuples, decides membership in free spectrahedra, reduces coefficient
tuples to minimal defining form, classifies circular and free circular
spectrahedra with their canonical superdiagonal and corner coordinates,
certifies spectrahedral inclusion through completely positive maps,
constructs separating pencils at boundary points, and tests free matrix
polynomials for invariance under per-coordinate unitary conjugation.
"""

from .ball_classifier import (
    BallEnvelope,
    FreeCircularClassification,
    PencilBallForm,
    build_envelope,
    classify_free_circular,
    detect_pencil_ball,
)
from .circular_classifier import (
    CircularClassification,
    GradingCertificate,
    SuperdiagonalForm,
    classify_circular,
    rotation_spot_check,
    solve_grading,
    superdiagonal_form,
)
from .errors import FreespecError
from .freepoly import (
    FreeMatrixPolynomial,
    InvarianceVerdict,
    Letter,
    Word,
    adjoint,
    conjugate_coordinates,
    cross_term_split,
    eval_poly,
    invariance_test,
    multiply,
)
from .generators import GeneratorSpec, generate
from .inclusion_sdp import InclusionVerdict, SdpProblem, includes, solve_feasibility
from .pencil_core import (
    DEFAULT_TOL,
    DetailedBoundaryPoint,
    HomogeneousPencil,
    MatrixTuple,
    MembershipReport,
    MonicPencil,
    Tolerance,
    canonical_shuffle,
    eval_homogeneous,
    eval_monic,
    membership,
    pencil_ball_norm,
)
from .separation import SeparationCertificate, bilinear_B, boundary_functional, separate, solve_T
from .tuple_algebra import (
    BlockDecomposition,
    MinimalityCertificate,
    commutant_basis,
    irreducible_blocks,
    minimize_pencil,
    unitarily_equivalent,
)

__version__ = "0.1.0"

__all__ = [
    "BallEnvelope",
    "BlockDecomposition",
    "CircularClassification",
    "DEFAULT_TOL",
    "DetailedBoundaryPoint",
    "FreeCircularClassification",
    "FreeMatrixPolynomial",
    "FreespecError",
    "GeneratorSpec",
    "GradingCertificate",
    "HomogeneousPencil",
    "InclusionVerdict",
    "InvarianceVerdict",
    "Letter",
    "MatrixTuple",
    "MembershipReport",
    "MinimalityCertificate",
    "MonicPencil",
    "PencilBallForm",
    "SdpProblem",
    "SeparationCertificate",
    "SuperdiagonalForm",
    "Tolerance",
    "Word",
    "adjoint",
    "bilinear_B",
    "boundary_functional",
    "build_envelope",
    "canonical_shuffle",
    "classify_circular",
    "classify_free_circular",
    "commutant_basis",
    "conjugate_coordinates",
    "cross_term_split",
    "detect_pencil_ball",
    "eval_homogeneous",
    "eval_monic",
    "eval_poly",
    "generate",
    "includes",
    "invariance_test",
    "irreducible_blocks",
    "membership",
    "minimize_pencil",
    "multiply",
    "pencil_ball_norm",
    "rotation_spot_check",
    "separate",
    "solve_T",
    "solve_feasibility",
    "solve_grading",
    "superdiagonal_form",
    "unitarily_equivalent",
]

"""Exception types shared across the toolkit."""


class FreespecError(Exception):
    """Base class for all toolkit errors."""


class ShapeMismatch(FreespecError, ValueError):
    """Operands have incompatible variable counts or matrix sizes."""


class EigensolverFailure(FreespecError):
    """An eigensolver did not converge; never silently mapped to a verdict."""


class DegenerateSplit(FreespecError):
    """Eigenvalue clustering of a random commutant element stayed ambiguous."""


class Indeterminate(FreespecError):
    """A decision procedure could neither confirm nor refute at tolerance."""


class IterationLimit(FreespecError):
    """The feasibility solver hit its iteration cap without a verdict."""


class AmbiguousLevels(FreespecError):
    """Grading eigenvalues do not round cleanly to integer levels."""


class NotSuperdiagonal(FreespecError):
    """A grading certificate is inconsistent with the tuple it claims to grade."""


class RankAmbiguity(FreespecError):
    """Singular values straddle the rank tolerance band."""


class NoCertificate(FreespecError):
    """The separation feasibility problem was infeasible at tolerance."""


class NormDefect(FreespecError):
    """A separating pencil misses norm one at its boundary point."""


class NotBoundary(FreespecError):
    """A claimed detailed-boundary point failed verification."""


class Unbounded(FreespecError):
    """A boundary search ray left the scale cap without exiting the set."""


class InternalInconsistency(FreespecError):
    """A structural stage passed but the consequence it guarantees failed."""


class PolynomialCapExceeded(FreespecError, ValueError):
    """A free matrix polynomial exceeds the degree or term caps."""


class InputError(FreespecError, ValueError):
    """Malformed external input (JSON or CLI arguments)."""

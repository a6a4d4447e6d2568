"""Exception types shared across the package."""


class PptlabError(Exception):
    """Base class for all package-specific errors."""


class NotHermitian(PptlabError):
    """A matrix expected to be Hermitian is not, exactly."""


class NotPsd(PptlabError):
    """A matrix expected to be positive semidefinite is not, exactly."""


class NotPPT(PptlabError):
    """A state expected to have a positive partial transpose does not."""


class RangeViolation(PptlabError):
    """A vector or operator falls outside the required range."""


class DimensionMismatch(PptlabError):
    """Operands live in incompatible spaces."""


class BoundsViolation(PptlabError):
    """An index or grid site lies outside the allowed bounds."""


class PreconditionViolation(PptlabError):
    """A documented precondition failed; the message names the condition."""


class PPTFailure(PptlabError):
    """An extension that should be PPT failed the exact post-check."""


class DecompositionMismatch(PptlabError):
    """A claimed conic decomposition does not reproduce its target."""


class WitnessNotInRange(PptlabError):
    """The certification witness vector is not in the state's range."""


class NonSingleVariableOverlap(PptlabError):
    """The witness overlap is not a single-variable monomial."""


class NonOrthogonalBasis(PptlabError):
    """An orthogonal range basis was demanded but not available."""


class InvalidK(PptlabError):
    """Family parameter k is out of range."""


class ConvergenceFailure(PptlabError):
    """An iterative numerical method did not reach its tolerance."""


class RankAmbiguity(PptlabError):
    """Floating-point rank decision is ambiguous near the tolerance."""

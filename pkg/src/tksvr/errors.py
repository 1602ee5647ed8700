"""Exception hierarchy shared by all tksvr modules."""


class TksvrError(Exception):
    """Base class for all tksvr errors."""


class DomainViolation(TksvrError):
    """A point lies outside (or too close to the boundary of) the kernel's
    convergence region."""


class NonConvergent(TksvrError):
    """Truncated series evaluation failed to meet its tail bound within the
    term cap."""


class ZeroDiagonal(TksvrError):
    """Kernel normalization requested at a point with non-positive diagonal
    value."""


class CombinatorialOverflow(TksvrError):
    """A multi-index enumeration would exceed the configured size cap."""


class DimensionMismatch(TksvrError):
    """Vector length does not match the problem dimension."""


class NotDifferentiable(TksvrError):
    """Derivative requested at a kink of a non-smooth function."""


class InfeasiblePoint(TksvrError):
    """Dual vector violates the loss's effective-domain constraints."""


class InfeasibleConfig(TksvrError):
    """Requested problem configuration is unsupported (e.g. eps-insensitive
    loss with an offset)."""


class TruncationTooCoarse(TksvrError):
    """Explicit feature-map truncation does not meet the recorded tail-mass
    bound."""


class GridTooCoarse(TksvrError):
    """Brute-force grid search failed its local-refinement sanity check."""


class SchemaVersionMismatch(TksvrError):
    """Model file has an unknown version or violates a schema invariant."""


class CorruptPayload(TksvrError):
    """Model file is structurally inconsistent."""

"""Exception types shared across the library."""


class DistortionLabError(Exception):
    """Base class for all library-specific failures."""


class NotFoundWithinRadius(DistortionLabError):
    """Breadth-first search exhausted the requested radius without a hit."""

    def __init__(self, radius, message=""):
        self.radius = radius
        super().__init__(message or f"element not found within radius {radius}")


class OracleInconsistent(DistortionLabError):
    """Canonical keys collided for elements the equality test distinguishes."""


class TorsionDetected(DistortionLabError):
    def __init__(self, order, message=""):
        self.order = order
        super().__init__(message or f"element has finite order {order}")


class DefectViolated(DistortionLabError):
    """A sampled pair violated the declared quasi-morphism defect bound."""


class EntryFailed(DistortionLabError):
    def __init__(self, index, diagnostics=""):
        self.index = index
        super().__init__(f"certificate entry {index} failed: {diagnostics}")


class SingularMatrix(DistortionLabError):
    pass


class NotUnimodular(DistortionLabError):
    pass


class AxiomViolated(DistortionLabError):
    """A sampled counterexample to a length-function axiom."""

    def __init__(self, axiom, witness=None):
        self.axiom = axiom
        self.witness = witness
        super().__init__(f"length-function axiom violated: {axiom}")


class ChartOverflow(DistortionLabError):
    """Internal chart bookkeeping produced a non-finite value (a bug)."""


class IncompatibleTails(DistortionLabError):
    pass


class ShapeViolation(DistortionLabError):
    """Coefficient map does not have the required one-sided shape."""


class TailNotDecaying(DistortionLabError):
    pass


class PrecisionExhausted(DistortionLabError):
    pass


class IdentityResidualExceeded(DistortionLabError):
    def __init__(self, residual, bound):
        self.residual = residual
        self.bound = bound
        super().__init__(f"profile identity residual {residual:.3e} exceeds {bound:.3e}")


class ContinuityGap(DistortionLabError):
    def __init__(self, gap, bound):
        self.gap = gap
        self.bound = bound
        super().__init__(f"seam continuity gap {gap:.3e} exceeds {bound:.3e}")


class AngleTooLarge(DistortionLabError):
    pass


class SupportViolation(DistortionLabError):
    pass


class CoverTooTight(DistortionLabError):
    pass


class VerificationFailed(DistortionLabError):
    def __init__(self, point, error, message=""):
        self.point = point
        self.error = error
        super().__init__(message or f"verification failed at {point!r} with error {error:.3e}")


class UnverifiedCertificate(DistortionLabError):
    pass


class ConfigError(DistortionLabError):
    pass

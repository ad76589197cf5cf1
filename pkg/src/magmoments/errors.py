"""Exception types shared across the library."""


class MagnitudeError(Exception):
    """Base class for all library errors."""


class NonFinite(MagnitudeError):
    """A coordinate or derived value is NaN or infinite."""


class DuplicatePoints(MagnitudeError):
    """Two points coincide within the duplicate tolerance.

    Duplicate points make the similarity matrix numerically singular, so
    they are rejected instead of silently deduplicated.
    """


class FactorizationFailure(MagnitudeError):
    """Cholesky factorization of a similarity (sub)matrix broke down."""


class NonRepresentable(MagnitudeError):
    """A value cannot be mapped through log(1 + x) because x <= -1."""


class OverlapAmbiguity(MagnitudeError):
    """Points of two clouds nearly coincide but are not exactly equal."""


class QuadratureDivergence(MagnitudeError):
    """Doubling the quadrature order changed the result beyond tolerance."""


class DegenerateInput(MagnitudeError):
    """Input points are affinely dependent where full dimension is required."""


class InvalidSpec(MagnitudeError):
    """A dataset or experiment specification is malformed."""

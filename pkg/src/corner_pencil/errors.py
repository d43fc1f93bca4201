"""Exception types shared across the package."""


class CornerPencilError(Exception):
    """Base class for all domain errors raised by this package."""


class ConfigError(CornerPencilError):
    """Invalid problem description that fits no more specific category."""


class AngleOutOfRange(ConfigError):
    """A half-opening angle lies outside the open interval (0, pi)."""


class MissingIdentityTerm(ConfigError):
    """The leading term of a side is not the identity trace term."""


class ImageOutsideTargetAngle(ConfigError):
    """A transformed side ray does not land strictly inside its target angle."""

    def __init__(self, j, sigma, k, s, image_angle, target_half_opening):
        self.j = j
        self.sigma = sigma
        self.k = k
        self.s = s
        self.image_angle = image_angle
        self.target_half_opening = target_half_opening
        super().__init__(
            f"term (j={j}, sigma={sigma}, k={k}, s={s}): "
            f"|{image_angle:.12g}| < {target_half_opening:.12g} violated"
        )


class NonElliptic(ConfigError):
    """A principal-part coefficient matrix admits a real characteristic zero."""


class NonpositiveHomothety(ConfigError):
    """A scaling factor of a point transformation is not positive."""


class BadGridSize(CornerPencilError):
    """Collocation grid size must be even and at least 8."""


class ExactSingular(CornerPencilError):
    """The assembled matrix is numerically exactly singular."""


class ContourTooCloseToZero(CornerPencilError):
    """A counting contour could not be separated from a determinant zero."""


class NotAnEigenvalue(CornerPencilError):
    """No numerical null space at the queried spectral parameter."""


class InsufficientSamples(CornerPencilError):
    """A sampled trace does not carry enough graded-mesh points."""


class MismatchedDomains(CornerPencilError):
    """Traces entering one consistency check live on different meshes."""


class MissingEvidence(CornerPencilError):
    """The decision tree reached a branch that needs absent tangential data."""


class SamplesTooCloseToVertex(CornerPencilError):
    """A residual sample radius is too small for the finite-difference step."""


class QuadratureNotConverged(CornerPencilError):
    """An annulus quadrature failed its refinement self-check."""

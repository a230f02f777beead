"""Exception types raised by the geometry, flow and rounding code.

Every error carries a short kebab-case ``name`` so the command line front end
can report it on stderr without exposing a traceback.
"""


class GeometryError(Exception):
    name = "geometry-error"


class RadiusTooLargeError(GeometryError):
    name = "radius-too-large"


class DegenerateSpacingError(GeometryError):
    name = "degenerate-spacing"


class NonContractibleError(GeometryError):
    name = "non-contractible"


class SelfIntersectionError(GeometryError):
    name = "self-intersection"


class UnboundedRegionError(GeometryError):
    name = "unbounded-region"


class SpacingTooCoarseError(GeometryError):
    name = "spacing-too-coarse"


class NotNestedError(GeometryError):
    name = "not-nested"


class NoTouchError(GeometryError):
    name = "no-touch"


class LengthMismatchError(GeometryError):
    name = "length-mismatch"


class BlowUpError(GeometryError):
    name = "blow-up"


class AngleTooLargeError(GeometryError):
    name = "angle-too-large"


class EpsilonTooLargeError(GeometryError):
    name = "epsilon-too-large"


class CertificationError(GeometryError):
    name = "certification-failure"


class InfeasibleCError(GeometryError):
    name = "infeasible-c"


class InsufficientHistoryError(GeometryError):
    name = "insufficient-history"

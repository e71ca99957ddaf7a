"""Exception hierarchy for isospec."""

from __future__ import annotations

__all__ = [
    "IsospecError",
    "NonHyperbolic",
    "BadSpectrum",
    "PreconditionViolated",
    "BadTarget",
    "QuadratureNonConvergent",
    "DegenerateOverlay",
    "TraceFailed",
    "CertificateExceeded",
    "NonSimpleLoop",
    "Overflow",
    "PolygonOpFailed",
    "RegressionIllConditioned",
    "EmptyDataset",
    "VerdictFail",
]


class IsospecError(Exception):
    """Base class for all library errors."""


class NonHyperbolic(IsospecError):
    """The matrix does not have two distinct real eigenvalues."""


class BadSpectrum(IsospecError):
    """Eigenvalues fail lambda > 1 > mu > 0 with determinant >= 2."""


class PreconditionViolated(IsospecError, ValueError):
    pass


class BadTarget(IsospecError, ValueError):
    """Target exponent or tolerance outside the admissible range."""


class QuadratureNonConvergent(IsospecError):
    pass


class DegenerateOverlay(IsospecError):
    pass


class TraceFailed(IsospecError):
    """No connecting path through the arrangement inside the clipping window."""


class CertificateExceeded(IsospecError):
    """A traced line projects more than k-to-one onto its axis."""


class NonSimpleLoop(IsospecError):
    pass


class Overflow(IsospecError):
    pass


class PolygonOpFailed(IsospecError):
    pass


class RegressionIllConditioned(IsospecError):
    pass


class EmptyDataset(IsospecError):
    pass


class VerdictFail(IsospecError):
    """An inequality that should hold was violated.

    ``lhs`` and ``rhs`` carry the two sides of ``lhs <= rhs``.
    """

    def __init__(self, name: str, lhs: float, rhs: float) -> None:
        super().__init__(f"{name}: {lhs!r} > {rhs!r}")
        self.name = name
        self.lhs = lhs
        self.rhs = rhs

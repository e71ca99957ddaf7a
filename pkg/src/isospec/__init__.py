"""Two-dimensional Dehn-function exponents of ascending HNN extensions ``G_A`` of ``Z^2``.

The package computes the exponent ``alpha = 2 + log_lambda(mu)`` of a monodromy
matrix, synthesizes matrices for a target exponent, builds the extremal
regions of the model space and checks the inequalities that pin the
exponent down, and samples the resulting isoperimetric spectra.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .exponents import (  # noqa: E402
    EigenPair,
    IntMatrix2,
    QuadraticInteger,
    SynthesisCertificate,
    companion_matrix,
    eigen_data,
    exponent_of,
    suspension_exponent,
    suspension_recurrence,
    synthesize_matrix,
)
from .geometry import ModelGeometry, build_geometry  # noqa: E402

__all__ = [
    "__version__",
    "EigenPair",
    "IntMatrix2",
    "QuadraticInteger",
    "SynthesisCertificate",
    "companion_matrix",
    "eigen_data",
    "exponent_of",
    "suspension_exponent",
    "suspension_recurrence",
    "synthesize_matrix",
    "ModelGeometry",
    "build_geometry",
]

"""Exact fermionic and numerical bosonic P-representations."""

__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
from .grassmann import GeneratorRegistry, GrassmannPoly  # noqa: E402
from .kernel import GradedKernel, kernel_multiply  # noqa: E402
from .fermion import (  # noqa: E402
    CorrelationQuery,
    PRepresentation,
    compute_p,
    compute_phi,
    convert,
    reconstruct,
)

__all__ = [
    "BACKEND",
    "CorrelationQuery",
    "GeneratorRegistry",
    "GradedKernel",
    "GrassmannPoly",
    "PRepresentation",
    "compute_p",
    "compute_phi",
    "convert",
    "kernel_multiply",
    "reconstruct",
]

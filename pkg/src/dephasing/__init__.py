"""Capacities of bosonic dephasing channels.

Closed-form capacities for wrapped normal, von Mises and wrapped Cauchy phase
noise, finite-dimensional Toeplitz approximants that converge to them, and a
truncated Fock-space simulator of the teleportation-simulation argument.
"""

__version__ = "0.1.0"

from .capacity import (
    CapacityReport,
    capacity_exact,
    capacity_von_mises,
    capacity_wn_approx,
    capacity_wrapped_cauchy,
    capacity_wrapped_normal,
    coherent_info_rate,
    convergence_report,
    lossy_dephasing_ub,
    renyi_ub_finite,
)
from .circular import (
    DivergenceValue,
    Product,
    Tabulated,
    Uniform,
    VonMises,
    WrappedCauchy,
    WrappedNormal,
    differential_entropy,
    fourier_coeff,
    kl_to_uniform,
    pdf,
    renyi_to_uniform,
)
from .toeplitz import SpectralResult, ToeplitzTruncation, build_truncation, eigvals_hermitian

__all__ = [
    "CapacityReport",
    "DivergenceValue",
    "Product",
    "SpectralResult",
    "Tabulated",
    "ToeplitzTruncation",
    "Uniform",
    "VonMises",
    "WrappedCauchy",
    "WrappedNormal",
    "build_truncation",
    "capacity_exact",
    "capacity_von_mises",
    "capacity_wn_approx",
    "capacity_wrapped_cauchy",
    "capacity_wrapped_normal",
    "coherent_info_rate",
    "convergence_report",
    "differential_entropy",
    "eigvals_hermitian",
    "fourier_coeff",
    "kl_to_uniform",
    "lossy_dephasing_ub",
    "pdf",
    "renyi_to_uniform",
    "renyi_ub_finite",
]

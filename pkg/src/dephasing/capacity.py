"""Capacities of dephasing channels and their finite-dimensional approximants.

All rates are in bits per channel use.  The capacity of the channel with
phase density ``p`` is ``D(p || u)``; :func:`coherent_info_rate` gives
achievable rates from truncations and :func:`renyi_ub_finite` gives a
finite-dimensional Renyi functional whose large-``d`` limit is ``D_alpha(p || u)``.
The latter is *not* a bound on the capacity at any fixed ``d``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .circular import (
    LN2,
    WN_SERIES_MIN_GAMMA,
    CircularDensity,
    Product,
    Uniform,
    VonMises,
    WrappedCauchy,
    WrappedNormal,
    _positive,
    kl_to_uniform,
    renyi_to_uniform,
    wn_alternating_sum,
)
from .errors import DivergentEntropyError, DomainError, InvariantViolation
from .specfun import DEFAULT_CONTROL, SeriesControl, bessel_ratios, log_bessel_i0, log_euler_phi
from .toeplitz import DEFAULT_CAP, ToeplitzTruncation, build_truncation, szego_functional

DEFAULT_ALPHAS = (1.1, 1.5, 2.0, 3.0)
DEFAULT_D_GRID = tuple(2**j for j in range(1, 10))


class DivergentCapacityWarning(RuntimeWarning):
    """Emitted when a capacity is reported as the +inf sentinel."""


def _nonneg(value: float) -> float:
    # roundoff below zero on exactly-zero quantities
    return 0.0 if -1e-12 < value < 0 else value


def coherent_info_rate(trunc: ToeplitzTruncation) -> float:
    """``(1/D) Tr T log2 T``: coherent information of the maximally mixed input on ``D`` levels."""
    return _nonneg(szego_functional(trunc, "xlog2x"))


def renyi_ub_finite(trunc: ToeplitzTruncation, alpha: float) -> float:
    """``log2((1/D) Tr T^alpha) / (alpha - 1)``.

    This converges to ``D_alpha(p || u)`` as the truncation grows; at small
    sizes it may lie below the capacity.
    """
    if not alpha > 1:
        raise DomainError(f"alpha must exceed 1, got {alpha}")
    return _nonneg(math.log2(szego_functional(trunc, ("power", alpha))) / (alpha - 1))


def capacity_exact(density: CircularDensity, method: str = "auto") -> float:
    """``D(p || u)``; ``+inf`` (with a warning) when the entropy is numerically divergent."""
    try:
        return kl_to_uniform(density, method).value
    except DivergentEntropyError as exc:
        warnings.warn(
            f"capacity reported as +inf: {exc}. The capacity formula assumes some Renyi "
            "divergence D_alpha(p||u), alpha > 1, is finite; that condition could not be confirmed.",
            DivergentCapacityWarning,
            stacklevel=2,
        )
        return math.inf


def capacity_wrapped_normal(gamma: float, control: SeriesControl = DEFAULT_CONTROL) -> float:
    """Capacity for the wrapped normal density of variance ``gamma``.

    Uses the Euler-function series for ``gamma >= 0.02`` and quadrature of
    the entropy below it, where ``1 - exp(-k gamma)`` loses accuracy.
    """
    gamma = _positive("gamma", gamma)
    if gamma < WN_SERIES_MIN_GAMMA:
        return capacity_exact(WrappedNormal(gamma), method="quadrature")
    return log_euler_phi(math.exp(-gamma), control) / LN2 + 2 / LN2 * wn_alternating_sum(gamma, control)


def capacity_wn_approx(gamma: float) -> float:
    """Two-branch elementary approximation to :func:`capacity_wrapped_normal`."""
    gamma = _positive("gamma", gamma)
    small = 0.5 * math.log2(2 * math.pi / (math.e * gamma))
    q = math.exp(-gamma)
    large = 2 / LN2 * q - math.log2(1 + q)
    return max(small, large)


def capacity_von_mises(lam: float) -> float:
    """Capacity for the von Mises density with concentration ``1/lam``."""
    lam = _positive("lambda", lam)
    x = 1 / lam
    if not math.isfinite(x):
        raise OverflowError(f"1/lambda overflows for lambda={lam}")
    r1 = float(bessel_ratios(1, x)[1])
    return _nonneg((x * r1 - log_bessel_i0(x)) / LN2)


def capacity_wrapped_cauchy(kappa: float) -> float:
    """Capacity for the wrapped Cauchy density, ``-log2(1 - exp(-2 sqrt(kappa)))``."""
    kappa = _positive("kappa", kappa)
    return -math.log2(-math.expm1(-2 * math.sqrt(kappa)))


def lossy_dephasing_ub(eta: float, density: CircularDensity) -> tuple[float, float]:
    """Upper bounds ``(unassisted, two-way assisted)`` for loss ``eta`` followed by dephasing."""
    eta = float(eta)
    if not 0 <= eta <= 1:
        raise DomainError(f"transmissivity must lie in [0, 1], got {eta}")
    cap = capacity_exact(density)
    if eta == 1:
        return cap, cap
    if eta == 0:
        return 0.0, 0.0
    unassisted = max(math.log2(eta / (1 - eta)), 0.0)
    assisted = -math.log2(1 - eta)
    return min(unassisted, cap), min(assisted, cap)


def closed_form_capacity(density: CircularDensity) -> tuple[float | None, str | None]:
    """Family formula value and its tag, or ``(None, None)`` if none applies."""
    if isinstance(density, WrappedNormal):
        if density.gamma < WN_SERIES_MIN_GAMMA:
            return None, None
        return capacity_wrapped_normal(density.gamma), density.family
    if isinstance(density, VonMises):
        return capacity_von_mises(density.lam), density.family
    if isinstance(density, WrappedCauchy):
        return capacity_wrapped_cauchy(density.kappa), density.family
    if isinstance(density, Uniform):
        return 0.0, density.family
    if isinstance(density, Product):
        parts = [closed_form_capacity(f) for f in density.factors]
        if all(v is not None for v, _ in parts):
            return math.fsum(v for v, _ in parts), "product(" + ",".join(t for _, t in parts) + ")"
    return None, None


@dataclass
class CapacityReport:
    """Exact capacity together with its finite-``d`` approximants."""

    exact: float
    lower_seq: list = field(default_factory=list)
    renyi_seq: list = field(default_factory=list)
    renyi_limits: dict = field(default_factory=dict)
    closed_form: float | None = None
    closed_form_family: str | None = None
    density_descriptor: dict = field(default_factory=dict)
    exact_method: str = "closed_form"

    def validate(self) -> None:
        for d, rate in self.lower_seq:
            if not (0 <= rate <= self.exact + 1e-6):
                raise InvariantViolation(f"rate {rate!r} at d={d} outside [0, {self.exact} + 1e-6]")
        for alpha, limit in self.renyi_limits.items():
            if not limit >= self.exact - 1e-6:
                raise InvariantViolation(f"D_{alpha} = {limit!r} is below the capacity {self.exact!r}")

    def to_dict(self) -> dict:
        renyi = []
        for alpha in sorted(self.renyi_limits):
            series = [[d, v] for a, d, v in self.renyi_seq if a == alpha]
            renyi.append({"alpha": alpha, "limit": self.renyi_limits[alpha], "series": series})
        return {
            "density": self.density_descriptor,
            "exact_bits": self.exact,
            "closed_form_bits": self.closed_form,
            "lower": [[d, r] for d, r in self.lower_seq],
            "renyi": renyi,
            "provenance": {
                "exact": self.exact_method,
                "closed_form": self.closed_form_family,
                "lower": "coherent information, maximally mixed input, Jacobi spectrum",
                "renyi_series": "finite-d Renyi functional (converges to the limit; not a bound at fixed d)",
                "renyi_limit": "quadrature",
            },
        }


def convergence_report(
    density: CircularDensity,
    d_grid: Sequence[int] = DEFAULT_D_GRID,
    alpha_grid: Sequence[float] = DEFAULT_ALPHAS,
    cap: int = DEFAULT_CAP,
) -> CapacityReport:
    """Evaluate the capacity and its approximants on a ``d`` grid and an ``alpha`` grid."""
    d_grid = sorted({int(d) for d in d_grid})
    alpha_grid = sorted({float(a) for a in alpha_grid})
    if not d_grid or not alpha_grid:
        raise DomainError("d_grid and alpha_grid must be nonempty")
    if d_grid[0] < 1:
        raise DomainError(f"truncation sizes must be positive, got {d_grid[0]}")
    if alpha_grid[0] <= 1:
        raise DomainError(f"Renyi orders must exceed 1, got {alpha_grid[0]}")
    m = density.modes
    for d in d_grid:
        if d**m > cap:
            raise DomainError(f"d={d} gives dimension {d**m} above the cap {cap}")

    try:
        div = kl_to_uniform(density)
    except DivergentEntropyError as exc:
        raise DivergentEntropyError(
            f"{exc}; capacity is the +inf sentinel (finiteness of some D_alpha(p||u), alpha > 1, not established)"
        ) from exc
    closed, tag = closed_form_capacity(density)
    report = CapacityReport(
        exact=div.value,
        exact_method=div.method,
        closed_form=closed,
        closed_form_family=tag,
        density_descriptor=density.describe(),
    )
    for d in d_grid:
        trunc = build_truncation(density, (d,) * m, cap)
        report.lower_seq.append((d, coherent_info_rate(trunc)))
        for alpha in alpha_grid:
            report.renyi_seq.append((alpha, d, renyi_ub_finite(trunc, alpha)))
    for alpha in alpha_grid:
        report.renyi_limits[alpha] = renyi_to_uniform(density, alpha).value
    report.validate()
    return report


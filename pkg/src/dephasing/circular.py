"""Probability densities on the torus ``[-pi, pi)^m`` and their divergences to uniform.

A density is an immutable (hashable) value.  Single-mode variants are
:class:`WrappedNormal`, :class:`VonMises`, :class:`WrappedCauchy`,
:class:`Uniform` and :class:`Tabulated`; :class:`Product` combines single-mode
factors into an ``m``-mode density.

Fourier coefficients follow the convention ``c_k = int p(phi) exp(i phi k) dphi``
so that ``c_0 = 1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import ClassVar, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    DivergentEntropyError,
    DivergentIntegralError,
    DomainError,
    SeriesNonConvergence,
)
from .specfun import (
    DEFAULT_CONTROL,
    SeriesControl,
    bessel_i,
    bessel_ratios,
    log_bessel_i0,
    log_euler_phi,
    periodic_nodes,
    quad_periodic,
    xlog2x,
)

LOG2_2PI = math.log2(2 * math.pi)
LN2 = math.log(2.0)

# Below this gamma the wrapped-normal series loses accuracy in 1 - exp(-k gamma).
WN_SERIES_MIN_GAMMA = 0.02
ENTROPY_FLOOR_BITS = -60.0
QUAD_REL_TOL = 1e-12
MAX_NODES = {1: 2**20, 2: 2**11, 3: 2**7}

# terms below exp(-_TAIL_EXP) relative to the leading one are dropped
_TAIL_EXP = math.log(1e17)


def _pow2_at_least(x: float, lo: int) -> int:
    n = lo
    while n < x:
        n *= 2
    return n


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a finite positive number, got {value}")
    return value


class CircularDensity:
    """Common interface; concrete variants are frozen dataclasses."""

    family: ClassVar[str] = ""

    @property
    def modes(self) -> int:
        return 1

    @property
    def params(self) -> tuple:
        return ()

    def describe(self) -> dict:
        return {"family": self.family, "params": list(self.params)}

    # hooks for single-mode variants
    def _pdf(self, phi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _coeffs(self, k: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _closed_entropy(self) -> float | None:
        return None

    def _start_nodes(self) -> int:
        return 256


@dataclass(frozen=True)
class WrappedNormal(CircularDensity):
    """Normal distribution of variance ``gamma`` wrapped onto the circle."""

    gamma: float
    family: ClassVar[str] = "wrapped-normal"

    def __post_init__(self):
        object.__setattr__(self, "gamma", _positive("gamma", self.gamma))

    @property
    def params(self):
        return (self.gamma,)

    def _pdf(self, phi):
        g = self.gamma
        if g < 2 * math.pi:
            # direct sum over 2 pi translates
            kmax = math.ceil((math.sqrt(2 * g * _TAIL_EXP) + math.pi) / (2 * math.pi))
            shifts = 2 * math.pi * np.arange(-kmax, kmax + 1)
            z = phi[..., None] + shifts
            return np.exp(-(z * z) / (2 * g)).sum(axis=-1) / math.sqrt(2 * math.pi * g)
        # Fourier (theta-function) form
        kmax = math.ceil(math.sqrt(2 * _TAIL_EXP / g))
        k = np.arange(1, kmax + 1)
        w = np.exp(-g * k * k / 2)
        return (1 + 2 * (w * np.cos(phi[..., None] * k)).sum(axis=-1)) / (2 * math.pi)

    def _coeffs(self, k):
        return np.exp(-self.gamma * k.astype(float) ** 2 / 2)

    def _closed_entropy(self):
        if self.gamma < WN_SERIES_MIN_GAMMA:
            return None
        cap = math.log2(math.e) * log_euler_phi(math.exp(-self.gamma)) + 2 / LN2 * wn_alternating_sum(self.gamma)
        return LOG2_2PI - cap

    def _start_nodes(self):
        return _pow2_at_least(18 / math.sqrt(self.gamma), 256)


@dataclass(frozen=True)
class VonMises(CircularDensity):
    """Von Mises density ``exp(cos(phi)/lam) / (2 pi I_0(1/lam))``."""

    lam: float
    family: ClassVar[str] = "von-mises"

    def __post_init__(self):
        object.__setattr__(self, "lam", _positive("lambda", self.lam))

    @property
    def params(self):
        return (self.lam,)

    def _pdf(self, phi):
        x = 1 / self.lam
        return np.exp((np.cos(phi) - 1) * x) / (2 * math.pi * bessel_i(0, x, scaled=True))

    def _coeffs(self, k):
        k = np.abs(k)
        ratios = bessel_ratios(int(k.max(initial=0)), 1 / self.lam)
        return ratios[k]

    def _closed_entropy(self):
        x = 1 / self.lam
        r1 = float(bessel_ratios(1, x)[1])
        return (math.log(2 * math.pi) + log_bessel_i0(x) - x * r1) / LN2

    def _start_nodes(self):
        return _pow2_at_least(18 / math.sqrt(self.lam), 256)


@dataclass(frozen=True)
class WrappedCauchy(CircularDensity):
    """Cauchy distribution wrapped onto the circle; ``|c_k| = exp(-sqrt(kappa) |k|)``."""

    kappa: float
    family: ClassVar[str] = "wrapped-cauchy"

    def __post_init__(self):
        object.__setattr__(self, "kappa", _positive("kappa", self.kappa))

    @property
    def params(self):
        return (self.kappa,)

    def _pdf(self, phi):
        s = math.sqrt(self.kappa)
        if s <= 1:
            # sinh(s) / (cosh(s) - cos(phi)) without the cancellation near phi = 0
            denom = 2 * (math.sinh(s / 2) ** 2 + np.sin(phi / 2) ** 2)
            return math.sinh(s) / denom / (2 * math.pi)
        e = math.exp(-s)
        return -math.expm1(-2 * s) / (1 + e * e - 2 * e * np.cos(phi)) / (2 * math.pi)

    def _coeffs(self, k):
        return np.exp(-math.sqrt(self.kappa) * np.abs(k).astype(float))

    def _closed_entropy(self):
        return LOG2_2PI + math.log2(-math.expm1(-2 * math.sqrt(self.kappa)))

    def _start_nodes(self):
        return _pow2_at_least(83 / math.sqrt(self.kappa), 256)


@dataclass(frozen=True)
class Uniform(CircularDensity):
    """The uniform density ``1 / (2 pi)``."""

    family: ClassVar[str] = "uniform"

    def _pdf(self, phi):
        return np.full(np.shape(phi), 1 / (2 * math.pi))

    def _coeffs(self, k):
        return (k == 0).astype(float)

    def _closed_entropy(self):
        return LOG2_2PI

    def _start_nodes(self):
        return 8


MIN_TABULATED_POINTS = 32


@dataclass(frozen=True)
class Tabulated(CircularDensity):
    """Density sampled on the uniform grid ``-pi + 2 pi j / N``, ``j < N``.

    Values are validated to integrate to one (trapezoid rule) within 1e-6
    and then rescaled so the normalisation is exact.  Between nodes the
    density is interpolated linearly.
    """

    values: tuple
    family: ClassVar[str] = "tabulated"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < MIN_TABULATED_POINTS:
            raise DomainError(f"tabulated density needs >= {MIN_TABULATED_POINTS} samples, got {v.size}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("tabulated density values must be finite and nonnegative")
        mass = v.sum() * 2 * math.pi / v.size
        if abs(mass - 1) > 1e-6:
            raise DomainError(f"tabulated density integrates to {mass!r}, not 1 within 1e-6")
        object.__setattr__(self, "values", tuple((v / mass).tolist()))

    @classmethod
    def from_samples(cls, angles: Sequence[float], values: Sequence[float]) -> "Tabulated":
        """Build from explicit ``(angle, value)`` samples; the angles must form the uniform grid."""
        a = np.asarray(angles, dtype=float)
        if a.shape != np.shape(values):
            raise DimensionMismatchError("angles and values differ in length")
        if a.size < MIN_TABULATED_POINTS:
            raise DomainError(f"tabulated density needs >= {MIN_TABULATED_POINTS} samples, got {a.size}")
        if np.any(np.diff(a) <= 0):
            raise DomainError("angles must be strictly increasing")
        expected = periodic_nodes(a.size)
        if np.max(np.abs(a - expected)) > 1e-9 * a.size:
            raise DomainError("angles must be the uniform grid -pi + 2*pi*j/N covering [-pi, pi)")
        return cls(tuple(float(x) for x in values))

    @property
    def size(self) -> int:
        return len(self.values)

    def describe(self):
        return {"family": self.family, "params": [], "points": self.size}

    def _pdf(self, phi):
        v = np.asarray(self.values)
        n = v.size
        pos = (phi + math.pi) * n / (2 * math.pi)
        j = np.floor(pos).astype(int)
        frac = pos - j
        return v[j % n] * (1 - frac) + v[(j + 1) % n] * frac

    def _coeffs(self, k):
        v = np.asarray(self.values)
        n = v.size
        dft = np.fft.ifft(v)
        sign = np.where(k % 2 == 0, 1.0, -1.0)
        out = 2 * math.pi * sign * dft[k % n]
        return np.where(k == 0, 1.0 + 0j, out)

    def _grid_integral(self, g) -> float:
        v = np.asarray(self.values)
        return float(np.sum(g(v)) * 2 * math.pi / v.size)


@dataclass(frozen=True)
class Product(CircularDensity):
    """Independent product of single-mode densities, one per mode."""

    factors: tuple
    family: ClassVar[str] = "product"

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise DomainError("a product density needs at least one factor")
        for f in factors:
            if not isinstance(f, CircularDensity) or isinstance(f, Product):
                raise DomainError(f"product factors must be single-mode densities, got {f!r}")
        object.__setattr__(self, "factors", factors)

    @property
    def modes(self):
        return len(self.factors)

    @property
    def params(self):
        return tuple(p for f in self.factors for p in f.params)

    def describe(self):
        return {
            "family": self.family,
            "params": list(self.params),
            "factors": [f.describe() for f in self.factors],
        }


def _factors(density: CircularDensity) -> tuple:
    return density.factors if isinstance(density, Product) else (density,)


def wn_alternating_sum(gamma: float, control: SeriesControl = DEFAULT_CONTROL) -> float:
    """``sum_{k>=1} (-1)^(k-1) q^((k^2+k)/2) / (k (1 - q^k))`` with ``q = exp(-gamma)``."""
    total = 0.0
    for k in range(1, control.max_terms + 1):
        term = math.exp(-gamma * (k * k + k) / 2) / (k * -math.expm1(-k * gamma))
        if term < control.abs_tol:
            return total
        total += term if k % 2 else -term
    raise SeriesNonConvergence(f"wrapped-normal series needs more than {control.max_terms} terms at gamma={gamma}")


def pdf(density: CircularDensity, angle) -> float:
    """Density value at one point ``angle`` (scalar for one mode, else length ``m``)."""
    a = np.atleast_1d(np.asarray(angle, dtype=float))
    if a.shape != (density.modes,):
        raise DimensionMismatchError(f"expected {density.modes} angle(s), got shape {a.shape}")
    if np.any(np.abs(a) > math.pi) or np.any(np.isnan(a)):
        raise DomainError(f"angles must lie in [-pi, pi], got {a.tolist()}")
    return float(_pdf_mesh(density, [np.array(x) for x in a]))


def _pdf_mesh(density: CircularDensity, grids) -> np.ndarray:
    out = None
    for f, g in zip(_factors(density), grids):
        vals = f._pdf(np.asarray(g, dtype=float))
        out = vals if out is None else out * vals
    return out


def coefficient_array(density: CircularDensity, k) -> np.ndarray:
    """Vectorised Fourier coefficients.

    For one mode ``k`` is any integer array; for ``m`` modes its last axis has
    length ``m``.  Returns a complex array of the leading shape.
    """
    k = np.asarray(k)
    if not np.issubdtype(k.dtype, np.integer):
        raise DomainError("Fourier indices must be integers")
    factors = _factors(density)
    if len(factors) == 1:
        return factors[0]._coeffs(k).astype(complex)
    if k.ndim == 0 or k.shape[-1] != len(factors):
        raise DimensionMismatchError(f"expected index vectors of length {len(factors)}")
    out = np.ones(k.shape[:-1], dtype=complex)
    for j, f in enumerate(factors):
        out = out * f._coeffs(k[..., j])
    return out


def fourier_coeff(density: CircularDensity, k) -> complex:
    """``int p(phi) exp(i phi . k) dphi`` for one integer index vector ``k``."""
    kv = np.atleast_1d(np.asarray(k))
    if kv.shape != (density.modes,):
        raise DimensionMismatchError(f"expected an index vector of length {density.modes}, got {kv.tolist()}")
    if density.modes == 1:
        return complex(coefficient_array(density, kv)[0])
    return complex(coefficient_array(density, kv[None, :])[0])


@dataclass(frozen=True)
class DivergenceValue:
    """A divergence to the uniform density, in bits."""

    value: float
    order: float
    method: str

    def __post_init__(self):
        if self.order < 1:
            raise DomainError(f"divergence order must be >= 1, got {self.order}")
        if self.method not in ("closed_form", "quadrature"):
            raise DomainError(f"unknown method {self.method!r}")
        if not self.value >= 0:
            raise DomainError(f"divergence must be nonnegative, got {self.value}")


def _quadrature(density: CircularDensity, integrand) -> float:
    """Integrate ``integrand(p(phi))`` over the torus, doubling nodes until stable."""
    if isinstance(density, Product) and density.modes == 1:
        density = density.factors[0]
    if isinstance(density, Tabulated):
        return density._grid_integral(integrand)
    m = density.modes
    if m > 3:
        raise DomainError(f"quadrature supports at most 3 modes, got {m}")
    factors = _factors(density)
    n = max(f._start_nodes() for f in factors)
    n = min(n, MAX_NODES[m] // (2 if m == 1 else 4))
    prev = None
    while n <= MAX_NODES[m]:
        if any(isinstance(f, Tabulated) for f in factors):
            raise DomainError("tabulated factors inside a product are integrated factor-wise only")
        val = float(quad_periodic(lambda *g: integrand(_pdf_mesh(density, g)), n, m))
        if prev is not None and abs(val - prev) <= QUAD_REL_TOL * max(1.0, abs(val)):
            return val
        prev = val
        n *= 2
    raise DivergentIntegralError(
        f"quadrature did not stabilise up to {MAX_NODES[m]} nodes per axis "
        f"(last value {prev!r}); the integral may diverge"
    )


def _entropy(density: CircularDensity, method: str) -> tuple[float, str]:
    if method not in ("auto", "closed_form", "quadrature"):
        raise DomainError(f"unknown entropy method {method!r}")
    if method != "quadrature":
        parts = [f._closed_entropy() for f in _factors(density)]
        if all(p is not None for p in parts):
            return math.fsum(parts), "closed_form"
        if method == "closed_form":
            raise DomainError(f"no closed-form entropy for {density!r}")
        if isinstance(density, Product) and density.modes > 1:
            # entropy is additive; integrate only the factors that need it
            total = math.fsum(_entropy(f, "auto")[0] for f in density.factors)
            return total, "quadrature"
    try:
        h = -_quadrature(density, xlog2x)
    except DivergentIntegralError as exc:
        raise DivergentEntropyError(f"differential entropy did not converge: {exc}") from exc
    if h < ENTROPY_FLOOR_BITS * density.modes:
        raise DivergentEntropyError(
            f"differential entropy {h:.6g} bits is below the floor {ENTROPY_FLOOR_BITS} bits per mode"
        )
    return h, "quadrature"


def differential_entropy(density: CircularDensity, method: str = "auto") -> float:
    """Differential entropy ``-int p log2 p`` in bits.

    ``method`` is ``"auto"`` (closed form when available), ``"closed_form"``
    or ``"quadrature"``.
    """
    return _entropy(density, method)[0]


def _clip_divergence(value: float) -> float:
    if -1e-9 <= value < 0:
        return 0.0
    return value


def kl_to_uniform(density: CircularDensity, method: str = "auto") -> DivergenceValue:
    """Relative entropy ``D(p || u) = m log2(2 pi) - h(p)``."""
    h, used = _entropy(density, method)
    return DivergenceValue(_clip_divergence(density.modes * LOG2_2PI - h), 1.0, used)


def renyi_to_uniform(density: CircularDensity, alpha: float) -> DivergenceValue:
    """Renyi divergence of order ``alpha >= 1`` to the uniform density, by quadrature.

    ``alpha == 1`` returns :func:`kl_to_uniform`.  If the power integral does
    not settle under node doubling a :class:`DivergentIntegralError` is raised;
    this is a numerical diagnostic and does not prove divergence.
    """
    alpha = float(alpha)
    if not alpha >= 1 or not math.isfinite(alpha):
        raise DomainError(f"Renyi order must be a finite number >= 1, got {alpha}")
    if alpha == 1:
        return kl_to_uniform(density)
    if all(isinstance(f, Uniform) for f in _factors(density)):
        return DivergenceValue(0.0, alpha, "closed_form")
    if isinstance(density, Product) and density.modes > 1:
        # the power integral factorises over modes
        parts = [renyi_to_uniform(f, alpha).value for f in density.factors]
        return DivergenceValue(_clip_divergence(math.fsum(parts)), alpha, "quadrature")
    integral = _quadrature(density, lambda p: p**alpha)
    value = density.modes * LOG2_2PI + math.log2(integral) / (alpha - 1)
    return DivergenceValue(_clip_divergence(value), alpha, "quadrature")


def load_tabulated_csv(path) -> Tabulated:
    """Read a two-column ``angle,value`` CSV (radians, optional header row)."""
    angles, values = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DomainError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                a, v = float(row[0]), float(row[1])
            except ValueError:
                if lineno == 1 and not angles:
                    continue
                raise DomainError(f"{path}:{lineno}: non-numeric entry {row!r}") from None
            angles.append(a)
            values.append(v)
    return Tabulated.from_samples(angles, values)

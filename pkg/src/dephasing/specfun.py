"""Special functions and periodic quadrature.

Everything here is a pure function of its arguments.  The modified Bessel
functions switch from the ascending series to the large-argument expansion at
``BESSEL_SWITCH``; at that point both branches are accurate to a few ulp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NonFiniteIntegrandError, SeriesNonConvergence

BESSEL_SWITCH = 15.0
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for infinite sums and products."""

    abs_tol: float = 1e-15
    max_terms: int = 10**6

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError(f"max_terms must be a positive integer, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


def _check_bessel_args(n, x):
    if int(n) != n or n < 0:
        raise DomainError(f"Bessel order must be a nonnegative integer, got {n}")
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"Bessel argument must be finite and >= 0, got {x}")


def _series_scaled(n: int, x: float) -> float:
    # exp(-x) * sum_k (x/2)^(2k+n) / (k! (k+n)!), first term built in log space
    log_t0 = n * math.log(x / 2) - math.lgamma(n + 1) - x
    if log_t0 < -745.0:
        return 0.0
    term = 1.0
    total = 0.0
    q = (x / 2) ** 2
    k = 0
    while True:
        total += term
        k += 1
        term *= q / (k * (k + n))
        if term < 1e-17 * total:
            break
    return total * math.exp(log_t0)


def _hankel_scaled(nu: int, x: float) -> float:
    """Large-argument expansion of ``exp(-x) I_nu(x)``, summed to its smallest term."""
    mu = 4 * nu * nu
    term = 1.0
    total = 0.0
    k = 0
    while True:
        total += term
        k += 1
        nxt = -term * (mu - (2 * k - 1) ** 2) / (8 * k * x)
        if nxt == 0 or abs(nxt) >= abs(term) or abs(nxt) < 1e-17 * abs(total):
            break
        term = nxt
    return total / math.sqrt(2 * math.pi * x)


def _top_ratio(nu: int, x: float) -> float:
    """I_nu(x) / I_{nu-1}(x) from its continued fraction (modified Lentz)."""
    if x >= 1e4 and 4 * nu * nu <= x / 10:
        # the fraction needs O(x) steps here; the expansion is exact to rounding
        return _hankel_scaled(nu, x) / _hankel_scaled(nu - 1, x)
    tiny = 1e-300
    f = 2 * nu / x or tiny
    c, d = f, 0.0
    j = nu
    while True:
        j += 1
        b = 2 * j / x
        d = b + d
        d = 1.0 / (d if d != 0 else tiny)
        c = b + 1.0 / c
        if c == 0:
            c = tiny
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return 1.0 / f
        if j - nu > 10**7:
            raise SeriesNonConvergence(f"Bessel ratio continued fraction stalled at x={x}")


def bessel_ratios(kmax: int, x: float) -> np.ndarray:
    """Return ``I_k(x) / I_0(x)`` for ``k = 0..kmax``.

    The ratios never overflow, which is what the von Mises Fourier
    coefficients need for strongly concentrated densities.
    """
    _check_bessel_args(kmax, x)
    out = np.zeros(kmax + 1)
    out[0] = 1.0
    if kmax == 0 or x == 0:
        return out
    rho = np.empty(kmax + 1)
    rho[kmax] = _top_ratio(kmax, x)
    for k in range(kmax - 1, 0, -1):
        rho[k] = 1.0 / (2 * k / x + rho[k + 1])
    out[1:] = np.cumprod(rho[1:])
    return out


def bessel_i(n: int, x: float, scaled: bool = False) -> float:
    """Modified Bessel function of the first kind ``I_n(x)``, real ``x >= 0``.

    With ``scaled=True`` returns ``exp(-x) * I_n(x)``, which is finite for all
    finite ``x``.  The unscaled value raises ``OverflowError`` once it leaves
    the double range.
    """
    _check_bessel_args(n, x)
    n = int(n)
    x = float(x)
    if x == 0.0:
        val = 1.0 if n == 0 else 0.0
        return val
    if x <= BESSEL_SWITCH:
        val = _series_scaled(n, x)
    else:
        val = _hankel_scaled(0, x)
        if n > 0:
            val *= float(bessel_ratios(n, x)[n])
    if scaled:
        return val
    if val == 0.0:
        return 0.0
    log_val = x + math.log(val)
    if log_val > _LOG_MAX:
        raise OverflowError(f"I_{n}({x}) exceeds the double range (log = {log_val:.6g})")
    return val * math.exp(x)


def log_bessel_i0(x: float) -> float:
    """Natural log of ``I_0(x)``; finite for every finite ``x >= 0``."""
    return x + math.log(bessel_i(0, x, scaled=True))


def _check_q(q: float):
    if not (0.0 <= q < 1.0):
        raise DomainError(f"Euler function needs 0 <= q < 1, got {q}")


def euler_phi(q: float, control: SeriesControl = DEFAULT_CONTROL) -> float:
    """Euler function ``prod_{k>=1} (1 - q^k)``."""
    _check_q(q)
    prod = 1.0
    qk = q
    for _ in range(control.max_terms):
        if qk < control.abs_tol:
            return prod
        prod *= 1.0 - qk
        qk *= q
    raise SeriesNonConvergence(f"euler_phi({q}) needs more than {control.max_terms} factors")


def log_euler_phi(q: float, control: SeriesControl = DEFAULT_CONTROL) -> float:
    """``ln phi(q) = -sum_k q^k / (k (1 - q^k))``, stable as ``q -> 1``."""
    _check_q(q)
    if q == 0.0:
        return 0.0
    lq = math.log(q)
    # consecutive terms shrink by at least a factor q, so the tail after a
    # term t is below t * q / (1 - q)
    tail_factor = 1.0 / -math.expm1(lq)
    total = 0.0
    chunk = 4096
    start = 1
    while start <= control.max_terms:
        k = np.arange(start, min(start + chunk, control.max_terms + 1), dtype=float)
        terms = np.exp(k * lq) / (k * -np.expm1(k * lq))
        below = terms * tail_factor < control.abs_tol * max(1.0, total + terms.sum())
        if below.any():
            stop = int(np.argmax(below))
            return -(total + terms[: stop + 1].sum())
        total += terms.sum()
        start += chunk
    raise SeriesNonConvergence(f"log_euler_phi({q}) needs more than {control.max_terms} terms")


def periodic_nodes(n: int) -> np.ndarray:
    """Trapezoid nodes ``-pi + 2 pi j / n`` on the periodic interval."""
    return -np.pi + 2 * np.pi * np.arange(n) / n


def quad_periodic(f: Callable[..., np.ndarray], nodes_per_axis: int, m: int = 1):
    """Composite trapezoid rule for a ``2 pi``-periodic integrand on ``[-pi, pi)^m``.

    ``f`` is called once with ``m`` broadcastable coordinate arrays (an
    ``'ij'`` meshgrid) and must return the integrand values.  Callers check
    convergence by repeating with ``2 * nodes_per_axis``.
    """
    if int(nodes_per_axis) != nodes_per_axis or nodes_per_axis < 1:
        raise DomainError(f"nodes_per_axis must be a positive integer, got {nodes_per_axis}")
    if m not in (1, 2, 3):
        raise DomainError(f"dense tensor quadrature supports 1 <= m <= 3, got {m}")
    phi = periodic_nodes(int(nodes_per_axis))
    grids = np.meshgrid(*([phi] * m), indexing="ij")
    vals = np.asarray(f(*grids))
    if not np.all(np.isfinite(vals)):
        raise NonFiniteIntegrandError("integrand is not finite at every quadrature node")
    return vals.sum() * (2 * np.pi / nodes_per_axis) ** m


def xlog2x(x):
    """``x * log2(x)`` with ``0 log 0 = 0``; accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("xlog2x is defined for x >= 0 only")
    pos = arr > 0
    out = np.where(pos, arr * np.log2(np.where(pos, arr, 1.0)), 0.0)
    return float(out) if out.ndim == 0 else out

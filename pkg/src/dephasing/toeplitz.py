"""Toeplitz truncations of a density's Fourier coefficients and their spectra.

The spectral engine is a cyclic Jacobi method.  Rotations are applied to
``n // 2`` disjoint index pairs at once, the pairs being chosen by odd-even
transposition of a permutation so that every pair meets exactly once per
sweep.  Real symmetric matrices that are also centrosymmetric (``JAJ = A``
with ``J`` the flip), which covers every real Toeplitz truncation and Kronecker
products of them, are first split exactly into two half-size blocks.  Complex
Hermitian input is handled through its real symmetric embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Sequence, Union

import numpy as np

from .circular import CircularDensity, _factors, coefficient_array
from .errors import (
    CapExceededError,
    DimensionMismatchError,
    DomainError,
    JacobiNonConvergence,
    NegativeEigenvalueError,
)
from .matrixio import write_matrix_csv
from .specfun import xlog2x

DEFAULT_CAP = 4096
JACOBI_TOL = 1e-12
MAX_SWEEPS = 30
HERMITIAN_TOL = 1e-12
CLIP_TOL = 1e-9


@dataclass(frozen=True)
class SpectralResult:
    """Ascending eigenvalues with diagnostics.

    ``trace_residual`` is ``|sum(eigenvalues) - trace(matrix)|``; for a
    truncation the trace is the dimension.
    """

    eigenvalues: np.ndarray
    min_eig: float
    trace_residual: float
    sweeps: int = 0


@lru_cache(maxsize=None)
def _pair_schedule(n: int) -> tuple:
    steps = []
    perm = np.arange(n)
    for step in range(n):
        lo = step % 2
        p = perm[lo : n - 1 : 2].copy()
        q = perm[lo + 1 : n : 2].copy()
        if p.size:
            steps.append((np.minimum(p, q), np.maximum(p, q)))
        perm[lo : n - 1 : 2], perm[lo + 1 : n : 2] = q, p
    return tuple(steps)


def _rotate_rows(a, p, q, c, s):
    rp = a[p]
    rq = a[q]
    a[p] = c * rp - s * rq
    a[q] = s * rp + c * rq


def _jacobi_symmetric(a: np.ndarray, target: float, max_sweeps: int) -> tuple[np.ndarray, int]:
    """Diagonalise a real symmetric matrix in place until off-norm <= target."""
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy(), 0
    schedule = _pair_schedule(n)
    for sweep in range(max_sweeps + 1):
        diag = a.diagonal().copy()
        off = float(np.linalg.norm(a - np.diag(diag)))
        if off <= target:
            return diag, sweep
        if sweep == max_sweeps:
            break
        for p, q in schedule:
            apq = a[p, q]
            live = apq != 0
            if not live.any():
                continue
            if not live.all():
                p, q, apq = p[live], q[live], apq[live]
            with np.errstate(over="ignore"):
                # subnormal apq can overflow theta to inf; t then becomes 0 below
                theta = (a[q, q] - a[p, p]) / (2 * apq)
            big = np.abs(theta) > 1e150
            theta_safe = np.where(big, 1.0, theta)
            t = np.sign(theta_safe) / (np.abs(theta_safe) + np.sqrt(theta_safe * theta_safe + 1))
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            t = np.where(theta == 0, 1.0, t)
            c = 1 / np.sqrt(t * t + 1)
            s = (t * c)[:, None]
            c = c[:, None]
            _rotate_rows(a, p, q, c, s)
            a = a.T.copy()
            _rotate_rows(a, p, q, c, s)
    raise JacobiNonConvergence(
        f"Jacobi did not reach off-norm {target:.3g} within {max_sweeps} sweeps (n={n}, off={off:.3g})"
    )


def _centro_blocks(a: np.ndarray) -> list[np.ndarray]:
    n = a.shape[0]
    m = n // 2
    top = a[:m, :m]
    if n % 2 == 0:
        r = a[:m, m:][:, ::-1]
        return [top + r, top - r]
    r = a[:m, m + 1 :][:, ::-1]
    col = math.sqrt(2) * a[:m, m]
    plus = np.empty((m + 1, m + 1))
    plus[:m, :m] = top + r
    plus[:m, m] = col
    plus[m, :m] = col
    plus[m, m] = a[m, m]
    return [plus, top - r]


def eigvals_hermitian(matrix, tol: float = JACOBI_TOL, max_sweeps: int = MAX_SWEEPS) -> SpectralResult:
    """Eigenvalues of a dense Hermitian matrix by cyclic Jacobi.

    Iterates until the off-diagonal Frobenius norm is at most
    ``tol * ||matrix||_F``; raises :class:`JacobiNonConvergence` after
    ``max_sweeps`` sweeps.
    """
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatchError(f"expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
        raise DomainError("matrix is not Hermitian within 1e-12")
    n = a.shape[0]
    fro = float(np.linalg.norm(a))
    trace = float(np.trace(a).real)

    complex_input = np.iscomplexobj(a) and np.any(a.imag != 0)
    if complex_input:
        re, im = a.real, a.imag
        emb = np.block([[re, -im], [im, re]])
        emb = (emb + emb.T) / 2
        # the embedding doubles every eigenvalue and the Frobenius norm squared
        blocks, scale = [emb], math.sqrt(2) * fro
    else:
        real = np.array(a.real, dtype=float)
        real = (real + real.T) / 2
        if n >= 4 and np.array_equal(real, real[::-1, ::-1]):
            blocks = _centro_blocks(real)
        else:
            blocks = [real]
        scale = fro
    target = tol * scale / math.sqrt(len(blocks))
    parts, sweeps = [], 0
    for b in blocks:
        ev, sw = _jacobi_symmetric(np.array(b, dtype=float), target, max_sweeps)
        parts.append(ev)
        sweeps = max(sweeps, sw)
    ev = np.sort(np.concatenate(parts))
    if complex_input:
        ev = ev.reshape(-1, 2).mean(axis=1)
    return SpectralResult(
        eigenvalues=ev,
        min_eig=float(ev[0]),
        trace_residual=abs(float(ev.sum()) - trace),
        sweeps=sweeps,
    )


@dataclass(frozen=True, eq=False)
class ToeplitzTruncation:
    """``D x D`` matrix ``T[h, k] = c(h - k)`` over row-major multi-indices.

    ``entries`` is read-only; it is stored as a real array when every
    coefficient is real.  ``source`` is ``None`` for hand-built matrices.
    """

    dims: tuple
    entries: np.ndarray
    source: CircularDensity | None = None

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @cached_property
    def spectrum(self) -> SpectralResult:
        return eigvals_hermitian(self.entries)

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[complex]) -> "ToeplitzTruncation":
        """Single-mode Hermitian Toeplitz matrix from ``c_0, c_1, ..., c_{d-1}``."""
        c = np.asarray(coeffs)
        if c.ndim != 1 or c.size == 0:
            raise DimensionMismatchError("need a nonempty 1-D coefficient list")
        return cls((c.size,), _hermitian_toeplitz(c))

    def to_csv(self, path) -> None:
        write_matrix_csv(self.entries, path)


def _hermitian_toeplitz(c: np.ndarray) -> np.ndarray:
    d = c.size
    idx = np.arange(d)
    diff = idx[:, None] - idx[None, :]
    if np.iscomplexobj(c) and np.any(c.imag != 0):
        out = np.where(diff >= 0, c[np.abs(diff)], np.conj(c[np.abs(diff)]))
    else:
        out = np.real(c)[np.abs(diff)].astype(float)
    out.flags.writeable = False
    return out


def build_truncation(density: CircularDensity, dims, cap: int = DEFAULT_CAP) -> ToeplitzTruncation:
    """Truncation of the coefficient matrix of ``density`` to ``dims`` levels per mode."""
    dims = tuple(int(d) for d in np.atleast_1d(dims))
    if len(dims) != density.modes:
        raise DimensionMismatchError(f"density has {density.modes} mode(s) but dims={dims}")
    if any(d < 1 for d in dims):
        raise DomainError(f"dimensions must be positive, got {dims}")
    total = math.prod(dims)
    if total > cap:
        raise CapExceededError(f"truncation dimension {total} exceeds the cap {cap}")
    return _build_cached(density, dims)


@lru_cache(maxsize=128)
def _build_cached(density: CircularDensity, dims: tuple) -> ToeplitzTruncation:
    mats = []
    for f, d in zip(_factors(density), dims):
        c = coefficient_array(f, np.arange(d))
        mats.append(_hermitian_toeplitz(c))
    out = mats[0]
    for m in mats[1:]:
        # Kronecker order = row-major multi-index, last mode fastest
        out = np.kron(out, m)
    out = np.array(out)
    out.flags.writeable = False
    return ToeplitzTruncation(dims, out, density)


FunctionTag = Union[str, tuple, Callable[[np.ndarray], np.ndarray]]


def _clipped(eigs: np.ndarray) -> np.ndarray:
    lo = float(eigs.min())
    if lo < -CLIP_TOL:
        raise NegativeEigenvalueError(f"eigenvalue {lo:.3g} is below -{CLIP_TOL:g}; matrix is not PSD")
    return np.maximum(eigs, 0.0)


def szego_functional(trunc: ToeplitzTruncation, F: FunctionTag) -> float:
    """``(1/D) sum_j F(lambda_j)`` over the eigenvalues of ``trunc``.

    ``F`` is ``"xlog2x"``, ``("power", alpha)`` or a vectorised callable.  For
    the two named functions, roundoff negatives down to -1e-9 are clipped to 0.
    """
    eigs = trunc.spectrum.eigenvalues
    if F == "xlog2x":
        vals = xlog2x(_clipped(eigs))
    elif isinstance(F, tuple) and len(F) == 2 and F[0] == "power":
        vals = _clipped(eigs) ** float(F[1])
    elif callable(F):
        vals = np.asarray(F(eigs), dtype=float)
    else:
        raise DomainError(f"unknown functional {F!r}")
    return math.fsum(vals) / eigs.size


def validate_psd(trunc, tol: float = CLIP_TOL) -> tuple[bool, float]:
    """Return ``(min_eig >= -tol, min_eig)`` for a truncation or a Hermitian matrix."""
    res = trunc.spectrum if isinstance(trunc, ToeplitzTruncation) else eigvals_hermitian(trunc)
    return res.min_eig >= -tol, res.min_eig

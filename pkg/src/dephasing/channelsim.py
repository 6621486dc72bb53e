"""Truncated Fock-space simulation of the dephasing channel and its teleportation simulation.

States live on the first ``d`` number states.  The dephasing channel acts as
the Hadamard product with the Toeplitz truncation; teleporting through the
channel's Choi state yields another Hadamard channel whose coefficients are
cyclic averages of the truncation (:func:`tele_sim_matrix`).  For small ``d``
:func:`tele_superop_oracle` assembles the teleportation map from the Weyl
operators directly, as an independent check of that claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circular import CircularDensity
from .errors import DimensionMismatchError, DomainError, InvariantViolation
from .matrixio import read_matrix_csv, write_matrix_csv
from .specfun import xlog2x
from .toeplitz import DEFAULT_CAP, build_truncation, eigvals_hermitian

STATE_TOL = 1e-12
PSD_TOL = 1e-9
ORACLE_MAX_DIM = 8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Trace-one positive semidefinite matrix on ``dim`` Fock levels."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimensionMismatchError(f"density matrix must be square and nonempty, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("density matrix has non-finite entries")
        if np.max(np.abs(a - a.conj().T)) > STATE_TOL:
            raise DomainError("density matrix is not Hermitian within 1e-12")
        tr = np.trace(a)
        if abs(tr - 1) > STATE_TOL:
            raise DomainError(f"density matrix has trace {tr}, not 1 within 1e-12")
        lo = eigvals_hermitian(a).min_eig
        if lo < -PSD_TOL:
            raise DomainError(f"density matrix has eigenvalue {lo:.3g} < -1e-9")
        object.__setattr__(self, "entries", _frozen(a))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_csv(cls, path) -> "DensityMatrix":
        return cls(read_matrix_csv(path))

    def to_csv(self, path) -> None:
        write_matrix_csv(self.entries, path)


def _output_state(entries: np.ndarray) -> DensityMatrix:
    try:
        return DensityMatrix(entries)
    except DomainError as exc:
        raise InvariantViolation(f"channel output is not a valid state: {exc}") from exc


def plus_state(d: int) -> DensityMatrix:
    """Uniform superposition ``(1/sqrt d) sum_n |n>``, as a density matrix."""
    return DensityMatrix(np.full((d, d), 1.0 / d))


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix(np.eye(d) / d)


def basis_state(d: int, n: int) -> DensityMatrix:
    a = np.zeros((d, d))
    a[n, n] = 1.0
    return DensityMatrix(a)


def random_state(d: int, seed: int, rank: int | None = None) -> DensityMatrix:
    """Random mixed state ``G G^dag / Tr`` from a seeded complex Ginibre matrix."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank or d)) + 1j * rng.standard_normal((d, rank or d))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    rho /= np.trace(rho).real
    return DensityMatrix(rho)


@dataclass(frozen=True)
class WeylLabel:
    """Index pair ``(x, z)`` of the shift-and-clock unitary ``X(x) Z(z)`` on ``d`` levels."""

    x: int
    z: int
    d: int

    def __post_init__(self):
        if self.d < 1 or not (0 <= self.x < self.d and 0 <= self.z < self.d):
            raise DomainError(f"Weyl label needs 0 <= x, z < d, got ({self.x}, {self.z}) with d={self.d}")


def shift_op(d: int, x: int) -> np.ndarray:
    """``X(x)|k> = |k + x mod d>``."""
    return np.roll(np.eye(d), x, axis=0)


def clock_op(d: int, z: int) -> np.ndarray:
    """``Z(z)|k> = exp(2 pi i z k / d)|k>``."""
    return np.diag(np.exp(2j * np.pi * z * np.arange(d) / d))


def weyl_op(label: WeylLabel) -> np.ndarray:
    return shift_op(label.d, label.x) @ clock_op(label.d, label.z)


def _single_mode(density: CircularDensity):
    if density.modes != 1:
        raise DimensionMismatchError("the simulator handles single-mode densities only")


def apply_dephasing(rho: DensityMatrix, density: CircularDensity) -> DensityMatrix:
    """Exact channel output on the truncated space: ``rho * T`` entrywise."""
    _single_mode(density)
    t = build_truncation(density, (rho.dim,)).entries
    return _output_state(rho.entries * t)


@dataclass(frozen=True, eq=False)
class ChoiState:
    """Choi state of the channel on ``d`` levels, stored as ``T / d``.

    The full bipartite state is ``sum_{hk} (T/d)_{hk} |hh><kk|``.
    """

    correlated_matrix: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.correlated_matrix)
        d = c.shape[0]
        if abs(np.trace(c) - 1) > STATE_TOL or np.max(np.abs(np.diag(c) - 1 / d)) > STATE_TOL:
            raise InvariantViolation("correlated matrix must have diagonal 1/d")
        if eigvals_hermitian(c).min_eig < -PSD_TOL:
            raise InvariantViolation("correlated matrix is not PSD")
        object.__setattr__(self, "correlated_matrix", _frozen(c))

    @property
    def dim(self) -> int:
        return self.correlated_matrix.shape[0]

    def entropy(self) -> float:
        """Von Neumann entropy in bits (equal to that of the full bipartite state)."""
        ev = np.maximum(eigvals_hermitian(self.correlated_matrix).eigenvalues, 0.0)
        return -math.fsum(xlog2x(ev))

    def full_matrix(self) -> np.ndarray:
        """The ``d^2 x d^2`` bipartite density matrix, ordering ``|a b>`` with ``b`` fastest."""
        d = self.dim
        out = np.zeros((d, d, d, d), dtype=complex)
        idx = np.arange(d)
        out[idx[:, None], idx[:, None], idx[None, :], idx[None, :]] = self.correlated_matrix
        return out.reshape(d * d, d * d)


def choi_state(density: CircularDensity, d: int, cap: int = DEFAULT_CAP) -> ChoiState:
    _single_mode(density)
    t = build_truncation(density, (d,), cap).entries
    return ChoiState(t / d)


def tele_sim_matrix(density: CircularDensity, d: int) -> np.ndarray:
    """Coefficients ``(1/d) sum_x T[h+x, k+x]`` (indices mod ``d``) of the simulating channel."""
    _single_mode(density)
    t = build_truncation(density, (d,)).entries
    idx = np.arange(d)
    acc = np.zeros((d, d), dtype=t.dtype)
    for x in range(d):
        s = (idx + x) % d
        acc += t[np.ix_(s, s)]
    return acc / d


def tele_sim_coeff(density: CircularDensity, d: int, h: int, k: int) -> complex:
    if not (0 <= h < d and 0 <= k < d):
        raise DomainError(f"indices must lie in [0, {d}), got ({h}, {k})")
    return complex(tele_sim_matrix(density, d)[h, k])


def apply_tele_sim(rho: DensityMatrix, density: CircularDensity, d: int | None = None) -> DensityMatrix:
    """Output of teleporting ``rho`` through the ``d``-level Choi state of the channel."""
    d = rho.dim if d is None else d
    if d != rho.dim:
        raise DimensionMismatchError(f"state has dimension {rho.dim}, simulation uses d={d}")
    return _output_state(rho.entries * tele_sim_matrix(density, d))


def tele_superop_oracle(density: CircularDensity, d: int) -> np.ndarray:
    """Superoperator of the teleportation protocol fed with the channel's Choi state.

    Systems: input ``A'``, resource ``A B``.  For every Weyl label the
    projector ``U_{A'} Phi_{A'A} U_{A'}^dag`` is contracted against
    ``rho_{A'} (x) omega_{AB}`` over ``A' A`` and the result is conjugated by
    ``U_B``.  Returned as a ``d^2 x d^2`` matrix acting on row-major
    ``vec(rho)``.
    """
    if not 1 <= d <= ORACLE_MAX_DIM:
        raise DomainError(f"the explicit oracle is limited to d <= {ORACLE_MAX_DIM}, got {d}")
    omega = choi_state(density, d).full_matrix().reshape(d, d, d, d)  # [a, b, a2, b2]
    phi_vec = np.eye(d).reshape(d * d) / math.sqrt(d)  # |Phi> on A'A, A' slow
    phi = np.outer(phi_vec, phi_vec.conj())
    super_op = np.zeros((d, d, d, d), dtype=complex)  # [b, b2, a', c']
    for x in range(d):
        for z in range(d):
            u = weyl_op(WeylLabel(x, z, d))
            uu = np.kron(u, np.eye(d))
            proj = (uu @ phi @ uu.conj().T).reshape(d, d, d, d)  # [c', g, a', a]
            # Tr_{A'A}[(rho (x) omega)(proj (x) 1_B)] as a linear map of rho[a', c']
            k = np.einsum("abgd,cgea->bdec", omega, proj)
            super_op += np.einsum("Bb,bdec,Dd->BDec", u, k, u.conj())
    return super_op.reshape(d * d, d * d)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``(1/2) ||rho - sigma||_1`` via the Hermitian eigensolver."""
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dimensions differ: {rho.dim} vs {sigma.dim}")
    diff = rho.entries - sigma.entries
    diff = (diff + diff.conj().T) / 2
    if not np.any(diff):
        return 0.0
    ev = eigvals_hermitian(diff).eigenvalues
    return min(max(0.5 * math.fsum(np.abs(ev)), 0.0), 1.0)


def entrywise_bound(d: int) -> np.ndarray:
    """``2 |h - k| / d`` for all index pairs."""
    idx = np.arange(d)
    return 2 * np.abs(idx[:, None] - idx[None, :]) / d


def trace_distance_bound(rho: DensityMatrix) -> float:
    """``(1/2) sum_{h != k} |rho_hk| 2|h-k|/d``: bounds the simulation trace distance."""
    return 0.5 * float(np.sum(np.abs(rho.entries) * entrywise_bound(rho.dim)))

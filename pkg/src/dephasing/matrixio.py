"""Plain-text matrix exchange: a ``dim=<d>`` header then one ``re,im`` row per entry."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, DomainError


def write_matrix_csv(matrix, path) -> None:
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    a = a.astype(complex)
    with open(path, "w", newline="") as fh:
        fh.write(f"dim={a.shape[0]}\n")
        for z in a.ravel():
            fh.write(f"{float(z.real)!r},{float(z.imag)!r}\n")


def read_matrix_csv(path) -> np.ndarray:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("dim="):
        raise DomainError(f"{path}: missing 'dim=<d>' header")
    try:
        d = int(lines[0][4:])
    except ValueError:
        raise DomainError(f"{path}: bad header {lines[0]!r}") from None
    if d < 1:
        raise DomainError(f"{path}: dimension must be positive")
    body = lines[1:]
    if len(body) != d * d:
        raise DimensionMismatchError(f"{path}: expected {d * d} entries, found {len(body)}")
    out = np.empty(d * d, dtype=complex)
    for i, ln in enumerate(body):
        parts = ln.split(",")
        if len(parts) != 2:
            raise DomainError(f"{path}: line {i + 2} is not 're,im'")
        try:
            out[i] = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise DomainError(f"{path}: line {i + 2} is not numeric") from None
    return out.reshape(d, d)

"""Complex Hilbert-space primitives and the realification calculus.

The ambient space is C^n with the inner product <x, y> = sum_j x_j conj(y_j)
(linear in the first slot) and entrywise conjugation. Everything downstream
is expressed through the R-linear isometry ``iota`` onto R^{2n}, the block
map ``apply_J`` that represents multiplication by i, and the split of the
complex inner product into its realified parts.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_vector",
    "as_real_vector",
    "inner",
    "real_inner",
    "imag_inner",
    "iota",
    "iota_inv",
    "apply_J",
    "fix_phase",
    "align_phase",
]


def as_vector(x) -> np.ndarray:
    """Coerce to a 1-d complex128 array, rejecting NaN/Inf entries."""
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_real_vector(xi) -> np.ndarray:
    """Coerce to a 1-d float64 array of even length (an element of R^{2n})."""
    v = np.asarray(xi, dtype=np.float64)
    if v.ndim != 1 or v.size % 2 != 0:
        raise ValueError(f"expected a 1-d real vector of even length, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def inner(x: np.ndarray, y: np.ndarray) -> complex:
    """<x, y> = sum_j x_j conj(y_j), linear in x and antilinear in y."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return complex(np.sum(x * np.conj(y)))


def real_inner(x: np.ndarray, y: np.ndarray) -> float:
    """Re<x, y>, equal to the R^{2n} dot product of the realifications."""
    return inner(x, y).real


def imag_inner(x: np.ndarray, y: np.ndarray) -> float:
    """Im<x, y>, equal to <iota(x), J iota(y)> in R^{2n}."""
    return inner(x, y).imag


def iota(x: np.ndarray) -> np.ndarray:
    """Realify: x in C^n -> (Re x | Im x) in R^{2n}. Norm preserving."""
    x = np.asarray(x, dtype=np.complex128)
    return np.concatenate([x.real, x.imag])


def iota_inv(xi: np.ndarray) -> np.ndarray:
    """Inverse realification: (u | v) -> u + iv."""
    xi = np.asarray(xi, dtype=np.float64)
    n = xi.size // 2
    return xi[:n] + 1j * xi[n:]


def apply_J(xi: np.ndarray) -> np.ndarray:
    """The block map J(u | v) = (-v | u); satisfies J(iota(x)) = iota(ix) and J^2 = -1."""
    xi = np.asarray(xi, dtype=np.float64)
    n = xi.size // 2
    return np.concatenate([-xi[n:], xi[:n]])


def fix_phase(x: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude entry is real positive.

    Deterministic tie-break: the first entry attaining the maximum modulus.
    Zero vectors are returned unchanged.
    """
    x = np.asarray(x, dtype=np.complex128)
    k = int(np.argmax(np.abs(x)))
    pivot = x[k]
    if pivot == 0:
        return x.copy()
    return x * (np.conj(pivot) / abs(pivot))


def align_phase(x_hat: np.ndarray, x_ref: np.ndarray) -> np.ndarray:
    """Rotate x_hat by the phase that minimizes ||e^{i phi} x_hat - x_ref||.

    The minimizer makes <aligned, x_ref> real nonnegative. If the two vectors
    are orthogonal the phase is undetermined and x_hat is returned unchanged.
    """
    ip = inner(x_ref, x_hat)
    if ip == 0:
        return np.asarray(x_hat, dtype=np.complex128).copy()
    return np.asarray(x_hat) * (ip / abs(ip))

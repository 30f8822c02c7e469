"""Frame construction, validation, and cached realified measurement operators.

A frame is an ordered spanning set {f_1, ..., f_m} in C^n, m >= n. Each
frame vector carries a realified rank-2 operator

    Phi_k = phi_k phi_k^T + (J phi_k)(J phi_k)^T,   phi_k = iota(f_k),

which acts on R^{2n} and satisfies <Phi_k iota(x), iota(x)> = |<x, f_k>|^2.
The (m, 2n) arrays phi_k and J phi_k are cached at construction; the dense
(2n, 2n) operators are assembled on demand.
"""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

__all__ = [
    "Frame",
    "make_frame",
    "random_gaussian_frame",
    "frame_bounds",
    "is_full_spark",
    "save_frame_csv",
    "load_frame_csv",
]

# Frames with smaller least singular value of the synthesis matrix are
# rejected as non-spanning.
SPAN_TOL = 1e-10

FULL_SPARK_BUDGET = 10**6


class Frame:
    """An ordered frame with cached realifications.

    Attributes
    ----------
    vectors : (m, n) complex array, row k = f_k.
    phi : (m, 2n) float array, row k = iota(f_k).
    jphi : (m, 2n) float array, row k = J iota(f_k).
    """

    def __init__(self, vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=np.complex128)
        if vectors.ndim != 2:
            raise ValueError(f"expected an (m, n) array, got shape {vectors.shape}")
        m, n = vectors.shape
        if m < n or n < 1:
            raise ValueError(f"need m >= n >= 1 frame vectors, got m={m}, n={n}")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("frame vectors have non-finite entries")
        smin = np.linalg.svd(vectors, compute_uv=False)[-1]
        if smin <= SPAN_TOL:
            raise ValueError(
                f"vectors do not span C^{n}: smallest singular value {smin:g}"
            )
        self.vectors = vectors
        self.vectors.setflags(write=False)
        self.phi = np.hstack([vectors.real, vectors.imag])
        self.jphi = np.hstack([-vectors.imag, vectors.real])
        self.phi.setflags(write=False)
        self.jphi.setflags(write=False)
        self._phi_stack: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    @property
    def redundancy(self) -> float:
        return self.m / self.n

    def coeffs(self, x: np.ndarray) -> np.ndarray:
        """Frame coefficients <x, f_k> for all k."""
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.n,):
            raise ValueError(f"expected a vector of dimension {self.n}, got {x.shape}")
        return self.vectors.conj() @ x

    def apply_phi(self, xi: np.ndarray) -> np.ndarray:
        """All products Phi_k xi as the rows of an (m, 2n) array.

        Uses Phi_k xi = <xi, phi_k> phi_k + <xi, J phi_k> J phi_k, avoiding
        the dense operators.
        """
        xi = np.asarray(xi, dtype=np.float64)
        a = self.phi @ xi
        b = self.jphi @ xi
        return a[:, None] * self.phi + b[:, None] * self.jphi

    def phi_matrix(self, k: int) -> np.ndarray:
        """Dense 2n x 2n operator Phi_k."""
        p = self.phi[k]
        jp = self.jphi[k]
        return np.outer(p, p) + np.outer(jp, jp)

    def phi_stack(self) -> np.ndarray:
        """Dense (m, 2n, 2n) stack of all Phi_k, built once and memoized."""
        if self._phi_stack is None:
            stack = np.einsum("ki,kj->kij", self.phi, self.phi)
            stack += np.einsum("ki,kj->kij", self.jphi, self.jphi)
            stack.setflags(write=False)
            self._phi_stack = stack
        return self._phi_stack

    def weighted_phi_sum(self, w: np.ndarray) -> np.ndarray:
        """sum_k w_k Phi_k as a dense 2n x 2n matrix (equals tau(sum w_k F_k))."""
        w = np.asarray(w, dtype=np.float64)
        return self.phi.T @ (w[:, None] * self.phi) + self.jphi.T @ (w[:, None] * self.jphi)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Frame(m={self.m}, n={self.n})"


def make_frame(vectors) -> Frame:
    """Validate and wrap an (m, n) array of frame vectors."""
    return Frame(np.asarray(vectors, dtype=np.complex128))


def random_gaussian_frame(n: int, m: int, seed) -> Frame:
    """Frame of m unit-norm vectors in C^n with i.i.d. standard complex
    Gaussian entries (real and imaginary parts each N(0,1)) before
    normalization. Deterministic given the seed."""
    if n < 1 or m < n:
        raise ValueError(f"need m >= n >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    vecs = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return Frame(vecs)


def frame_bounds(frame: Frame) -> tuple[float, float]:
    """Optimal frame bounds (A, B): the extreme eigenvalues of sum_k f_k f_k*."""
    s = frame.vectors.T @ frame.vectors.conj()
    w = np.linalg.eigvalsh(0.5 * (s + s.conj().T))
    return float(w[0]), float(w[-1])


def is_full_spark(frame: Frame, tol: float = 1e-10) -> bool:
    """True iff every n-subset of the frame vectors is linearly independent.

    Exhaustive over all C(m, n) subsets; refuses to run past
    FULL_SPARK_BUDGET subsets.
    """
    m, n = frame.m, frame.n
    total = comb(m, n)
    if total > FULL_SPARK_BUDGET:
        raise ValueError(
            f"full-spark check needs {total} subsets, over the budget of {FULL_SPARK_BUDGET}"
        )
    for idx in combinations(range(m), n):
        sub = frame.vectors[list(idx), :]
        if np.linalg.svd(sub, compute_uv=False)[-1] <= tol:
            return False
    return True


def save_frame_csv(frame: Frame, path) -> None:
    """Write one frame vector per row: Re f_k(1), Im f_k(1), ..., Re f_k(n), Im f_k(n)."""
    m, n = frame.m, frame.n
    flat = np.empty((m, 2 * n))
    flat[:, 0::2] = frame.vectors.real
    flat[:, 1::2] = frame.vectors.imag
    with open(path, "w", newline="") as fh:
        for row in flat:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def load_frame_csv(path) -> Frame:
    """Read a frame written by save_frame_csv."""
    flat = np.loadtxt(path, delimiter=",", ndmin=2)
    if flat.shape[1] % 2 != 0:
        raise ValueError("frame CSV must have an even number of columns")
    return Frame(flat[:, 0::2] + 1j * flat[:, 1::2])

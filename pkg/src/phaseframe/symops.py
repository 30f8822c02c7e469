"""Self-adjoint operator algebra on C^n and its realification.

Covers the rank-one and symmetric outer products, the signed-rank cones
S^{p,q} (at most p positive / q negative eigenvalues), the closed-form
spectral data of rank-<=2 operators u~v = (uv* + vu*)/2, the realification
map tau : Sym(H) -> Sym(H_R) with its doubled spectrum, and sampled elements
of the pseudo-unitary group U(1,1;K) that parametrizes the factorization
ambiguity of u~v.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import fix_phase, inner, iota

__all__ = [
    "Signature",
    "S11Decomposition",
    "hermitian",
    "real_symmetric",
    "rank_one",
    "sym_outer",
    "sym_outer_traces",
    "s11_eigenvalues_pair",
    "s11_spectral",
    "s11_spectral_pair",
    "s11_factor",
    "signature",
    "nuclear_norm",
    "nuclear_norm_pair",
    "tau",
    "tau_vec",
    "sample_u11k",
    "U11K_FORM",
]

# The 2x2 quadratic form K defining U(1,1;K) = {A : A* K A = K}.
U11K_FORM = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)

_V_EQUIV = np.array([[1.0, 1.0], [-1.0, 1.0]], dtype=np.complex128) / np.sqrt(2.0)


@dataclass(frozen=True)
class Signature:
    """Eigenvalue sign counts of a self-adjoint operator at a tolerance."""

    p: int
    q: int
    tol: float


@dataclass(frozen=True)
class S11Decomposition:
    """Spectral data of a rank-<=2 operator with a_plus >= 0 >= a_minus.

    ``e1`` and ``e2`` are orthonormal eigenvectors for a_plus and a_minus;
    the input is a_plus e1 e1* + a_minus e2 e2*.
    """

    a_plus: float
    a_minus: float
    e1: np.ndarray
    e2: np.ndarray


def hermitian(matrix) -> np.ndarray:
    """Symmetrize (M + M*)/2 and reject inputs that are far from Hermitian.

    The check is relative: max|M - M*| <= 1e-12 * ||M|| (spectral-ish scale
    via the max modulus of the entries).
    """
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = np.max(np.abs(m)) if m.size else 0.0
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if scale > 0 and dev > 1e-12 * scale:
        raise ValueError(f"matrix is not Hermitian: max|M - M*| = {dev:g}")
    return 0.5 * (m + m.conj().T)


def real_symmetric(matrix) -> np.ndarray:
    """Symmetrize a real matrix, rejecting inputs far from symmetric."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = np.max(np.abs(m)) if m.size else 0.0
    dev = np.max(np.abs(m - m.T)) if m.size else 0.0
    if scale > 0 and dev > 1e-12 * scale:
        raise ValueError(f"matrix is not symmetric: max|M - M^T| = {dev:g}")
    return 0.5 * (m + m.T)


def rank_one(x: np.ndarray) -> np.ndarray:
    """The operator xx*: (xx*)_{jk} = x_j conj(x_k). Trace ||x||^2, rank <= 1."""
    x = np.asarray(x, dtype=np.complex128)
    return np.outer(x, np.conj(x))


def sym_outer(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Symmetric outer product u~v = (uv* + vu*)/2.

    R-bilinear, symmetric in (u, v), and equal to uu* when v = u. Always an
    element of S^{1,1}.
    """
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    uv = np.outer(u, np.conj(v))
    return 0.5 * (uv + uv.conj().T)


def sym_outer_traces(u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """(tr T, tr T^2) of T = u~v without forming the matrix.

    tr T   = Re<u, v>
    tr T^2 = (||u||^2 ||v||^2 + (Re<u,v>)^2 - (Im<u,v>)^2) / 2
    """
    ip = inner(u, v)
    nu2 = float(np.vdot(u, u).real)
    nv2 = float(np.vdot(v, v).real)
    return ip.real, 0.5 * (nu2 * nv2 + ip.real**2 - ip.imag**2)


def s11_eigenvalues_pair(u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """Closed-form nonzero eigenvalues (a_plus, a_minus) of u~v.

    a_pm = ( Re<u,v> +- sqrt(||u||^2 ||v||^2 - (Im<u,v>)^2) ) / 2,
    with a_plus >= 0 >= a_minus. This is the Gram-route 2x2 eigenproblem on
    span{u, v}, solved symbolically.
    """
    ip = inner(u, v)
    nu2 = float(np.vdot(u, u).real)
    nv2 = float(np.vdot(v, v).real)
    # Clip guards roundoff when |<u,v>| ~ ||u|| ||v|| (colinear inputs).
    disc = np.sqrt(max(nu2 * nv2 - ip.imag**2, 0.0))
    return 0.5 * (ip.real + disc), 0.5 * (ip.real - disc)


def nuclear_norm(T: np.ndarray) -> float:
    """Nuclear (trace) norm of a Hermitian matrix: sum |eigenvalues|."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(T))))


def nuclear_norm_pair(x: np.ndarray, y: np.ndarray) -> float:
    """||xx* - yy*||_1 = sqrt((||x||^2 + ||y||^2)^2 - 4 |<x,y>|^2), matrix-free."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    nx2 = float(np.vdot(x, x).real)
    ny2 = float(np.vdot(y, y).real)
    ip = inner(x, y)
    return float(np.sqrt(max((nx2 + ny2) ** 2 - 4.0 * abs(ip) ** 2, 0.0)))


def _check_s11(eigvals: np.ndarray, rel_tol: float) -> None:
    """Reject spectra with more than two significant eigenvalues."""
    mags = np.sort(np.abs(eigvals))[::-1]
    scale = mags[0] if mags.size else 0.0
    if mags.size > 2 and scale > 0 and mags[2] > rel_tol * scale:
        raise ValueError(
            f"operator is not in S^(1,1) at tolerance {rel_tol:g}: "
            f"third-largest |eigenvalue| = {mags[2]:g}, scale = {scale:g}"
        )


def s11_spectral(T: np.ndarray, rel_tol: float = 1e-10) -> S11Decomposition:
    """Spectral decomposition of a (numerically) rank-<=2 operator.

    All but the extreme two eigenvalues must vanish relative to ||T||,
    otherwise the input is rejected. The returned eigenvectors carry the
    deterministic phase convention (largest entry real positive).
    """
    T = hermitian(T)
    w, V = np.linalg.eigh(T)
    _check_s11(w, rel_tol)
    a_plus, a_minus = float(w[-1]), float(w[0])
    e1 = fix_phase(V[:, -1])
    e2 = fix_phase(V[:, 0])
    if a_plus < 0 and abs(a_plus) <= rel_tol * abs(a_minus):
        a_plus = 0.0
    if a_minus > 0 and abs(a_minus) <= rel_tol * abs(a_plus):
        a_minus = 0.0
    return S11Decomposition(a_plus=a_plus, a_minus=a_minus, e1=e1, e2=e2)


def s11_spectral_pair(u: np.ndarray, v: np.ndarray) -> S11Decomposition:
    """Spectral decomposition of u~v via the 2x2 problem on span{u, v}.

    O(n) instead of a dense eigensolve; falls back to the dense route when
    u, v are numerically colinear (the restriction basis degenerates).
    """
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    nu = np.linalg.norm(u)
    if nu == 0:
        return s11_spectral(sym_outer(u, v))
    q1 = u / nu
    v_perp = v - inner(v, q1) * q1
    nvp = np.linalg.norm(v_perp)
    if nvp <= 1e-12 * max(np.linalg.norm(v), nu):
        return s11_spectral(sym_outer(u, v))
    q2 = v_perp / nvp
    # Coordinates of u, v in the orthonormal pair (q1, q2); the restriction
    # of u~v to that plane is the 2x2 symmetric outer product of them.
    cu = np.array([inner(u, q1), inner(u, q2)])
    cv = np.array([inner(v, q1), inner(v, q2)])
    g = 0.5 * (np.outer(cu, np.conj(cv)) + np.outer(cv, np.conj(cu)))
    w, W = np.linalg.eigh(g)
    e1 = fix_phase(W[0, 1] * q1 + W[1, 1] * q2)
    e2 = fix_phase(W[0, 0] * q1 + W[1, 0] * q2)
    return S11Decomposition(a_plus=float(w[1]), a_minus=float(w[0]), e1=e1, e2=e2)


def s11_factor(T: np.ndarray, rel_tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """The canonical factorization T = u0~v0 of T in S^{1,1}.

    With T = a1 e1 e1* - a2 e2 e2* (a1, a2 >= 0, e1 _|_ e2),
      u0 = sqrt(a1) e1 + sqrt(a2) e2,   v0 = sqrt(a1) e1 - sqrt(a2) e2.
    Then ||u0|| = ||v0|| = sqrt(||T||_1) and <u0, v0> = tr T (real).
    """
    dec = s11_spectral(T, rel_tol=rel_tol)
    s1 = np.sqrt(max(dec.a_plus, 0.0))
    s2 = np.sqrt(max(-dec.a_minus, 0.0))
    u0 = s1 * dec.e1 + s2 * dec.e2
    v0 = s1 * dec.e1 - s2 * dec.e2
    return u0, v0


def signature(T: np.ndarray, tol: float) -> Signature:
    """Count eigenvalues above tol and below -tol (S^{p,q} membership data)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = np.linalg.eigvalsh(hermitian(T))
    return Signature(p=int(np.sum(w > tol)), q=int(np.sum(w < -tol)), tol=tol)


def tau(T: np.ndarray) -> np.ndarray:
    """Realify a Hermitian operator: the 2n x 2n symmetric matrix with
    tau(T) iota(x) = iota(T x).

    For T = A + iB (A = A^T, B = -B^T real) this is the block matrix
    [[A, -B], [B, A]]. Each eigenvalue of T appears twice in tau(T), and
    tr{tau(T) tau(S)} = 2 tr{TS}.
    """
    T = np.asarray(T, dtype=np.complex128)
    a = T.real
    b = T.imag
    return np.block([[a, -b], [b, a]])


def sample_u11k(
    rng: np.random.Generator,
    t: float | None = None,
    theta1: float | None = None,
    theta2: float | None = None,
    t_scale: float = 1.0,
) -> np.ndarray:
    """Draw A in U(1,1;K), i.e. A* K A = K with K = [[0,1],[1,0]].

    Built as A = V* B V from B = diag(e^{i theta1}, e^{i theta2}) *
    [[cosh t, sinh t], [sinh t, cosh t]] in U(1,1), with V the fixed unitary
    intertwining the two groups. Unset parameters are drawn from rng
    (t ~ N(0, t_scale^2), phases uniform). t = theta1 = theta2 = 0 gives the
    identity.
    """
    if t is None:
        t = float(rng.normal(scale=t_scale))
    if theta1 is None:
        theta1 = float(rng.uniform(0.0, 2.0 * np.pi))
    if theta2 is None:
        theta2 = float(rng.uniform(0.0, 2.0 * np.pi))
    ch, sh = np.cosh(t), np.sinh(t)
    b = np.diag([np.exp(1j * theta1), np.exp(1j * theta2)]) @ np.array(
        [[ch, sh], [sh, ch]], dtype=np.complex128
    )
    return _V_EQUIV.conj().T @ b @ _V_EQUIV


def tau_vec(x: np.ndarray) -> np.ndarray:
    """tau(xx*) = xi xi^T + (J xi)(J xi)^T with xi = iota(x), formed directly."""
    xi = iota(x)
    n = xi.size // 2
    jxi = np.concatenate([-xi[n:], xi[:n]])
    return np.outer(xi, xi) + np.outer(jxi, jxi)

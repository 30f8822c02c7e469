"""Fisher information and the Cramer-Rao lower bound under phase fixing.

For the AWGN model y = alpha(x) + nu the Fisher information of the
realified signal zeta = iota(x) is I(zeta) = (4/sigma^2) R(zeta). It is
singular along J zeta (the phase direction), so estimators are constrained
by an oracle direction z0 with <x, z0> real positive: projecting with
Pi = 1 - (J psi0)(J psi0)^T, psi0 = iota(z0), gives the invertible-on-range
operator I~ = Pi I Pi whose pseudoinverse is the CRLB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import R_matrix
from .frames import Frame
from .hilbert import apply_J, inner, iota

__all__ = [
    "CrlbResult",
    "DegenerateFisherError",
    "fisher_matrix",
    "phase_projector",
    "projected_fisher",
    "crlb_bound",
]


class DegenerateFisherError(RuntimeError):
    """Projected Fisher matrix has rank below 2n-1 (injectivity failure signal)."""


@dataclass
class CrlbResult:
    """CRLB data at one (x, sigma) configuration.

    mse_lower = tr(crlb) bounds the MSE of any unbiased phase-constrained
    estimator from below; mse_upper_efficient is the efficient-estimator
    ceiling (2n-1) sigma^2 / (4 a0_opt |<x,z0>|^2), present when a0_opt was
    supplied.
    """

    fisher: np.ndarray
    crlb: np.ndarray
    mse_lower: float
    mse_upper_efficient: float | None
    rank_used: int
    tol: float


def fisher_matrix(frame: Frame, x: np.ndarray, sigma: float) -> np.ndarray:
    """I(zeta) = (4/sigma^2) R(zeta), zeta = iota(x)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = np.asarray(x, dtype=np.complex128)
    if not np.any(x):
        raise ValueError("x must be nonzero")
    return (4.0 / sigma**2) * R_matrix(frame, iota(x))


def phase_projector(z0: np.ndarray) -> np.ndarray:
    """Pi = 1 - (J psi0)(J psi0)^T for unit z0; rank 2n-1, annihilates J psi0."""
    z0 = np.asarray(z0, dtype=np.complex128)
    nrm = np.linalg.norm(z0)
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError(f"z0 must be unit norm, got ||z0|| = {nrm:.12g}")
    jpsi = apply_J(iota(z0))
    return np.eye(jpsi.size) - np.outer(jpsi, jpsi)


def _check_alignment(x: np.ndarray, z0: np.ndarray) -> complex:
    ip = inner(x, z0)
    tol = 1e-10 * max(1.0, float(np.linalg.norm(x)))
    if abs(ip.imag) > tol:
        raise ValueError(
            f"phase misalignment: Im<x, z0> = {ip.imag:g}; align the phase first"
        )
    if ip.real <= 0:
        raise ValueError("need <x, z0> real positive")
    return ip


def projected_fisher(
    frame: Frame, x: np.ndarray, z0: np.ndarray, sigma: float
) -> np.ndarray:
    """I~(zeta) = Pi I(zeta) Pi. Caller must supply phase-aligned x, unit z0."""
    _check_alignment(x, z0)
    pi = phase_projector(z0)
    fisher = fisher_matrix(frame, x, sigma)
    out = pi @ fisher @ pi
    return 0.5 * (out + out.T)


def crlb_bound(
    frame: Frame,
    x: np.ndarray,
    z0: np.ndarray,
    sigma: float,
    tol: float = 1e-10,
    a0_opt: float | None = None,
) -> CrlbResult:
    """CRLB = pseudoinverse of the projected Fisher matrix, with its trace.

    Eigenvalues below tol * lambda_max are treated as zero. Raises
    DegenerateFisherError when fewer than 2n-1 eigenvalues survive the
    cutoff, which signals an injectivity failure at this signal.
    """
    ip = _check_alignment(x, z0)
    fisher = projected_fisher(frame, x, z0, sigma)
    w, v = np.linalg.eigh(fisher)
    lam_max = w[-1]
    keep = w > tol * lam_max if lam_max > 0 else np.zeros_like(w, dtype=bool)
    rank = int(np.sum(keep))
    n2 = fisher.shape[0]
    if rank < n2 - 1:
        raise DegenerateFisherError(
            f"projected Fisher rank {rank} < {n2 - 1} at tol {tol:g}"
        )
    inv_w = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    crlb = (v * inv_w) @ v.T
    crlb = 0.5 * (crlb + crlb.T)
    mse_upper = None
    if a0_opt is not None:
        mse_upper = (n2 - 1) * sigma**2 / (4.0 * a0_opt * ip.real**2)
    return CrlbResult(
        fisher=fisher,
        crlb=crlb,
        mse_lower=float(np.trace(crlb)),
        mse_upper_efficient=mse_upper,
        rank_used=rank,
        tol=tol,
    )

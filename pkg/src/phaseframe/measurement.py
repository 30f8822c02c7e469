"""The nonlinear analysis map, its linearization, and the AWGN channel.

Measurements are the squared frame-coefficient magnitudes

    alpha(x)_k = |<x, f_k>|^2,

observed as y = alpha(x) + nu with nu ~ N(0, sigma^2 I). alpha factors
through the linear map calA(T)_k = <T f_k, f_k> on self-adjoint operators:
alpha(x) = calA(xx*).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import Frame

__all__ = [
    "NoiseSpec",
    "alpha",
    "calA",
    "calA_pair",
    "add_noise",
    "add_noise_rng",
    "sigma_for_snr",
    "snr_db_for_sigma",
]


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise: standard deviation and PRNG seed."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


def alpha(frame: Frame, x: np.ndarray) -> np.ndarray:
    """Squared magnitudes |<x, f_k>|^2; invariant under x -> e^{i phi} x."""
    c = frame.coeffs(x)
    return np.abs(c) ** 2


def calA(frame: Frame, T: np.ndarray) -> np.ndarray:
    """The linear map (calA(T))_k = <T f_k, f_k> = tr{T f_k f_k*}.

    Real-valued on Hermitian input; calA(xx*) = alpha(x).
    """
    T = np.asarray(T, dtype=np.complex128)
    if T.shape != (frame.n, frame.n):
        raise ValueError(f"expected a {frame.n} x {frame.n} operator, got {T.shape}")
    # <T f_k, f_k> = conj(f_k)^T T f_k, batched over k.
    vals = np.einsum("ki,ij,kj->k", frame.vectors.conj(), T, frame.vectors)
    return vals.real


def calA_pair(frame: Frame, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """calA(u~v) without forming the operator: Re(<u,f_k> <f_k,v>) per k."""
    cu = frame.coeffs(u)
    cv = frame.coeffs(v)
    return (cu * np.conj(cv)).real


def add_noise(y: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """y + i.i.d. N(0, sigma^2) noise; entries may go negative. Deterministic
    given spec.seed; sigma = 0 returns a copy."""
    y = np.asarray(y, dtype=np.float64)
    if spec.sigma == 0:
        return y.copy()
    rng = np.random.default_rng(spec.seed)
    return y + rng.normal(scale=spec.sigma, size=y.shape)


def add_noise_rng(y: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """add_noise with an explicitly passed generator (for stream plumbing)."""
    y = np.asarray(y, dtype=np.float64)
    if sigma == 0:
        return y.copy()
    return y + rng.normal(scale=sigma, size=y.shape)


def sigma_for_snr(frame: Frame, x: np.ndarray, snr_db: float) -> float:
    """Noise level realizing a target SNR for the signal x.

    SNR = sum_k |<x,f_k>|^4 / (m sigma^2) and SNRdB = 10 log10 SNR, so
    sigma = sqrt(sum_k |<x,f_k>|^4 / (m 10^{snr_db/10})).
    """
    a = alpha(frame, x)
    power = float(np.sum(a**2))
    if power == 0:
        raise ValueError("signal is zero (or orthogonal to every frame vector)")
    return float(np.sqrt(power / (frame.m * 10.0 ** (snr_db / 10.0))))


def snr_db_for_sigma(frame: Frame, x: np.ndarray, sigma: float) -> float:
    """Inverse of sigma_for_snr."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    a = alpha(frame, x)
    power = float(np.sum(a**2))
    return float(10.0 * np.log10(power / (frame.m * sigma**2)))

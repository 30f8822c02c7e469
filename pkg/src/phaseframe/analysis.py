"""Injectivity diagnostics and deterministic stability bounds.

The central object is the positive semidefinite matrix

    R(xi) = sum_k Phi_k xi xi^T Phi_k   on R^{2n},

whose rank equals 2n-1 for every xi != 0 exactly when the measurement map
is injective. Its second-smallest eigenvalue, minimized over the unit
sphere, is the optimal lower Lipschitz constant a0_opt; the maximum of
||R(xi)|| gives the upper constant B0^2. Both extrema are nonconvex sphere
problems, so this module estimates them by sphere scanning plus
multi-restart projected gradient polish and reports them as estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import Frame
from .measurement import alpha

__all__ = [
    "StabilityReport",
    "LipschitzCheck",
    "R_matrix",
    "R_apply",
    "injectivity_rank_test",
    "sphere_scan",
    "estimate_a0_opt",
    "lipschitz_sandwich_check",
    "estimate_A3",
]


@dataclass
class StabilityReport:
    """Estimated bi-Lipschitz constants of the measurement map.

    a0_opt is an upper estimate of min_{|xi|=1} a_{2n-1}(R(xi)) (descent can
    only overshoot the true minimum); B0 is a lower estimate of the true
    upper bound. A0 = sqrt(a0_opt).
    """

    a0_opt: float
    A0: float
    B0: float
    argmin_xi: np.ndarray
    rank_deficit_found: bool
    samples: int
    restarts: int


@dataclass
class LipschitzCheck:
    """Observed ratio range ||alpha(x)-alpha(y)|| / ||xx*-yy*||_1 over random pairs."""

    min_ratio: float
    max_ratio: float
    argmin_pair: tuple[np.ndarray, np.ndarray]
    argmax_pair: tuple[np.ndarray, np.ndarray]
    pairs_used: int
    A0: float
    B0: float

    @property
    def upper_ok(self) -> bool:
        return self.max_ratio <= self.B0 * (1.0 + 1e-8)

    @property
    def lower_ok(self) -> bool:
        return self.min_ratio >= self.A0 * (1.0 - 1e-8)


def R_matrix(frame: Frame, xi: np.ndarray) -> np.ndarray:
    """R(xi) = sum_k v_k v_k^T with v_k = Phi_k xi. PSD, kernel contains J xi,
    homogeneous of degree 2 in xi."""
    xi = np.asarray(xi, dtype=np.float64)
    if xi.shape != (2 * frame.n,):
        raise ValueError(f"expected a vector of dimension {2 * frame.n}, got {xi.shape}")
    v = frame.apply_phi(xi)
    return v.T @ v


def R_apply(frame: Frame, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Matrix-free product R(xi) eta via the rank-2 expansion of each Phi_k."""
    v = frame.apply_phi(xi)
    return v.T @ (v @ np.asarray(eta, dtype=np.float64))


def injectivity_rank_test(
    frame: Frame, xi: np.ndarray, tol: float = 1e-8
) -> tuple[int, bool]:
    """Numerical rank of R(xi) and whether it equals 2n-1.

    Rank counts eigenvalues above tol * lambda_max. J xi always lies in the
    kernel, so the rank never exceeds 2n-1.
    """
    xi = np.asarray(xi, dtype=np.float64)
    if not np.any(xi):
        raise ValueError("xi must be nonzero")
    w = np.linalg.eigvalsh(R_matrix(frame, xi))
    lam_max = w[-1]
    rank = int(np.sum(w > tol * lam_max)) if lam_max > 0 else 0
    return rank, rank == 2 * frame.n - 1


def _batched_extremes(frame: Frame, xis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(a_{2n-1}(R(xi)), ||R(xi)||) for a batch of rows xi."""
    a = xis @ frame.phi.T
    b = xis @ frame.jphi.T
    v = a[:, :, None] * frame.phi[None, :, :] + b[:, :, None] * frame.jphi[None, :, :]
    r = np.einsum("bki,bkj->bij", v, v)
    w = np.linalg.eigvalsh(r)
    return w[:, 1], w[:, -1]


def sphere_scan(
    frame: Frame, num_samples: int, seed, chunk: int = 4096
) -> tuple[float, np.ndarray, float, np.ndarray]:
    """Scan random unit xi: returns (min a_{2n-1}, argmin, max ||R||, argmax).

    Chunked so memory stays bounded at large sample counts.
    """
    rng = np.random.default_rng(seed)
    d = 2 * frame.n
    best_min, best_max = np.inf, -np.inf
    arg_min = arg_max = None
    remaining = int(num_samples)
    while remaining > 0:
        b = min(chunk, remaining)
        xis = rng.normal(size=(b, d))
        xis /= np.linalg.norm(xis, axis=1, keepdims=True)
        lo, hi = _batched_extremes(frame, xis)
        i = int(np.argmin(lo))
        j = int(np.argmax(hi))
        if lo[i] < best_min:
            best_min, arg_min = float(lo[i]), xis[i].copy()
        if hi[j] > best_max:
            best_max, arg_max = float(hi[j]), xis[j].copy()
        remaining -= b
    return best_min, arg_min, best_max, arg_max


def _eig_and_grad(frame: Frame, xi: np.ndarray, which: int) -> tuple[float, np.ndarray]:
    """Eigenvalue (ascending index `which`) of R(xi) and its gradient in xi.

    For a simple eigenvalue lam with unit eigenvector w,
    grad lam = 2 sum_k <Phi_k xi, w> Phi_k w.
    """
    v = frame.apply_phi(xi)
    r = v.T @ v
    w, vecs = np.linalg.eigh(r)
    wv = vecs[:, which]
    s = v @ wv
    pw = frame.phi @ wv
    jpw = frame.jphi @ wv
    grad = 2.0 * (frame.phi.T @ (s * pw) + frame.jphi.T @ (s * jpw))
    return float(w[which]), grad


def _sphere_descend(
    frame: Frame,
    xi0: np.ndarray,
    which: int,
    sign: float,
    iters: int,
) -> tuple[float, np.ndarray]:
    """Projected gradient walk on the unit sphere.

    sign = +1 minimizes eigenvalue `which` of R(xi); sign = -1 maximizes it.
    Backtracks on the step size and stops once the tangential gradient or
    the step collapses.
    """
    xi = np.asarray(xi0, dtype=np.float64)
    xi = xi / np.linalg.norm(xi)
    f, g = _eig_and_grad(frame, xi, which)
    step = 1.0
    for _ in range(iters):
        g_tan = g - np.dot(g, xi) * xi
        gn = np.linalg.norm(g_tan)
        if gn <= 1e-13 * max(abs(f), 1e-30):
            break
        direction = -sign * g_tan / gn
        moved = False
        while step > 1e-14:
            cand = xi + step * direction
            cand /= np.linalg.norm(cand)
            f_c, g_c = _eig_and_grad(frame, cand, which)
            if sign * f_c < sign * f:
                xi, f, g = cand, f_c, g_c
                step *= 1.5
                moved = True
                break
            step *= 0.5
        if not moved:
            break
    return f, xi


def estimate_a0_opt(
    frame: Frame,
    restarts: int = 20,
    iters: int = 100,
    seed=0,
    samples: int = 2000,
    extra_starts: list[np.ndarray] | None = None,
) -> StabilityReport:
    """Estimate a0_opt = min_{|xi|=1} a_{2n-1}(R(xi)) and B0 = sqrt(max ||R||).

    Random sphere samples seed a multi-restart projected descent on the
    second-smallest eigenvalue (analytic eigenvector-sensitivity gradients);
    the spectral-norm maximum gets the same polish with the sign flipped.
    The minimum is an upper estimate of the true a0_opt and the maximum a
    lower estimate of the true B0^2; both are reported as estimates, with
    the optimizer metadata, never as certified bounds.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    d = 2 * frame.n

    scan_min, scan_argmin, scan_max, scan_argmax = sphere_scan(
        frame, max(samples, 1), rng
    )

    starts = [scan_argmin]
    if extra_starts:
        starts.extend(np.asarray(s, dtype=np.float64) for s in extra_starts)
    for _ in range(restarts):
        s = rng.normal(size=d)
        starts.append(s / np.linalg.norm(s))

    best_val, best_xi = scan_min, scan_argmin
    for s in starts:
        val, xi = _sphere_descend(frame, s, which=1, sign=+1.0, iters=iters)
        if val < best_val:
            best_val, best_xi = val, xi

    max_val = scan_max
    ascent_starts = [scan_argmax] + [starts[i] for i in range(1, min(len(starts), 5))]
    for s in ascent_starts:
        val, _ = _sphere_descend(frame, s, which=d - 1, sign=-1.0, iters=iters)
        max_val = max(max_val, val)

    # Recompute at the reported minimizer so report and matrix agree exactly.
    best_val = float(np.linalg.eigvalsh(R_matrix(frame, best_xi))[1])
    deficit = best_val <= 1e-10 * max_val
    return StabilityReport(
        a0_opt=best_val,
        A0=float(np.sqrt(max(best_val, 0.0))),
        B0=float(np.sqrt(max_val)),
        argmin_xi=best_xi,
        rank_deficit_found=deficit,
        samples=int(samples),
        restarts=int(restarts),
    )


def lipschitz_sandwich_check(
    frame: Frame, trials: int, A0: float, B0: float, seed
) -> LipschitzCheck:
    """Sample pairs (x, y) and compare the measurement-map ratio to [A0, B0].

    ratio = ||alpha(x) - alpha(y)|| / ||xx* - yy*||_1, with the nuclear norm
    evaluated matrix-free. Pairs on the same phase orbit (zero denominator)
    are skipped. Returns the observed extremes and the realizing pairs;
    violations of the lower end flag the A0 estimate, not the theorem.
    """
    rng = np.random.default_rng(seed)
    n = frame.n
    xs = rng.normal(size=(trials, n)) + 1j * rng.normal(size=(trials, n))
    ys = rng.normal(size=(trials, n)) + 1j * rng.normal(size=(trials, n))
    ax = np.abs(xs @ frame.vectors.conj().T) ** 2
    ay = np.abs(ys @ frame.vectors.conj().T) ** 2
    num = np.linalg.norm(ax - ay, axis=1)
    nx2 = np.sum(np.abs(xs) ** 2, axis=1)
    ny2 = np.sum(np.abs(ys) ** 2, axis=1)
    ip = np.sum(xs * np.conj(ys), axis=1)
    den = np.sqrt(np.clip((nx2 + ny2) ** 2 - 4.0 * np.abs(ip) ** 2, 0.0, None))
    keep = den > 1e-12 * (nx2 + ny2)
    ratios = num[keep] / den[keep]
    idx = np.flatnonzero(keep)
    i_min = idx[int(np.argmin(ratios))]
    i_max = idx[int(np.argmax(ratios))]
    return LipschitzCheck(
        min_ratio=float(np.min(ratios)),
        max_ratio=float(np.max(ratios)),
        argmin_pair=(xs[i_min], ys[i_min]),
        argmax_pair=(xs[i_max], ys[i_max]),
        pairs_used=int(np.sum(keep)),
        A0=float(A0),
        B0=float(B0),
    )


def sample_s21(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """One random W in S^{2,1} with ||W||_1 = 1.

    Returns (q, lam): a random orthonormal triple q (n x 3 columns) and
    eigenvalues lam = (d1, d2, -d3) with d ~ Dirichlet(1,1,1), so two
    nonnegative and one nonpositive eigenvalue summing to 1 in modulus.
    """
    if n < 3:
        raise ValueError("S^{2,1} sampling needs n >= 3")
    g = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    q, _ = np.linalg.qr(g)
    d = rng.dirichlet(np.ones(3))
    lam = np.array([d[0], d[1], -d[2]])
    return q, lam


def estimate_A3(frame: Frame, samples: int, seed) -> float:
    """Upper estimate of A3 = inf{ ||calA(W)||^2 : W in S^{2,1}, ||W||_1 = 1 }.

    Monte-Carlo minimum over sampled W; the draw order is sequential in the
    generator, so growing `samples` under the same seed extends (never
    reshuffles) the sample set and the estimate is monotone nonincreasing.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(samples):
        q, lam = sample_s21(rng, frame.n)
        aw = np.zeros(frame.m)
        for j in range(3):
            aw += lam[j] * alpha(frame, q[:, j])
        best = min(best, float(np.sum(aw**2)))
    return best

"""Iterative regularized least-square reconstruction.

Minimizes over u the regularized misfit

    J(u, v, lambda, mu) = sum_k |y_k - Re(<u,f_k><f_k,v>)|^2
                          + lambda ||u||^2 + mu ||u - v||^2 + lambda ||v||^2

with v frozen at the current iterate, which is a quadratic in the realified
unknown xi = iota(u): the minimizer solves

    ( sum_k Phi_k zeta zeta^T Phi_k + (lambda + mu) 1 ) xi
        = ( sum_k y_k Phi_k + mu 1 ) zeta,      zeta = iota(x^(t)).

The solution is rescaled to the geometric mean of the iterate norms and
(lambda, mu) anneal geometrically, mu held above a floor. Initialization
takes the top eigenpair of Q = sum_k y_k f_k f_k*.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .frames import Frame
from .hilbert import align_phase, inner, iota, iota_inv, fix_phase
from .measurement import alpha, calA, calA_pair
from .symops import (
    hermitian,
    rank_one,
    s11_eigenvalues_pair,
    s11_spectral_pair,
    sym_outer,
    sym_outer_traces,
)

__all__ = [
    "IrlsConfig",
    "IrlsState",
    "IrlsTrace",
    "IrlsResult",
    "Initialization",
    "RobustnessReport",
    "build_Q",
    "initialize",
    "irls_step",
    "solve",
    "eval_J",
    "eval_J0",
    "eval_J123",
    "robustness_certificate",
]

_DB_FLOOR = 1e-300


def _db(v: float) -> float:
    return float(10.0 * np.log10(max(v, _DB_FLOOR)))


@dataclass(frozen=True)
class IrlsConfig:
    """Solver knobs.

    rho sets lambda0 = mu0 = rho * a1(Q); must be strictly inside (0, 1)
    since rho = 1 collapses the initial scale beta0 to zero. gamma is the
    geometric annealing rate. stop_mode: "lambda" stops at the lambda
    floor, "residual" at residual <= kappa * m * sigma^2 (needs sigma),
    "either" at the first of the two.
    """

    rho: float = 0.5
    gamma: float = 0.8
    lambda_min: float = 0.01
    mu_min: float = 1.0
    kappa: float = 3.0
    max_iters: int = 500
    stop_mode: str = "either"

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must be in (0, 1); rho = {self.rho} degenerates beta0")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        if self.lambda_min <= 0 or self.mu_min <= 0:
            raise ValueError("lambda_min and mu_min must be positive")
        if self.kappa < 1.0:
            raise ValueError("kappa must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.stop_mode not in ("lambda", "residual", "either"):
            raise ValueError(f"unknown stop_mode {self.stop_mode!r}")


@dataclass
class IrlsState:
    """One point of the iteration: the iterate, schedule values and monitors."""

    x: np.ndarray
    x_prev: np.ndarray | None
    lambda_t: float
    mu_t: float
    iter: int
    residual: float
    min_eig_Xt: float
    lambda0: float
    mu0: float


@dataclass
class IrlsTrace:
    """Per-iteration history, one entry per list element.

    residual is the data misfit ||y - alpha(x^(t))||^2 used by the residual
    stop; resid_X is ||y - calA(X^(t))||^2 with X^(t) = x^(t-1)~x^(t), the
    quantity plotted in the trace reports. err/frob_err track the truth when
    one was supplied (NaN otherwise).
    """

    iters: list[int] = field(default_factory=list)
    lams: list[float] = field(default_factory=list)
    mus: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    min_eigs: list[float] = field(default_factory=list)
    resid_X: list[float] = field(default_factory=list)
    err: list[float] = field(default_factory=list)
    frob_err: list[float] = field(default_factory=list)
    a1: float = float("nan")
    top_multiplicity: int = 0

    def append(self, state: IrlsState, resid_x: float, err: float, frob: float) -> None:
        self.iters.append(state.iter)
        self.lams.append(state.lambda_t)
        self.mus.append(state.mu_t)
        self.residuals.append(state.residual)
        self.min_eigs.append(state.min_eig_Xt)
        self.resid_X.append(resid_x)
        self.err.append(err)
        self.frob_err.append(frob)

    def to_csv(self, path) -> None:
        """Write columns iter,lambda,mu,residual_db,min_eig,err_db,frob_err_db."""
        with open(path, "w", newline="") as fh:
            fh.write("iter,lambda,mu,residual_db,min_eig,err_db,frob_err_db\n")
            for i in range(len(self.iters)):
                row = (
                    str(self.iters[i]),
                    format(self.lams[i], ".17g"),
                    format(self.mus[i], ".17g"),
                    format(_db(self.resid_X[i]), ".17g"),
                    format(self.min_eigs[i], ".17g"),
                    format(_db(self.err[i]), ".17g") if np.isfinite(self.err[i]) else "nan",
                    format(_db(self.frob_err[i]), ".17g") if np.isfinite(self.frob_err[i]) else "nan",
                )
                fh.write(",".join(row) + "\n")


@dataclass
class IrlsResult:
    x_hat: np.ndarray
    trace: IrlsTrace
    iterations: int
    stop_reason: str
    degenerate: bool = False


@dataclass
class Initialization:
    """Eigen-initialization data; degenerate means a1(Q) <= 0 (estimate 0)."""

    x0: np.ndarray
    lambda0: float
    mu0: float
    a1: float
    multiplicity: int
    degenerate: bool


class IrlsConfigError(RuntimeError):
    """Subproblem became singular; only possible when lambda_t + mu_t = 0."""


def build_Q(frame: Frame, y: np.ndarray) -> np.ndarray:
    """Q = sum_k y_k f_k f_k*. Hermitian, indefinite for noisy y."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (frame.m,):
        raise ValueError(f"expected {frame.m} measurements, got shape {y.shape}")
    q = frame.vectors.T @ (y[:, None] * frame.vectors.conj())
    return 0.5 * (q + q.conj().T)


def initialize(frame: Frame, y: np.ndarray, rho: float) -> Initialization:
    """Top eigenpair start: x0 = beta0 e1, lambda0 = mu0 = rho a1.

    beta0 = sqrt((1 - rho) a1 / sum_k |<e1, f_k>|^4) minimizes the quartic
    model of the regularized misfit along e1. When a1 <= 0 the zero vector
    is the least-square solution and the run is flagged degenerate.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must be in (0, 1); rho = {rho} degenerates beta0")
    q = build_Q(frame, y)
    w, v = np.linalg.eigh(q)
    a1 = float(w[-1])
    if a1 <= 0:
        return Initialization(
            x0=np.zeros(frame.n, dtype=np.complex128),
            lambda0=0.0,
            mu0=0.0,
            a1=a1,
            multiplicity=0,
            degenerate=True,
        )
    mult = int(np.sum(w >= a1 - 1e-10 * abs(a1)))
    e1 = fix_phase(v[:, -1])
    quartic = float(np.sum(alpha(frame, e1) ** 2))
    beta0 = np.sqrt((1.0 - rho) * a1 / quartic)
    return Initialization(
        x0=beta0 * e1,
        lambda0=rho * a1,
        mu0=rho * a1,
        a1=a1,
        multiplicity=mult,
        degenerate=False,
    )


def _make_state(frame: Frame, y: np.ndarray, x0: np.ndarray, init: Initialization) -> IrlsState:
    res = float(np.sum((y - alpha(frame, x0)) ** 2))
    return IrlsState(
        x=x0,
        x_prev=None,
        lambda_t=init.lambda0,
        mu_t=init.mu0,
        iter=0,
        residual=res,
        min_eig_Xt=s11_eigenvalues_pair(x0, x0)[1],
        lambda0=init.lambda0,
        mu0=init.mu0,
    )


def irls_step(frame: Frame, y: np.ndarray, state: IrlsState, cfg: IrlsConfig) -> IrlsState:
    """One subproblem solve, rescale, and annealing update.

    The system matrix sum_k Phi_k zeta zeta^T Phi_k + (lambda+mu) 1 is
    symmetric positive definite with least eigenvalue >= lambda + mu, which
    is asserted before the Cholesky factorization.
    """
    lam, mu = state.lambda_t, state.mu_t
    if lam + mu <= 0:
        raise IrlsConfigError("lambda_t + mu_t must be positive for a solvable step")
    zeta = iota(state.x)
    v = frame.apply_phi(zeta)
    m = v.T @ v
    m[np.diag_indices_from(m)] += lam + mu
    rhs = v.T @ y + mu * zeta
    try:
        zeta_new = cho_solve(cho_factor(m, lower=True), rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - shift makes this unreachable
        raise IrlsConfigError("subproblem factorization failed") from exc
    norm_old = float(np.linalg.norm(zeta))
    norm_new = float(np.linalg.norm(zeta_new))
    if norm_new == 0.0:
        x_new = np.zeros_like(state.x)
    else:
        x_new = np.sqrt(norm_old / norm_new) * iota_inv(zeta_new)
    t = state.iter + 1
    lam_new = state.lambda0 * cfg.gamma**t
    mu_new = max(state.mu0 * cfg.gamma**t, cfg.mu_min)
    return IrlsState(
        x=x_new,
        x_prev=state.x,
        lambda_t=lam_new,
        mu_t=mu_new,
        iter=t,
        residual=float(np.sum((y - alpha(frame, x_new)) ** 2)),
        min_eig_Xt=s11_eigenvalues_pair(state.x, x_new)[1],
        lambda0=state.lambda0,
        mu0=state.mu0,
    )


def _pair_misfit(frame: Frame, y: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    """||y - calA(u~v)||^2 without forming the operator."""
    return float(np.sum((y - calA_pair(frame, u, v)) ** 2))


def _frob_err_rank1(u: np.ndarray, v: np.ndarray, x: np.ndarray) -> float:
    """||u~v - xx*||_F^2 via closed-form traces."""
    _, tr_t2 = sym_outer_traces(u, v)
    nx2 = float(np.vdot(x, x).real)
    cross = (inner(x, u) * inner(v, x)).real
    return tr_t2 - 2.0 * cross + nx2**2


def _should_stop(state: IrlsState, cfg: IrlsConfig, m: int, sigma: float | None) -> str | None:
    lam_hit = state.lambda_t <= cfg.lambda_min
    res_hit = sigma is not None and state.residual <= cfg.kappa * m * sigma**2
    mode = cfg.stop_mode
    if mode in ("residual", "either") and sigma is None:
        # Residual stop needs the noise level; fall back to the lambda floor.
        mode = "lambda"
    if mode == "lambda" and lam_hit:
        return "lambda_floor"
    if mode == "residual" and res_hit:
        return "residual"
    if mode == "either":
        if res_hit:
            return "residual"
        if lam_hit:
            return "lambda_floor"
    return None


def solve(
    frame: Frame,
    y: np.ndarray,
    cfg: IrlsConfig,
    truth: np.ndarray | None = None,
    sigma: float | None = None,
    x0: np.ndarray | None = None,
) -> IrlsResult:
    """Run the full iteration; deterministic given (frame, y, cfg, x0).

    truth enables the error columns of the trace. sigma enables the
    residual stop. x0 overrides the eigen start (its scale is kept as
    given); lambda0 = mu0 = rho a1 either way.
    """
    y = np.asarray(y, dtype=np.float64)
    init = initialize(frame, y, cfg.rho)
    trace = IrlsTrace(a1=init.a1, top_multiplicity=init.multiplicity)
    if init.degenerate:
        x_hat = init.x0
        res = float(np.sum(y**2))
        state = IrlsState(x_hat, None, 0.0, 0.0, 0, res, 0.0, 0.0, 0.0)
        trace.append(state, res, _err_vs_truth(x_hat, truth), _frob_vs_truth(x_hat, x_hat, truth))
        return IrlsResult(x_hat, trace, 0, "degenerate_init", degenerate=True)

    start = init.x0 if x0 is None else np.asarray(x0, dtype=np.complex128)
    state = _make_state(frame, y, start, init)
    trace.append(
        state,
        _pair_misfit(frame, y, state.x, state.x),
        _err_vs_truth(state.x, truth),
        _frob_vs_truth(state.x, state.x, truth),
    )
    stop_reason = "max_iters"
    for _ in range(cfg.max_iters):
        state = irls_step(frame, y, state, cfg)
        trace.append(
            state,
            _pair_misfit(frame, y, state.x_prev, state.x),
            _err_vs_truth(state.x, truth),
            _frob_vs_truth(state.x_prev, state.x, truth),
        )
        reason = _should_stop(state, cfg, frame.m, sigma)
        if reason:
            stop_reason = reason
            break
    return IrlsResult(state.x, trace, state.iter, stop_reason)


def _err_vs_truth(x: np.ndarray, truth: np.ndarray | None) -> float:
    if truth is None:
        return float("nan")
    return float(np.linalg.norm(align_phase(x, truth) - truth) ** 2)


def _frob_vs_truth(u: np.ndarray, v: np.ndarray, truth: np.ndarray | None) -> float:
    if truth is None:
        return float("nan")
    return _frob_err_rank1(u, v, truth)


def eval_J(frame: Frame, y, u, v, lam: float, mu: float) -> float:
    """The regularized pair criterion J(u, v, lambda, mu), evaluated literally."""
    y = np.asarray(y, dtype=np.float64)
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    data = float(np.sum((y - calA_pair(frame, u, v)) ** 2))
    nu2 = float(np.vdot(u, u).real)
    nv2 = float(np.vdot(v, v).real)
    duv2 = float(np.vdot(u - v, u - v).real)
    return data + lam * (nu2 + nv2) + mu * duv2


def eval_J0(frame: Frame, y, X) -> float:
    """J0(X) = ||y - calA(X)||^2 for Hermitian X."""
    y = np.asarray(y, dtype=np.float64)
    return float(np.sum((y - calA(frame, hermitian(X))) ** 2))


def eval_J123(frame: Frame, y, X, lam: float, mu: float) -> tuple[float, float, float]:
    """The three operator criteria; they coincide on S^{1,1}.

    J1 = J0 + 2(lambda+mu)||X||_1 - 2 mu tr X
    J2 = J0 + 2 lambda a_max(X) - (2 lambda + 4 mu) a_min(X)
    J3 = J0 + 2 lambda ||X||_1 - 4 mu a_min(X)
    """
    X = hermitian(X)
    misfit = eval_J0(frame, y, X)
    w = np.linalg.eigvalsh(X)
    nuc = float(np.sum(np.abs(w)))
    tr = float(np.sum(w))
    a_max, a_min = float(w[-1]), float(w[0])
    j1 = misfit + 2.0 * (lam + mu) * nuc - 2.0 * mu * tr
    j2 = misfit + 2.0 * lam * a_max - (2.0 * lam + 4.0 * mu) * a_min
    j3 = misfit + 2.0 * lam * nuc - 4.0 * mu * a_min
    return j1, j2, j3


@dataclass
class RobustnessReport:
    """Evaluation of the noise-robustness error bounds at a candidate pair.

    applicable is False when J(u,v) did not reach the level of the true
    signal, in which case the bounds say nothing. A violated bound with a
    sampled A3 estimate signals the estimate is too large (it is an upper
    estimate by construction), not a failure of the theory.
    """

    applicable: bool
    nuclear_err: float
    nuclear_bound: float
    nuclear_bound_loose: float
    l2_err: float
    l2_bound: float
    l2_bound_tight_precondition: bool
    l2_bound_tight: float
    noise_norm: float
    nuclear_ok: bool
    l2_ok: bool


def robustness_certificate(
    frame: Frame,
    y,
    u,
    v,
    x_true,
    lam: float,
    mu: float,
    A3_est: float,
) -> RobustnessReport:
    """Check the a-posteriori error bounds driven by the S^{2,1} constant A3.

    Requires J(u, v, lambda, mu) <= J(x_true, x_true, lambda, mu); the
    report is marked inapplicable otherwise. Uses the oracle global phase
    to build x_hat from the top eigenpair of u~v.
    """
    if A3_est <= 0:
        raise ValueError("A3 estimate must be positive")
    y = np.asarray(y, dtype=np.float64)
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    x_true = np.asarray(x_true, dtype=np.complex128)

    j_uv = eval_J(frame, y, u, v, lam, mu)
    j_true = eval_J(frame, y, x_true, x_true, lam, mu)
    applicable = j_uv <= j_true * (1.0 + 1e-12) + 1e-300
    nu_vec = y - alpha(frame, x_true)
    nrm_nu = float(np.linalg.norm(nu_vec))

    t_diff = sym_outer(u, v) - rank_one(x_true)
    nuclear_err = float(np.sum(np.abs(np.linalg.eigvalsh(t_diff))))
    bound = 2.0 * lam / A3_est + 2.0 * np.sqrt((lam / A3_est) ** 2 + nrm_nu**2 / A3_est)
    bound_loose = 4.0 * lam / A3_est + 2.0 * nrm_nu / np.sqrt(A3_est)

    dec = s11_spectral_pair(u, v)
    ip = inner(x_true, dec.e1)
    phase = ip / abs(ip) if ip != 0 else 1.0
    x_hat = phase * np.sqrt(max(dec.a_plus, 0.0)) * dec.e1
    l2_err = float(np.linalg.norm(x_true - x_hat) ** 2)

    nx2 = float(np.vdot(x_true, x_true).real)
    if mu > 0:
        l2_bound = bound_loose + nrm_nu**2 / (4.0 * mu) + lam * nx2 / (2.0 * mu)
        l2_tight = bound_loose + nrm_nu**2 / (4.0 * mu)
    else:
        l2_bound = float("inf")
        l2_tight = float("inf")
    tight_pre = j_uv <= float(np.sum(y**2)) * (1.0 + 1e-12)

    return RobustnessReport(
        applicable=applicable,
        nuclear_err=nuclear_err,
        nuclear_bound=bound,
        nuclear_bound_loose=bound_loose,
        l2_err=l2_err,
        l2_bound=l2_bound,
        l2_bound_tight_precondition=tight_pre,
        l2_bound_tight=l2_tight,
        noise_norm=nrm_nu,
        nuclear_ok=(not applicable) or nuclear_err <= bound * (1.0 + 1e-10),
        l2_ok=(not applicable) or l2_err <= l2_bound * (1.0 + 1e-10),
    )

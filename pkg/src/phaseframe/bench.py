"""Monte-Carlo harness: SNR sweeps, bias/variance split, MSE vs CRLB, traces.

Protocol: one random unit-norm Gaussian frame and one complex Gaussian
signal per sweep (the signal's first component is rotated to be real
positive, pinning the global phase); for each SNR on the grid the noise is
redrawn `trials` times, the solver runs, estimates are phase-aligned to the
truth, and the per-SNR aggregates decompose the mean-square error into
bias^2 + variance next to the CRLB trace.

Every random draw comes from a stream that is a pure function of
(master_seed, signal_index, snr_index, trial_index), so trial order and
parallelism cannot change any output byte.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analysis import StabilityReport, estimate_a0_opt
from .crlb import DegenerateFisherError, crlb_bound
from .frames import Frame, frame_bounds, random_gaussian_frame
from .hilbert import align_phase
from .irls import IrlsConfig, IrlsTrace, solve
from .measurement import alpha, sigma_for_snr

__all__ = [
    "ExperimentSpec",
    "TrialRecord",
    "SnrAggregate",
    "SweepResult",
    "phase_align",
    "run_sweep",
    "run_traces",
    "write_trials_csv",
    "write_aggregate_csv",
    "write_manifest",
    "TRIALS_HEADER",
    "AGGREGATE_HEADER",
]

TRIALS_HEADER = "snr_db,trial,status,iters,mse,crlb_trace,final_residual"
AGGREGATE_HEADER = "snr_db,mse,bias_sq,variance,crlb_trace,mean_iters"

# phase_align is the oracle alignment used on every estimate before scoring.
phase_align = align_phase


@dataclass(frozen=True)
class ExperimentSpec:
    """A full sweep definition. m may be given via redundancy = m/n."""

    n: int
    m: int
    snr_db_list: tuple[float, ...]
    trials: int
    master_seed: int
    irls: IrlsConfig = field(default_factory=IrlsConfig)
    init_mode: str = "eigen"
    z0_mode: str = "true_direction"
    signal_index: int = 0
    a0_restarts: int = 4
    a0_samples: int = 500
    a0_iters: int = 40

    def __post_init__(self):
        if self.n < 1 or self.m < self.n:
            raise ValueError(f"need m >= n >= 1, got n={self.n}, m={self.m}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.snr_db_list) == 0:
            raise ValueError("snr_db_list must be nonempty")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if self.init_mode not in ("eigen", "random"):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")
        if self.z0_mode != "true_direction":
            raise ValueError(f"unknown z0_mode {self.z0_mode!r}")


@dataclass
class TrialRecord:
    snr_db: float
    trial_index: int
    status: str
    iters: int
    mse: float
    crlb_trace: float
    final_residual: float
    aligned: np.ndarray | None = None


@dataclass
class SnrAggregate:
    snr_db: float
    mse: float
    bias_sq: float
    variance: float
    crlb_trace: float
    mean_iters: float


@dataclass
class SweepResult:
    spec: ExperimentSpec
    frame: Frame
    signal: np.ndarray
    records: list[TrialRecord]
    aggregates: list[SnrAggregate]
    manifest: dict[str, str]
    a0_report: StabilityReport | None


def _frame_for(spec: ExperimentSpec) -> Frame:
    return random_gaussian_frame(spec.n, spec.m, seed=np.random.SeedSequence(spec.master_seed))


def _signal_for(spec: ExperimentSpec) -> np.ndarray:
    rng = np.random.default_rng(
        np.random.SeedSequence(spec.master_seed, spawn_key=(1, spec.signal_index))
    )
    x = rng.normal(size=spec.n) + 1j * rng.normal(size=spec.n)
    if x[0] != 0:
        x = x * (np.conj(x[0]) / abs(x[0]))
    return x


def _trial_rng(spec: ExperimentSpec, snr_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(
            spec.master_seed, spawn_key=(2, spec.signal_index, snr_index, trial)
        )
    )


def _run_trial(
    spec: ExperimentSpec,
    frame: Frame,
    x: np.ndarray,
    snr_index: int,
    trial: int,
    sigma: float,
    crlb_trace: float,
) -> TrialRecord:
    rng = _trial_rng(spec, snr_index, trial)
    y = alpha(frame, x) + rng.normal(scale=sigma, size=frame.m)
    x0 = None
    if spec.init_mode == "random":
        g = rng.normal(size=spec.n) + 1j * rng.normal(size=spec.n)
        x0 = g / np.linalg.norm(g)
    result = solve(frame, y, spec.irls, sigma=sigma, x0=x0)
    aligned = phase_align(result.x_hat, x)
    status = "degenerate_init" if result.degenerate else "ok"
    return TrialRecord(
        snr_db=spec.snr_db_list[snr_index],
        trial_index=trial,
        status=status,
        iters=result.iterations,
        mse=float(np.linalg.norm(aligned - x) ** 2),
        crlb_trace=crlb_trace,
        final_residual=result.trace.residuals[-1],
        aligned=aligned,
    )


def run_sweep(spec: ExperimentSpec, threads: int = 1) -> SweepResult:
    """Execute the sweep; deterministic for a fixed spec regardless of threads."""
    frame = _frame_for(spec)
    x = _signal_for(spec)
    z0 = x / np.linalg.norm(x)

    a0_report = None
    if spec.a0_restarts > 0:
        a0_report = estimate_a0_opt(
            frame,
            restarts=spec.a0_restarts,
            iters=spec.a0_iters,
            seed=np.random.SeedSequence(spec.master_seed, spawn_key=(4,)),
            samples=spec.a0_samples,
        )

    sigmas, crlb_traces = [], []
    for snr_db in spec.snr_db_list:
        sigma = sigma_for_snr(frame, x, snr_db)
        res = crlb_bound(
            frame, x, z0, sigma,
            a0_opt=a0_report.a0_opt if a0_report else None,
        )
        sigmas.append(sigma)
        crlb_traces.append(res.mse_lower)

    tasks = [(si, t) for si in range(len(spec.snr_db_list)) for t in range(spec.trials)]
    results: dict[tuple[int, int], TrialRecord] = {}
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {
                pool.submit(
                    _run_trial, spec, frame, x, si, t, sigmas[si], crlb_traces[si]
                ): (si, t)
                for (si, t) in tasks
            }
            for fut in concurrent.futures.as_completed(futs):
                results[futs[fut]] = fut.result()
    else:
        for si, t in tasks:
            results[(si, t)] = _run_trial(
                spec, frame, x, si, t, sigmas[si], crlb_traces[si]
            )

    records = [results[key] for key in sorted(results)]
    aggregates = []
    for si, snr_db in enumerate(spec.snr_db_list):
        block = [results[(si, t)] for t in range(spec.trials)]
        mses = np.array([r.mse for r in block])
        mean_est = np.mean(np.stack([r.aligned for r in block]), axis=0)
        mse = float(np.mean(mses))
        bias_sq = float(np.linalg.norm(mean_est - x) ** 2)
        aggregates.append(
            SnrAggregate(
                snr_db=snr_db,
                mse=mse,
                bias_sq=bias_sq,
                variance=mse - bias_sq,
                crlb_trace=crlb_traces[si],
                mean_iters=float(np.mean([r.iters for r in block])),
            )
        )

    bounds = frame_bounds(frame)
    manifest = {
        "phaseframe_version": __version__,
        "n": str(spec.n),
        "m": str(spec.m),
        "redundancy": format(spec.m / spec.n, ".17g"),
        "snr_db_list": ";".join(format(v, ".17g") for v in spec.snr_db_list),
        "trials": str(spec.trials),
        "master_seed": str(spec.master_seed),
        "signal_index": str(spec.signal_index),
        "init_mode": spec.init_mode,
        "z0_mode": spec.z0_mode,
        "rho": format(spec.irls.rho, ".17g"),
        "gamma": format(spec.irls.gamma, ".17g"),
        "lambda_min": format(spec.irls.lambda_min, ".17g"),
        "mu_min": format(spec.irls.mu_min, ".17g"),
        "kappa": format(spec.irls.kappa, ".17g"),
        "max_iters": str(spec.irls.max_iters),
        "stop_mode": spec.irls.stop_mode,
        "frame_bound_A": format(bounds[0], ".17g"),
        "frame_bound_B": format(bounds[1], ".17g"),
        "signal_norm": format(float(np.linalg.norm(x)), ".17g"),
    }
    if a0_report is not None:
        manifest.update(
            {
                "a0_opt_estimate": format(a0_report.a0_opt, ".17g"),
                "A0_estimate": format(a0_report.A0, ".17g"),
                "B0_estimate": format(a0_report.B0, ".17g"),
                "a0_restarts": str(a0_report.restarts),
                "a0_samples": str(a0_report.samples),
            }
        )
    else:
        manifest["a0_opt_estimate"] = "skipped"

    return SweepResult(
        spec=spec,
        frame=frame,
        signal=x,
        records=records,
        aggregates=aggregates,
        manifest=manifest,
        a0_report=a0_report,
    )


def run_traces(spec: ExperimentSpec, snr_db: float) -> IrlsTrace:
    """Per-iteration trace of one noise realization at the given SNR.

    Records, per iteration: the schedule, 10 log10 ||x^(t) - x||^2 (after
    phase alignment), the smallest eigenvalue of X^(t) = x^(t-1)~x^(t)
    (nonpositive on S^{1,1}), 10 log10 ||X^(t) - xx*||_F^2, and
    10 log10 ||y - calA(X^(t))||^2.
    """
    frame = _frame_for(spec)
    x = _signal_for(spec)
    sigma = sigma_for_snr(frame, x, snr_db)
    key = int(round(snr_db * 1000.0)) & 0xFFFFFFFF
    rng = np.random.default_rng(
        np.random.SeedSequence(spec.master_seed, spawn_key=(3, spec.signal_index, key))
    )
    y = alpha(frame, x) + rng.normal(scale=sigma, size=frame.m)
    result = solve(frame, y, spec.irls, truth=x, sigma=sigma)
    return result.trace


def write_trials_csv(path, records: list[TrialRecord]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(TRIALS_HEADER + "\n")
        for r in records:
            fh.write(
                ",".join(
                    (
                        format(r.snr_db, ".17g"),
                        str(r.trial_index),
                        r.status,
                        str(r.iters),
                        format(r.mse, ".17g"),
                        format(r.crlb_trace, ".17g"),
                        format(r.final_residual, ".17g"),
                    )
                )
                + "\n"
            )


def write_aggregate_csv(path, aggregates: list[SnrAggregate]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(AGGREGATE_HEADER + "\n")
        for a in aggregates:
            fh.write(
                ",".join(
                    (
                        format(a.snr_db, ".17g"),
                        format(a.mse, ".17g"),
                        format(a.bias_sq, ".17g"),
                        format(a.variance, ".17g"),
                        format(a.crlb_trace, ".17g"),
                        format(a.mean_iters, ".17g"),
                    )
                )
                + "\n"
            )


def write_manifest(path, manifest: dict[str, str]) -> None:
    with open(path, "w", newline="") as fh:
        for key, value in manifest.items():
            fh.write(f"{key}={value}\n")

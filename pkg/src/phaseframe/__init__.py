"""Phase retrieval from squared frame-coefficient magnitudes.

Library layout:
  hilbert      realification calculus (iota, J, inner products)
  symops       self-adjoint operator algebra, S^{p,q} cones, tau, U(1,1;K)
  frames       frame construction/validation and cached realifications
  measurement  alpha, its linearization, AWGN channel, SNR calibration
  analysis     injectivity rank test, Lipschitz-constant estimators
  crlb         Fisher information and the Cramer-Rao lower bound
  irls         the iterative regularized least-square solver
  bench        Monte-Carlo SNR-sweep harness with CSV outputs
  plots        figure rendering from the emitted CSV files
  cli          the `phaseframe` command
"""

__version__ = "0.1.0"

from .frames import Frame, frame_bounds, is_full_spark, random_gaussian_frame
from .irls import IrlsConfig, IrlsResult, solve
from .measurement import alpha, calA, sigma_for_snr

__all__ = [
    "__version__",
    "Frame",
    "frame_bounds",
    "is_full_spark",
    "random_gaussian_frame",
    "IrlsConfig",
    "IrlsResult",
    "solve",
    "alpha",
    "calA",
    "sigma_for_snr",
]

"""Coupled stochastic lambda-omega oscillators near a supercritical Hopf bifurcation."""

__version__ = "0.1.0"

from .model import ModelParams, State, drift, jacobian_origin, lambda_gain, omega_freq  # noqa: E402
from .integrator import SimConfig, Trajectory, integrate, trial_streams  # noqa: E402
from .analysis import AnalysisSettings, SyncMetrics, compute_metrics  # noqa: E402

__all__ = [
    "__version__",
    "ModelParams",
    "State",
    "drift",
    "jacobian_origin",
    "lambda_gain",
    "omega_freq",
    "SimConfig",
    "Trajectory",
    "integrate",
    "trial_streams",
    "AnalysisSettings",
    "SyncMetrics",
    "compute_metrics",
]

"""Two diffusively coupled lambda-omega oscillators with additive noise on x.

For oscillator ``i`` (partner ``j``)::

    dx_i = [lam(r_i) x_i - om(r_i) y_i + d_i (x_j - x_i)] dt + delta_i dW_i
    dy_i = [om(r_i) x_i + lam(r_i) y_i + d_i (y_j - y_i)] dt

with ``lam(r) = lambda0 + alpha r**2 + gamma r**4`` and
``om(r) = omega0 + omega1 r**2``. Only the deterministic drift lives here;
the noise term belongs to :mod:`hopfsync.integrator`.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import ParameterError

__all__ = [
    "ModelParams",
    "State",
    "lambda_gain",
    "omega_freq",
    "drift",
    "jacobian_origin",
    "PARAM_NAMES",
]

PARAM_NAMES = ("lambda0", "alpha", "gamma", "omega0", "omega1", "d1", "d2", "delta1", "delta2")


@dataclass(frozen=True)
class ModelParams:
    """Model constants. Defaults are the supercritical set used throughout."""

    lambda0: float = -0.5
    alpha: float = -0.2
    gamma: float = -0.2
    omega0: float = 2.0
    omega1: float = 0.0
    d1: float = 0.0
    d2: float = 0.0
    delta1: float = 0.0
    delta2: float = 0.0

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ParameterError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ("d1", "d2"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0 (excitatory coupling only)")
        for name in ("delta1", "delta2"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0 (noise intensity)")

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def swapped(self) -> "ModelParams":
        """Relabel the oscillators (1 <-> 2)."""
        return self.replace(d1=self.d2, d2=self.d1, delta1=self.delta2, delta2=self.delta1)

    def as_array(self) -> np.ndarray:
        """Pack into the float64 vector consumed by the compiled kernels."""
        return np.array([getattr(self, n) for n in PARAM_NAMES], dtype=np.float64)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


class State(NamedTuple):
    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def amplitudes(self) -> tuple[float, float]:
        return math.hypot(self.x1, self.y1), math.hypot(self.x2, self.y2)

    def swapped(self) -> "State":
        return State(self.x2, self.y2, self.x1, self.y1)


def lambda_gain(r, p: ModelParams):
    """Amplitude-dependent growth rate lambda0 + alpha r^2 + gamma r^4."""
    r2 = np.square(r)
    return p.lambda0 + p.alpha * r2 + p.gamma * r2 * r2


def omega_freq(r, p: ModelParams):
    """Amplitude-dependent angular frequency omega0 + omega1 r^2."""
    return p.omega0 + p.omega1 * np.square(r)


@njit(cache=True, nogil=True, inline="always")
def _oscillator_drift(xi, yi, xj, yj, lam0, alpha, gamma, om0, om1, di):
    # One expression for both oscillators keeps index-exchange symmetry bit-exact.
    r2 = xi * xi + yi * yi
    lam = lam0 + alpha * r2 + gamma * r2 * r2
    om = om0 + om1 * r2
    fx = lam * xi - om * yi + di * (xj - xi)
    fy = om * xi + lam * yi + di * (yj - yi)
    return fx, fy


@njit(cache=True, nogil=True)
def _drift4(x1, y1, x2, y2, prm):
    fx1, fy1 = _oscillator_drift(x1, y1, x2, y2, prm[0], prm[1], prm[2], prm[3], prm[4], prm[5])
    fx2, fy2 = _oscillator_drift(x2, y2, x1, y1, prm[0], prm[1], prm[2], prm[3], prm[4], prm[6])
    return fx1, fy1, fx2, fy2


def drift(s, p: ModelParams) -> np.ndarray:
    """Deterministic vector field at state ``s = (x1, y1, x2, y2)``."""
    x1, y1, x2, y2 = (float(v) for v in s)
    return np.array(_drift4(x1, y1, x2, y2, p.as_array()))


def jacobian_origin(p: ModelParams) -> np.ndarray:
    """Exact Jacobian of :func:`drift` at the fixed point (0, 0, 0, 0).

    At the origin lam = lambda0 and om = omega0, so each oscillator contributes
    a rotation block and the coupling adds ``-d_i I`` on the diagonal block and
    ``+d_i I`` on the off-diagonal block.
    """
    lam, om = p.lambda0, p.omega0
    rot = np.array([[lam, -om], [om, lam]])
    eye = np.eye(2)
    jac = np.zeros((4, 4))
    jac[:2, :2] = rot - p.d1 * eye
    jac[:2, 2:] = p.d1 * eye
    jac[2:, 2:] = rot - p.d2 * eye
    jac[2:, :2] = p.d2 * eye
    return jac

"""Euler-Maruyama integration of the coupled oscillator SDEs.

Random numbers come from one Philox stream per oscillator, keyed by
``(seed, trial, oscillator)``. Each stream first yields that oscillator's
initial (x, y) and then its Wiener increments, so relabelling the
oscillators is the same as handing the streams over in reverse order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .errors import Blowup, ParameterError
from .model import ModelParams, State, _drift4

__all__ = [
    "SimConfig",
    "Trajectory",
    "trial_streams",
    "sample_initial_state",
    "wiener_increments",
    "integrate",
    "integrate_from",
    "advance_deterministic",
]


@dataclass(frozen=True)
class SimConfig:
    """Integration settings; ``[t_burn, t_end]`` is the analysis window."""

    dt: float = 0.01
    t_end: float = 100.0
    t_burn: float = 15.0
    seed: int = 0
    ic_sigma: float = 0.008
    bound: float = 1e6

    def __post_init__(self):
        for name in ("dt", "t_end", "t_burn", "ic_sigma", "bound"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite real, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.dt <= 0:
            raise ParameterError("dt must be > 0")
        if not 0 <= self.t_burn < self.t_end:
            raise ParameterError("need 0 <= t_burn < t_end")
        if self.ic_sigma < 0:
            raise ParameterError("ic_sigma must be >= 0")
        if self.bound <= 0:
            raise ParameterError("bound must be > 0")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))
        if self.n_steps - self.burn_steps < 1:
            raise ParameterError("analysis window shorter than one step")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def burn_steps(self) -> int:
        return int(math.ceil(self.t_burn / self.dt - 1e-9))

    @property
    def n_samples(self) -> int:
        return self.n_steps - self.burn_steps + 1

    def replace(self, **changes) -> "SimConfig":
        import dataclasses

        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled states; row ``k`` is the state at ``t0 + k*dt``."""

    t0: float
    dt: float
    samples: np.ndarray = field(repr=False)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    x1 = property(lambda self: self.samples[:, 0])
    y1 = property(lambda self: self.samples[:, 1])
    x2 = property(lambda self: self.samples[:, 2])
    y2 = property(lambda self: self.samples[:, 3])

    def amplitudes(self) -> np.ndarray:
        """(n, 2) array of r_1, r_2."""
        s = self.samples
        return np.column_stack([np.hypot(s[:, 0], s[:, 1]), np.hypot(s[:, 2], s[:, 3])])

    def swapped(self) -> "Trajectory":
        return Trajectory(self.t0, self.dt, self.samples[:, [2, 3, 0, 1]])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x1", "y1", "x2", "y2"])
            for t, row in zip(self.t, self.samples):
                w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])


def trial_streams(seed: int, trial: int = 0) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent counter-based streams for oscillators 1 and 2 of one trial.

    The streams depend only on ``(seed, trial)``, never on scheduling, so any
    ensemble is reproducible regardless of worker count.
    """
    return tuple(
        np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(trial), osc))))
        for osc in (0, 1)
    )


def sample_initial_state(streams: Sequence[np.random.Generator], ic_sigma: float = 0.008) -> State:
    """Draw x_i(0), y_i(0) ~ N(0, ic_sigma^2); oscillator i uses ``streams[i]``."""
    a = streams[0].standard_normal(2) * ic_sigma
    b = streams[1].standard_normal(2) * ic_sigma
    return State(float(a[0]), float(a[1]), float(b[0]), float(b[1]))


def wiener_increments(streams: Sequence[np.random.Generator], n: int) -> np.ndarray:
    """``(n, 2)`` standard normals; column i drives oscillator i."""
    if n < 0:
        raise ParameterError("n must be >= 0")
    return np.column_stack([streams[0].standard_normal(n), streams[1].standard_normal(n)])


@njit(cache=True, nogil=True)
def _em_kernel(x1, y1, x2, y2, prm, dt, noise, burn, bound, out):
    """Euler-Maruyama steps; returns the failing step index or -1."""
    sq = math.sqrt(dt)
    s1 = prm[7] * sq
    s2 = prm[8] * sq
    n_steps = noise.shape[0]
    if burn == 0:
        out[0, 0] = x1
        out[0, 1] = y1
        out[0, 2] = x2
        out[0, 3] = y2
    for k in range(n_steps):
        fx1, fy1, fx2, fy2 = _drift4(x1, y1, x2, y2, prm)
        x1 = x1 + fx1 * dt + s1 * noise[k, 0]
        y1 = y1 + fy1 * dt
        x2 = x2 + fx2 * dt + s2 * noise[k, 1]
        y2 = y2 + fy2 * dt
        # NaN fails every comparison, so this also catches non-finite values.
        if not (abs(x1) <= bound and abs(y1) <= bound and abs(x2) <= bound and abs(y2) <= bound):
            return k + 1
        j = k + 1 - burn
        if j >= 0:
            out[j, 0] = x1
            out[j, 1] = y1
            out[j, 2] = x2
            out[j, 3] = y2
    return -1


@njit(cache=True, nogil=True)
def _euler_chunk(state, prm, dt, n_steps, bound):
    """Noise-free Euler steps in place; returns (max r1, max r2, failing step)."""
    x1, y1, x2, y2 = state[0], state[1], state[2], state[3]
    m1 = 0.0
    m2 = 0.0
    for k in range(n_steps):
        fx1, fy1, fx2, fy2 = _drift4(x1, y1, x2, y2, prm)
        x1 = x1 + fx1 * dt
        y1 = y1 + fy1 * dt
        x2 = x2 + fx2 * dt
        y2 = y2 + fy2 * dt
        if not (abs(x1) <= bound and abs(y1) <= bound and abs(x2) <= bound and abs(y2) <= bound):
            return m1, m2, k + 1
        r1 = math.sqrt(x1 * x1 + y1 * y1)
        r2 = math.sqrt(x2 * x2 + y2 * y2)
        if r1 > m1:
            m1 = r1
        if r2 > m2:
            m2 = r2
    state[0] = x1
    state[1] = y1
    state[2] = x2
    state[3] = y2
    return m1, m2, -1


@njit(cache=True, nogil=True)
def _rk4_chunk(state, prm, dt, n_steps, bound):
    """Classical RK4 counterpart of :func:`_euler_chunk`."""
    x1, y1, x2, y2 = state[0], state[1], state[2], state[3]
    h = 0.5 * dt
    m1 = 0.0
    m2 = 0.0
    for k in range(n_steps):
        a1, b1, c1, e1 = _drift4(x1, y1, x2, y2, prm)
        a2, b2, c2, e2 = _drift4(x1 + h * a1, y1 + h * b1, x2 + h * c1, y2 + h * e1, prm)
        a3, b3, c3, e3 = _drift4(x1 + h * a2, y1 + h * b2, x2 + h * c2, y2 + h * e2, prm)
        a4, b4, c4, e4 = _drift4(x1 + dt * a3, y1 + dt * b3, x2 + dt * c3, y2 + dt * e3, prm)
        x1 = x1 + dt * (a1 + 2 * a2 + 2 * a3 + a4) / 6.0
        y1 = y1 + dt * (b1 + 2 * b2 + 2 * b3 + b4) / 6.0
        x2 = x2 + dt * (c1 + 2 * c2 + 2 * c3 + c4) / 6.0
        y2 = y2 + dt * (e1 + 2 * e2 + 2 * e3 + e4) / 6.0
        if not (abs(x1) <= bound and abs(y1) <= bound and abs(x2) <= bound and abs(y2) <= bound):
            return m1, m2, k + 1
        r1 = math.sqrt(x1 * x1 + y1 * y1)
        r2 = math.sqrt(x2 * x2 + y2 * y2)
        if r1 > m1:
            m1 = r1
        if r2 > m2:
            m2 = r2
    state[0] = x1
    state[1] = y1
    state[2] = x2
    state[3] = y2
    return m1, m2, -1


def integrate_from(s0, p: ModelParams, cfg: SimConfig, noise: np.ndarray) -> Trajectory:
    """Integrate from a given state with explicit standard-normal increments.

    ``noise`` must have shape ``(cfg.n_steps, 2)``.
    """
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    if noise.shape != (cfg.n_steps, 2):
        raise ParameterError(f"noise must have shape {(cfg.n_steps, 2)}, got {noise.shape}")
    out = np.empty((cfg.n_samples, 4))
    x1, y1, x2, y2 = (float(v) for v in s0)
    bad = _em_kernel(x1, y1, x2, y2, p.as_array(), cfg.dt, noise, cfg.burn_steps, cfg.bound, out)
    if bad >= 0:
        raise Blowup(f"state left |.| <= {cfg.bound:g} at t = {bad * cfg.dt:g}", step=int(bad))
    return Trajectory(cfg.burn_steps * cfg.dt, cfg.dt, out)


def integrate(p: ModelParams, cfg: SimConfig, streams=None) -> Trajectory:
    """Simulate one trial and return the samples on ``[t_burn, t_end]``.

    ``streams`` defaults to ``trial_streams(cfg.seed, 0)``.
    """
    if streams is None:
        streams = trial_streams(cfg.seed, 0)
    s0 = sample_initial_state(streams, cfg.ic_sigma)
    noise = wiener_increments(streams, cfg.n_steps)
    return integrate_from(s0, p, cfg, noise)


def advance_deterministic(
    state: np.ndarray, p: ModelParams, dt: float, n_steps: int, bound: float = 1e6, method: str = "euler"
):
    """Advance ``state`` (float64 array of 4, modified in place) without noise.

    ``method`` is ``"euler"`` (the drift part of the stochastic scheme) or
    ``"rk4"``. Returns the maximum amplitude of each oscillator over the chunk.
    """
    kernels = {"euler": _euler_chunk, "rk4": _rk4_chunk}
    if method not in kernels:
        raise ParameterError(f"method must be one of {tuple(kernels)}")
    m1, m2, bad = kernels[method](state, p.as_array(), float(dt), int(n_steps), float(bound))
    if bad >= 0:
        raise Blowup(f"state left |.| <= {bound:g} during deterministic run", step=int(bad))
    return m1, m2

"""Deterministic bifurcation structure.

Linearizing at the origin gives two complex-conjugate eigenvalue pairs,
``lambda0 +- i omega0`` (in-phase mode) and
``lambda0 - d1 - d2 +- i omega0`` (difference mode), so the Hopf points are
``lambda0 = 0`` and ``lambda0 = d1 + d2``. Stable orbit amplitudes come from
long noise-free RK4 runs.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyRange, ParameterError
from .integrator import advance_deterministic, sample_initial_state, trial_streams
from .model import ModelParams, jacobian_origin

__all__ = [
    "HopfBranch",
    "BranchDiagram",
    "origin_eigenvalues",
    "hopf_real_parts",
    "find_hopf_points",
    "two_parameter_branches",
    "stable_orbit_amplitude",
    "branch_diagram",
    "write_branches_csv",
]

DEGENERATE_COUPLING = 1e-6
MODES = ("symmetric", "vary-d1", "vary-d2")


@dataclass
class HopfBranch:
    label: str  # "HB1" or "HB2"
    points: list = field(default_factory=list)  # [((d1, d2), lambda0 or None), ...]


@dataclass
class BranchDiagram:
    lambda0: np.ndarray
    fixed_point: list  # 0.0 where the origin is stable, None where unstable
    amp1: list
    amp2: list

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lambda0", "amp1", "amp2"])
            for lam, a1, a2 in zip(self.lambda0, self.amp1, self.amp2):
                w.writerow([f"{lam:.17g}", "" if a1 is None else f"{a1:.17g}", "" if a2 is None else f"{a2:.17g}"])


def origin_eigenvalues(p: ModelParams) -> np.ndarray:
    """Eigenvalues of the origin Jacobian, by real part (desc) then imaginary part."""
    ev = np.linalg.eigvals(jacobian_origin(p))
    order = sorted(range(4), key=lambda k: (-ev[k].real, ev[k].imag))
    return ev[order]


def hopf_real_parts(p: ModelParams, lambda0: float) -> tuple[float, float]:
    """Closed-form real parts of the two eigenvalue pairs at ``lambda0``."""
    return lambda0, lambda0 - (p.d1 + p.d2)


def _bisect(f, lo, hi, tol):
    flo = f(lo)
    if flo == 0:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_hopf_points(p: ModelParams, lambda0_range=(-1.0, 1.0), tol: float = 1e-12) -> list:
    """All lambda0 in the range where an eigenvalue pair crosses the imaginary axis."""
    lo, hi = (float(v) for v in lambda0_range)
    if not lo < hi:
        raise EmptyRange(f"empty lambda0 range [{lo}, {hi}]")
    points = []
    for k in range(2):
        if k == 1 and p.d1 + p.d2 < DEGENERATE_COUPLING:
            break  # both pairs cross together
        f = lambda lam, k=k: hopf_real_parts(p, lam)[k]
        flo, fhi = f(lo), f(hi)
        if flo == 0 or fhi == 0 or (flo < 0) != (fhi < 0):
            points.append(_bisect(f, lo, hi, tol))
    if not points:
        raise EmptyRange(f"no Hopf crossing in [{lo}, {hi}]")
    return sorted(points)


def two_parameter_branches(
    mode: str,
    values: Sequence[float],
    fixed: float = 0.05,
    base: ModelParams = ModelParams(),
    lambda0_range=(-1.0, 1.0),
) -> tuple[HopfBranch, HopfBranch]:
    """HB1 and HB2 over a coupling grid.

    ``mode`` is ``symmetric`` (d1 = d2 = value), ``vary-d1`` (d2 = fixed) or
    ``vary-d2`` (d1 = fixed). HB2 is ``None`` where it coincides with HB1.
    """
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}")
    values = list(values)
    if not values:
        raise ParameterError("coupling grid is empty")
    hb1, hb2 = HopfBranch("HB1"), HopfBranch("HB2")
    for v in values:
        if mode == "symmetric":
            d1, d2 = v, v
        elif mode == "vary-d1":
            d1, d2 = v, fixed
        else:
            d1, d2 = fixed, v
        pts = find_hopf_points(base.replace(d1=d1, d2=d2), lambda0_range)
        hb1.points.append(((d1, d2), pts[0]))
        hb2.points.append(((d1, d2), pts[1] if len(pts) > 1 else None))
    return hb1, hb2


def write_branches_csv(path, mode: str, hb1: HopfBranch, hb2: HopfBranch) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mode", "d1", "d2", "lambda0_HB1", "lambda0_HB2"])
        for ((d1, d2), l1), (_, l2) in zip(hb1.points, hb2.points):
            w.writerow([mode, f"{d1:.17g}", f"{d2:.17g}", f"{l1:.17g}", "" if l2 is None else f"{l2:.17g}"])


def stable_orbit_amplitude(
    p: ModelParams,
    lambda0: Optional[float] = None,
    dt: float = 5e-3,
    rtol: float = 1e-6,
    t_max: float = 1e4,
    ic_sigma: float = 0.01,
    seed: int = 0,
    vanish: float = 1e-8,
) -> tuple:
    """Amplitude ``(r1, r2)`` of the attracting orbit reached from a small kick.

    Runs the noise-free dynamics one period at a time until the per-period
    maximum amplitude changes by less than ``rtol`` (relative), then returns
    the maxima over the final period. ``(None, None)`` if the state decays to
    the fixed point. RK4 is used rather than the Euler drift step because
    explicit Euler inflates rotating orbits by about ``omega0**2 dt / 2`` per
    unit time, enough to fake a small orbit at the threshold itself.
    """
    if lambda0 is not None:
        p = p.replace(lambda0=lambda0)
    p = p.replace(delta1=0.0, delta2=0.0)
    period = 2 * math.pi / abs(p.omega0) if p.omega0 != 0 else 1.0
    n = max(1, int(round(period / dt)))
    state = np.array(sample_initial_state(trial_streams(seed, 0), ic_sigma), dtype=np.float64)
    prev = None
    t = 0.0
    while t < t_max:
        m1, m2 = advance_deterministic(state, p, dt, n, method="rk4")
        t += n * dt
        m = max(m1, m2)
        if m < vanish:
            return None, None
        if prev is not None and abs(m - prev) <= rtol * m:
            return m1, m2
        prev = m
    # cap reached: still shrinking means the origin attracts (slowly)
    m1, m2 = advance_deterministic(state, p, dt, n, method="rk4")
    if max(m1, m2) < prev:
        return None, None
    return m1, m2


def branch_diagram(p: ModelParams, lambda0_grid: Sequence[float], **kwargs) -> BranchDiagram:
    """Stable fixed point and stable orbit amplitudes along a lambda0 grid."""
    grid = np.asarray(list(lambda0_grid), dtype=float)
    if grid.size == 0:
        raise EmptyRange("lambda0 grid is empty")
    fixed, a1, a2 = [], [], []
    for lam in grid:
        q = p.replace(lambda0=float(lam))
        stable = bool(np.all(origin_eigenvalues(q).real < 0))
        fixed.append(0.0 if stable else None)
        r1, r2 = stable_orbit_amplitude(q, **kwargs)
        a1.append(r1)
        a2.append(r2)
    return BranchDiagram(grid, fixed, a1, a2)

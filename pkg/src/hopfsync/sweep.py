"""Trial ensembles and parameter-grid sweeps.

Trial ``k`` of every ensemble uses the random streams keyed by
``(seed, k)``, whatever cell it belongs to. Cells therefore share their
noise realizations (common random numbers), which makes results independent
of grid layout, of the worker count and of completion order.
"""
from __future__ import annotations

import csv
import json
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .analysis import (
    AnalysisSettings,
    PhaseDensity,
    Spectrum,
    SyncMetrics,
    compute_metrics,
    lowpass,
    phase_diff_density,
    phase_series,
    power_spectrum,
    snr_beta,
)
from .errors import AllCellsFailed, EnsembleFailed, HopfSyncError, NoPeak, ParameterError
from .integrator import SimConfig, integrate, trial_streams
from .model import ModelParams

__all__ = [
    "SWEEP_PARAMS",
    "SweepAxis",
    "SweepGrid",
    "EnsembleResult",
    "CellResult",
    "SweepResult",
    "OptimaReport",
    "run_trial",
    "ensemble_average",
    "sweep",
    "find_optimum",
    "nested_optima",
    "optimum_vs_lambda",
    "snr_curve",
    "mean_density",
    "default_workers",
]

SWEEP_PARAMS = ("delta1", "delta2", "d1", "d2", "lambda0")
MAX_FAILED_FRACTION = 0.01
TIE_BREAK = "min abs_dphi, then min delta1+delta2, then min delta1"


def default_workers() -> int:
    env = os.environ.get("HOPFSYNC_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ParameterError(f"HOPFSYNC_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ParameterError("HOPFSYNC_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SweepAxis:
    param: str
    values: tuple
    spacing: str = "linear"

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ParameterError(f"axis parameter must be one of {SWEEP_PARAMS}, got {self.param!r}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ParameterError(f"axis {self.param} has no values")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ParameterError(f"axis {self.param} values must be strictly increasing")
        if self.spacing not in ("linear", "log"):
            raise ParameterError("spacing must be 'linear' or 'log'")
        object.__setattr__(self, "values", vals)

    @classmethod
    def span(cls, param: str, lo: float, hi: float, num: int, spacing: str = "linear") -> "SweepAxis":
        if num < 1:
            raise ParameterError("num must be >= 1")
        if num == 1:
            return cls(param, (lo,), spacing)
        if spacing == "log":
            if lo <= 0 or hi <= 0:
                raise ParameterError("log axes need positive bounds")
            vals = np.geomspace(lo, hi, num)
        else:
            vals = np.linspace(lo, hi, num)
        return cls(param, tuple(vals), spacing)

    def to_dict(self) -> dict:
        return {"param": self.param, "values": list(self.values), "spacing": self.spacing}


@dataclass(frozen=True)
class SweepGrid:
    axes: tuple
    base: ModelParams = ModelParams()
    sim: SimConfig = SimConfig()
    n_trials: int = 50
    analysis: AnalysisSettings = AnalysisSettings()
    swap_streams: bool = False

    def __post_init__(self):
        axes = tuple(self.axes)
        if not 1 <= len(axes) <= 2:
            raise ParameterError("a sweep grid has one or two axes")
        if len({a.param for a in axes}) != len(axes):
            raise ParameterError("axis parameters must be distinct")
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise ParameterError("n_trials must be a positive integer")
        object.__setattr__(self, "axes", axes)

    @property
    def shape(self) -> tuple:
        return tuple(len(a.values) for a in self.axes)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    def cells(self) -> list:
        """Row-major list of ``(index, {param: value})``."""
        out = []
        for idx in np.ndindex(*self.shape):
            out.append((idx, {a.param: a.values[i] for a, i in zip(self.axes, idx)}))
        return out

    def params_for(self, values: dict) -> ModelParams:
        return self.base.replace(**values)

    def to_dict(self) -> dict:
        return {
            "axes": [a.to_dict() for a in self.axes],
            "base": self.base.to_dict(),
            "sim": {
                "dt": self.sim.dt,
                "t_end": self.sim.t_end,
                "t_burn": self.sim.t_burn,
                "seed": self.sim.seed,
                "ic_sigma": self.sim.ic_sigma,
                "bound": self.sim.bound,
            },
            "n_trials": self.n_trials,
            "analysis": self.analysis.to_dict(),
            "swap_streams": self.swap_streams,
        }


@dataclass
class EnsembleResult:
    mean: SyncMetrics
    stderr: SyncMetrics
    n_ok: int
    n_failed: int
    trials: list = field(default_factory=list, repr=False)


@dataclass
class CellResult:
    index: tuple
    values: dict
    mean: Optional[SyncMetrics] = None
    stderr: Optional[SyncMetrics] = None
    n_ok: int = 0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.mean is not None


@dataclass(frozen=True)
class OptimaReport:
    min_abs_dphi: float
    argmin: dict
    optimal_noise_ratio: Optional[float]
    noise_sum: float
    tie_break: str = TIE_BREAK

    def to_dict(self) -> dict:
        return {
            "min_abs_dphi": self.min_abs_dphi,
            "argmin": dict(self.argmin),
            "optimal_noise_ratio": self.optimal_noise_ratio,
            "noise_sum": self.noise_sum,
            "tie_break": self.tie_break,
        }


def _fmt(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.17g}"


@dataclass
class SweepResult:
    grid: SweepGrid
    cells: list
    metadata: dict

    def array(self, metric: str = "abs_dphi", stat: str = "mean") -> np.ndarray:
        """Cell values shaped like the grid; NaN marks failed cells."""
        out = np.full(self.grid.shape, np.nan)
        for c in self.cells:
            src = getattr(c, stat)
            if src is not None:
                v = getattr(src, metric)
                out[c.index] = np.nan if v is None else v
        return out

    def to_csv(self, path) -> None:
        axes = self.grid.axes
        header = [axes[0].param] + ([axes[1].param] if len(axes) > 1 else ["axis2"])
        header += ["abs_dphi", "R", "rho", "stderr_abs_dphi", "n_ok"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for c in self.cells:
                a1 = c.values[axes[0].param]
                a2 = c.values[axes[1].param] if len(axes) > 1 else None
                if c.ok:
                    row = [c.mean.abs_dphi, c.mean.R, c.mean.rho, c.stderr.abs_dphi]
                else:
                    row = [None] * 4
                w.writerow([_fmt(a1), _fmt(a2)] + [_fmt(v) for v in row] + [c.n_ok])

    def sidecar(self) -> dict:
        meta = dict(self.metadata)
        meta["failed_cells"] = [
            {"index": list(c.index), "values": c.values, "error": c.error} for c in self.cells if not c.ok
        ]
        return meta

    def write_sidecar(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def run_trial(
    p: ModelParams,
    sim: SimConfig,
    trial: int = 0,
    settings: AnalysisSettings = AnalysisSettings(),
    with_beta: bool = False,
    swap_streams: bool = False,
) -> SyncMetrics:
    """integrate -> low-pass -> phases -> metrics for trial ``trial`` of ``sim.seed``."""
    streams = trial_streams(sim.seed, trial)
    if swap_streams:
        streams = streams[::-1]
    traj = integrate(p, sim, streams)
    return compute_metrics(traj, p.omega0, settings, with_beta=with_beta)


def _safe_trial(args):
    p, sim, trial, settings, with_beta, swap = args
    try:
        return run_trial(p, sim, trial, settings, with_beta, swap)
    except HopfSyncError as exc:
        return exc


def _pmap(fn, items, workers):
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (8 * workers))))


def _aggregate(outcomes: Sequence) -> EnsembleResult:
    ok = [o for o in outcomes if isinstance(o, SyncMetrics)]
    failed = [o for o in outcomes if not isinstance(o, SyncMetrics)]
    if len(failed) > MAX_FAILED_FRACTION * len(outcomes):
        first = failed[0]
        raise EnsembleFailed(
            f"{len(failed)}/{len(outcomes)} trials failed ({type(first).__name__}: {first})"
        ) from first
    arr = np.array([[m.abs_dphi, m.R, m.rho] for m in ok])
    mean = arr.mean(axis=0)
    se = arr.std(axis=0, ddof=1) / math.sqrt(len(ok)) if len(ok) > 1 else np.full(3, np.nan)
    betas = np.array([m.beta for m in ok if m.beta is not None])
    if betas.size:
        b_mean = float(betas.mean())
        b_se = float(betas.std(ddof=1) / math.sqrt(betas.size)) if betas.size > 1 else math.nan
    else:
        b_mean = b_se = None
    return EnsembleResult(
        mean=SyncMetrics(float(mean[0]), float(mean[1]), float(mean[2]), b_mean),
        stderr=SyncMetrics(float(se[0]), float(se[1]), float(se[2]), b_se),
        n_ok=len(ok),
        n_failed=len(failed),
        trials=list(outcomes),
    )


def ensemble_average(
    p: ModelParams,
    sim: SimConfig,
    n_trials: int,
    seed: Optional[int] = None,
    settings: AnalysisSettings = AnalysisSettings(),
    with_beta: bool = False,
    workers: Optional[int] = None,
    swap_streams: bool = False,
) -> EnsembleResult:
    """Mean and standard error of the metrics over ``n_trials`` trials.

    Raises :class:`EnsembleFailed` when more than 1% of the trials fail.
    """
    if n_trials < 1:
        raise ParameterError("n_trials must be >= 1")
    if seed is not None:
        sim = sim.replace(seed=seed)
    items = [(p, sim, k, settings, with_beta, swap_streams) for k in range(n_trials)]
    return _aggregate(_pmap(_safe_trial, items, workers))


def sweep(
    grid: SweepGrid,
    workers: Optional[int] = None,
    progress: Optional[Callable[[int, int], None]] = None,
    with_beta: bool = False,
) -> SweepResult:
    """Ensemble average at every grid cell; failed cells are recorded, not fatal."""
    cells = grid.cells()
    items = []
    for _, values in cells:
        p = grid.params_for(values)
        items.extend((p, grid.sim, k, grid.analysis, with_beta, grid.swap_streams) for k in range(grid.n_trials))

    if progress is None:
        outcomes = _pmap(_safe_trial, items, workers)
    else:
        lock = threading.Lock()
        done = [0]
        total = len(items)

        def tracked(it):
            out = _safe_trial(it)
            with lock:
                done[0] += 1
                if done[0] % grid.n_trials == 0 or done[0] == total:
                    progress(done[0] // grid.n_trials, len(cells))
            return out

        outcomes = _pmap(tracked, items, workers)

    results = []
    n = grid.n_trials
    for c, (idx, values) in enumerate(cells):
        try:
            ens = _aggregate(outcomes[c * n : (c + 1) * n])
            results.append(CellResult(idx, values, ens.mean, ens.stderr, ens.n_ok))
        except EnsembleFailed as exc:
            results.append(CellResult(idx, values, error=str(exc)))
    meta = {
        "version": __version__,
        "seed": grid.sim.seed,
        "n_bins": grid.analysis.n_bins,
        "filter_cutoff": grid.analysis.cutoff_for(grid.base.omega0),
        "grid": grid.to_dict(),
        "tie_break": TIE_BREAK,
        "seeding": "trial k uses Philox streams keyed (seed, k, oscillator) in every cell",
    }
    return SweepResult(grid, results, meta)


def find_optimum(res: SweepResult) -> OptimaReport:
    """Cell with the smallest averaged |dphi| (ties: smaller delta1+delta2, then delta1)."""
    best = None
    for c in res.cells:
        if not c.ok:
            continue
        p = res.grid.params_for(c.values)
        key = (c.mean.abs_dphi, p.delta1 + p.delta2, p.delta1)
        if best is None or key < best[0]:
            best = (key, c, p)
    if best is None:
        raise AllCellsFailed("no sweep cell produced metrics")
    (val, _, _), cell, p = best
    ratio = p.delta1 / p.delta2 if p.delta2 > 0 else None
    argmin = dict(cell.values)
    argmin.setdefault("delta1", p.delta1)
    argmin.setdefault("delta2", p.delta2)
    return OptimaReport(val, argmin, ratio, p.delta1 + p.delta2)


def nested_optima(
    outer_axes: Sequence[SweepAxis],
    inner_axes: Sequence[SweepAxis],
    base: ModelParams,
    sim: SimConfig,
    n_trials: int,
    settings: AnalysisSettings = AnalysisSettings(),
    workers: Optional[int] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> list:
    """For every outer cell, sweep the inner grid and report its optimum.

    Returns ``[(outer_values, OptimaReport or None, error or None), ...]``
    in row-major outer order.
    """
    outer = SweepGrid(tuple(outer_axes), base, sim, 1, settings)
    rows = []
    cells = outer.cells()
    for i, (_, values) in enumerate(cells):
        inner = SweepGrid(tuple(inner_axes), base.replace(**values), sim, n_trials, settings)
        res = sweep(inner, workers=workers)
        try:
            rows.append((values, find_optimum(res), None))
        except AllCellsFailed as exc:
            rows.append((values, None, str(exc)))
        if progress is not None:
            progress(i + 1, len(cells))
    return rows


def optimum_vs_lambda(
    lambdas: Sequence[float],
    noise_axes: Sequence[SweepAxis],
    base: ModelParams,
    sim: SimConfig,
    n_trials: int,
    settings: AnalysisSettings = AnalysisSettings(),
    workers: Optional[int] = None,
) -> list:
    """Rows ``(lambda0, min |dphi|, delta1* + delta2*)`` over the excitable regime."""
    lambdas = sorted(float(v) for v in lambdas)
    if any(v >= 0 for v in lambdas):
        raise ParameterError("optimum_vs_lambda needs lambda0 < 0 (excitable regime)")
    rows = nested_optima([SweepAxis("lambda0", lambdas)], noise_axes, base, sim, n_trials, settings, workers)
    out = []
    for values, rep, _ in rows:
        if rep is None:
            out.append((values["lambda0"], None, None))
        else:
            out.append((values["lambda0"], rep.min_abs_dphi, rep.noise_sum))
    return out


def snr_curve(
    deltas: Sequence[float],
    base: ModelParams,
    sim: SimConfig,
    n_trials: int,
    settings: AnalysisSettings = AnalysisSettings(),
    workers: Optional[int] = None,
) -> list:
    """SNR of a single (uncoupled) oscillator for each noise level.

    Couplings are forced to zero, so each trial holds two independent copies
    of the single oscillator; both are used. The low-pass filtered x-series
    spectra are averaged over all copies before the peak is measured.
    Returns rows ``(delta, beta)`` with ``beta=None`` when no interior peak.
    """
    if n_trials < 1:
        raise ParameterError("n_trials must be >= 1")
    single = base.replace(d1=0.0, d2=0.0)
    cutoff = settings.cutoff_for(single.omega0)

    def one(args):
        delta, k = args
        p = single.replace(delta1=delta, delta2=delta)
        traj = integrate(p, sim, trial_streams(sim.seed, k))
        xs = lowpass(traj.samples[:, [0, 2]], cutoff, sim.dt)
        sp1 = power_spectrum(xs[:, 0], sim.dt, settings.psd_segment, settings.psd_overlap, settings.psd_window)
        sp2 = power_spectrum(xs[:, 1], sim.dt, settings.psd_segment, settings.psd_overlap, settings.psd_window)
        return sp1.frequencies, sp1.power + sp2.power

    deltas = [float(d) for d in deltas]
    items = [(d, k) for d in deltas for k in range(n_trials)]
    spectra = _pmap(one, items, workers)
    rows = []
    for i, d in enumerate(deltas):
        chunk = spectra[i * n_trials : (i + 1) * n_trials]
        power = np.sum([c[1] for c in chunk], axis=0) / (2 * n_trials)
        try:
            rows.append((d, snr_beta(Spectrum(chunk[0][0], power))))
        except NoPeak:
            rows.append((d, None))
    return rows


def mean_density(
    p: ModelParams,
    sim: SimConfig,
    n_trials: int,
    settings: AnalysisSettings = AnalysisSettings(),
    workers: Optional[int] = None,
) -> PhaseDensity:
    """Bin-wise average of the per-trial phase-difference densities."""
    if n_trials < 1:
        raise ParameterError("n_trials must be >= 1")

    def one(k):
        traj = integrate(p, sim, trial_streams(sim.seed, k))
        return phase_diff_density(phase_series(traj, p.omega0, settings), settings.n_bins)

    dens = _pmap(one, list(range(n_trials)), workers)
    return PhaseDensity(dens[0].edges, np.mean([d.density for d in dens], axis=0))

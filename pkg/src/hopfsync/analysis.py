"""Phase extraction, synchronization measures and spectral SNR.

Phases are geometric: the full-quadrant angle of (x_i, y_i) about the fixed
point, reduced into [0, 2pi). Phase differences are wrapped into (-pi, pi]
before taking absolute values or histograms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
from scipy import fft as sfft
from scipy import signal

from .errors import BadCutoff, DegenerateSample, EmptySeries, NoPeak, ParameterError, TooShort

__all__ = [
    "AnalysisSettings",
    "PhaseSeries",
    "PhaseDensity",
    "Spectrum",
    "SyncMetrics",
    "natural_phase",
    "cyclic_phase",
    "lowpass",
    "wrap_phase",
    "abs_crp_difference",
    "mean_phase_coherence",
    "sync_index",
    "sync_index_from_counts",
    "phase_diff_density",
    "circular_stats",
    "density_mode",
    "power_spectrum",
    "snr_beta",
    "phase_series",
    "filtered_samples",
    "phases_from_filtered",
    "compute_metrics",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AnalysisSettings:
    """Post-processing knobs. ``cutoff=None`` means ``4 * omega0``."""

    cutoff: Optional[float] = None
    n_bins: int = 64
    psd_segment: int = 2048
    psd_overlap: float = 0.5
    psd_window: str = "hann"
    min_amplitude: float = 1e-12

    def __post_init__(self):
        if self.cutoff is not None and not self.cutoff > 0:
            raise ParameterError("cutoff must be > 0")
        if int(self.n_bins) != self.n_bins or self.n_bins < 2:
            raise ParameterError("n_bins must be an integer >= 2")
        if int(self.psd_segment) != self.psd_segment or self.psd_segment < 16:
            raise ParameterError("psd_segment must be an integer >= 16")
        if not 0 <= self.psd_overlap < 1:
            raise ParameterError("psd_overlap must lie in [0, 1)")
        if self.min_amplitude < 0:
            raise ParameterError("min_amplitude must be >= 0")

    def cutoff_for(self, omega0: float) -> float:
        return self.cutoff if self.cutoff is not None else 4.0 * omega0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PhaseSeries:
    t0: float
    dt: float
    phases: np.ndarray = field(repr=False)  # shape (2, n), values in [0, 2pi)

    @property
    def phi1(self) -> np.ndarray:
        return self.phases[0]

    @property
    def phi2(self) -> np.ndarray:
        return self.phases[1]

    def __len__(self):
        return self.phases.shape[1]

    def difference(self) -> np.ndarray:
        """Raw difference phi1 - phi2, in (-2pi, 2pi)."""
        if len(self) == 0:
            raise EmptySeries("phase series has no samples")
        return self.phi1 - self.phi2


@dataclass(frozen=True)
class PhaseDensity:
    edges: np.ndarray
    density: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray  # rad / time
    power: np.ndarray


@dataclass(frozen=True)
class SyncMetrics:
    abs_dphi: float
    R: float
    rho: float
    beta: Optional[float] = None

    FIELDS = ("abs_dphi", "R", "rho", "beta")

    def as_tuple(self):
        return (self.abs_dphi, self.R, self.rho, self.beta)


def natural_phase(x, y, min_amplitude: float = 0.0) -> np.ndarray:
    """Angle of (x, y) about the origin, via the two-argument arctangent.

    Raises :class:`DegenerateSample` if any sample has amplitude
    ``<= min_amplitude`` (with the default, only the exact origin).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ParameterError("x and y must have the same shape")
    r = np.hypot(x, y)
    if r.size and (r.min() <= min_amplitude):
        k = int(np.argmin(r))
        raise DegenerateSample(f"sample {k} has amplitude {r[k]:.3g}; phase undefined at the fixed point")
    return np.arctan2(y, x)


def cyclic_phase(angles) -> np.ndarray:
    """Reduce angles into [0, 2pi)."""
    out = np.mod(np.asarray(angles, dtype=float), TWO_PI)
    # mod of a tiny negative number rounds up to exactly 2pi
    out[out >= TWO_PI] = 0.0
    return out


def wrap_phase(d) -> np.ndarray:
    """Map angles into (-pi, pi]."""
    return math.pi - np.mod(math.pi - np.asarray(d, dtype=float), TWO_PI)


def lowpass(series, cutoff: float, dt: float) -> np.ndarray:
    """Zero-phase ideal low-pass along axis 0; ``cutoff`` in rad/time.

    Cosine-transform coefficients above ``cutoff`` are zeroed. The DCT-II
    basis is the even extension of the series, so there is no wrap-around
    jump at the ends, and the operation is a projection: filtering twice
    equals filtering once.
    """
    nyquist = math.pi / dt
    if not 0 < cutoff < nyquist:
        raise BadCutoff(f"cutoff {cutoff:g} rad/time must lie in (0, {nyquist:g})")
    x = np.asarray(series, dtype=float)
    n = x.shape[0]
    if n == 0:
        return x.copy()
    # coefficient k oscillates at pi k / (n dt) rad/time
    keep = int(math.floor(cutoff * n * dt / math.pi)) + 1
    if keep >= n:
        return x.copy()
    c = sfft.dct(x, type=2, norm="ortho", axis=0)
    c[keep:] = 0.0
    return sfft.idct(c, type=2, norm="ortho", axis=0)


def abs_crp_difference(ps: PhaseSeries) -> float:
    """Time average of |wrap(phi1 - phi2)|; 0 means perfect in-phase locking."""
    a = np.mod(np.abs(ps.difference()), TWO_PI)
    # min(a, 2pi - a) depends only on |d|, so relabelling leaves it bit-identical
    return float(np.mean(np.minimum(a, TWO_PI - a)))


def mean_phase_coherence(ps: PhaseSeries) -> float:
    d = ps.difference()
    return float(min(1.0, math.hypot(np.mean(np.sin(d)), np.mean(np.cos(d)))))


def sync_index_from_counts(counts) -> float:
    """Normalized entropy index (S_max - S) / S_max of a histogram."""
    counts = np.asarray(counts, dtype=float)
    n = counts.size
    if n < 2:
        raise ParameterError("need at least 2 bins")
    total = counts.sum()
    if total <= 0:
        raise EmptySeries("histogram is empty")
    p = np.sort(counts[counts > 0] / total)  # sorted: order-free summation
    s = -float(np.sum(p * np.log(p)))
    s_max = math.log(n)
    return float(min(1.0, max(0.0, (s_max - s) / s_max)))


def sync_index(ps: PhaseSeries, n_bins: int = 64) -> float:
    """Entropy-based index of the wrapped phase difference; 1 = delta-like."""
    if n_bins < 2:
        raise ParameterError("n_bins must be >= 2")
    counts, _ = np.histogram(wrap_phase(ps.difference()), bins=n_bins, range=(-math.pi, math.pi))
    return sync_index_from_counts(counts)


def phase_diff_density(ps: PhaseSeries, n_bins: int = 64) -> PhaseDensity:
    """Normalized histogram density of wrap(phi1 - phi2) over (-pi, pi]."""
    if n_bins < 2:
        raise ParameterError("n_bins must be >= 2")
    density, edges = np.histogram(
        wrap_phase(ps.difference()), bins=n_bins, range=(-math.pi, math.pi), density=True
    )
    return PhaseDensity(edges, density)


def circular_stats(dens: PhaseDensity) -> tuple[float, float]:
    """Circular mean direction and circular standard deviation of a density."""
    w = dens.density * dens.widths
    z = np.sum(w * np.exp(1j * dens.centers)) / np.sum(w)
    r = min(abs(z), 1.0)
    return float(np.angle(z)), float(math.sqrt(-2.0 * math.log(r))) if r > 0 else math.inf


def density_mode(dens: PhaseDensity, smooth_bins: float = 2.0) -> float:
    """Location of the density peak, in (-pi, pi].

    The histogram is smoothed with a circular Gaussian kernel of
    ``smooth_bins`` bins before the argmax, which is then refined by a
    parabola through its neighbours.
    """
    f = np.asarray(dens.density, dtype=float)
    n = f.size
    if smooth_bins > 0:
        k = np.arange(n)
        k = np.minimum(k, n - k)
        kern = np.exp(-0.5 * (k / smooth_bins) ** 2)
        f = np.real(np.fft.ifft(np.fft.fft(f) * np.fft.fft(kern / kern.sum())))
    i = int(np.argmax(f))
    a, b, c = f[i - 1], f[i], f[(i + 1) % n]
    den = a - 2 * b + c
    shift = 0.5 * (a - c) / den if den < 0 else 0.0
    width = 2 * math.pi / n
    return float(wrap_phase(dens.centers[i] + shift * width))


def power_spectrum(series, dt: float, segment: int = 2048, overlap: float = 0.5, window: str = "hann") -> Spectrum:
    """Averaged modified periodogram, one-sided, in rad/time units.

    The density is per unit angular frequency, so integrating ``power`` over
    ``frequencies`` gives the series variance.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 256:
        raise TooShort(f"need at least 256 samples, got {x.size}")
    nperseg = min(int(segment), x.size)
    f, pxx = signal.welch(
        x,
        fs=1.0 / dt,
        window=window,
        nperseg=nperseg,
        noverlap=int(overlap * nperseg),
        detrend="constant",
        scaling="density",
    )
    return Spectrum(TWO_PI * f, pxx / TWO_PI)


def _crossing(w0, w1, p0, p1, level):
    if p1 == p0:
        return w0
    return w0 + (level - p0) * (w1 - w0) / (p1 - p0)


def snr_beta(sp: Spectrum) -> float:
    """Peak height times peak frequency over the peak width at exp(-1/2) height."""
    w = np.asarray(sp.frequencies, dtype=float)
    p = np.asarray(sp.power, dtype=float)
    k = int(np.argmax(p))
    if k == 0 or k == p.size - 1 or not p[k] > 0:
        raise NoPeak("spectrum maximum lies on the frequency-range boundary")
    h = p[k]
    # parabolic refinement of the peak centre across three bins
    denom = p[k - 1] - 2.0 * h + p[k + 1]
    shift = 0.5 * (p[k - 1] - p[k + 1]) / denom if denom != 0 else 0.0
    w_peak = w[k] + shift * (w[k + 1] - w[k])
    h = h - 0.25 * (p[k - 1] - p[k + 1]) * shift  # parabola vertex height
    level = math.exp(-0.5) * h
    i = k
    while i > 0 and p[i - 1] >= level:
        i -= 1
    left = w[0] if i == 0 else _crossing(w[i - 1], w[i], p[i - 1], p[i], level)
    j = k
    while j < p.size - 1 and p[j + 1] >= level:
        j += 1
    right = w[-1] if j == p.size - 1 else _crossing(w[j], w[j + 1], p[j], p[j + 1], level)
    width = right - left
    return float(h * w_peak / width)


def filtered_samples(traj, omega0: float, settings: AnalysisSettings = AnalysisSettings()) -> np.ndarray:
    """Low-pass all four coordinates of a trajectory, shape ``(n, 4)``."""
    return lowpass(traj.samples, settings.cutoff_for(omega0), traj.dt)


def phases_from_filtered(filtered: np.ndarray, t0: float, dt: float, min_amplitude: float = 0.0) -> PhaseSeries:
    phi1 = cyclic_phase(natural_phase(filtered[:, 0], filtered[:, 1], min_amplitude))
    phi2 = cyclic_phase(natural_phase(filtered[:, 2], filtered[:, 3], min_amplitude))
    return PhaseSeries(t0, dt, np.vstack([phi1, phi2]))


def phase_series(traj, omega0: float, settings: AnalysisSettings = AnalysisSettings()) -> PhaseSeries:
    """Filter all four coordinates, then take cyclic natural phases."""
    filtered = filtered_samples(traj, omega0, settings)
    return phases_from_filtered(filtered, traj.t0, traj.dt, settings.min_amplitude)


def compute_metrics(traj, omega0: float, settings: AnalysisSettings = AnalysisSettings(), with_beta: bool = False) -> SyncMetrics:
    """All synchronization measures for one trajectory.

    ``beta`` (optional) is the SNR of the filtered x1 series, ``None`` when
    its spectrum has no interior peak.
    """
    filtered = filtered_samples(traj, omega0, settings)
    ps = phases_from_filtered(filtered, traj.t0, traj.dt, settings.min_amplitude)
    beta = None
    if with_beta:
        try:
            sp = power_spectrum(filtered[:, 0], traj.dt, settings.psd_segment, settings.psd_overlap, settings.psd_window)
            beta = snr_beta(sp)
        except (NoPeak, TooShort):
            beta = None
    return SyncMetrics(
        abs_dphi=abs_crp_difference(ps),
        R=mean_phase_coherence(ps),
        rho=sync_index(ps, settings.n_bins),
        beta=beta,
    )

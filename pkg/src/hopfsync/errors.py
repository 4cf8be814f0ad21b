"""Exception hierarchy shared by all hopfsync modules."""


class HopfSyncError(Exception):
    """Base class for every error raised by hopfsync."""


class ParameterError(HopfSyncError, ValueError):
    """Invalid model, simulation or analysis parameter."""


class Blowup(HopfSyncError):
    """Integration left the admissible state region (overflow or NaN)."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DegenerateSample(HopfSyncError):
    """A trajectory sample sits on the fixed point, so its phase is undefined."""


class BadCutoff(HopfSyncError, ValueError):
    """Low-pass cutoff at or above the Nyquist frequency."""


class EmptySeries(HopfSyncError, ValueError):
    """An operation needs at least one sample."""


class TooShort(HopfSyncError, ValueError):
    """Series too short for spectral estimation."""


class NoPeak(HopfSyncError):
    """Spectrum maximum lies on the boundary of the frequency range."""


class EmptyRange(HopfSyncError, ValueError):
    """A lambda0 range contains no Hopf crossing."""


class AllCellsFailed(HopfSyncError):
    """Every cell of a sweep failed, so no optimum exists."""


class EnsembleFailed(HopfSyncError):
    """Too many trials of an ensemble raised."""

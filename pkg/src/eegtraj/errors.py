"""Exception hierarchy shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all eegtraj errors."""


# --- signal processing ---

class InvalidCutoff(ToolkitError):
    """Cutoff frequency at/above Nyquist, non-positive, or not increasing."""


class InvalidTaps(ToolkitError):
    """FIR tap count is not a positive odd integer."""


class SignalTooShort(ToolkitError):
    """Signal shorter than the zero-phase filter's padding requirement."""


class InvalidFactor(ToolkitError):
    """Downsampling factor is not a positive integer."""


class NeedsMultipleChannels(ToolkitError):
    """Average re-referencing requires at least two channels."""


class ZeroVariance(ToolkitError):
    """A channel has zero variance and cannot be standardized."""


class DegenerateRange(ToolkitError):
    """Min-max normalization over an axis with max == min."""


# --- bundle I/O ---

class MissingComponent(ToolkitError):
    """A required bundle file is absent."""


class CorruptBundle(ToolkitError):
    """Bundle contents disagree with the manifest."""


class InvalidEvents(ToolkitError):
    """Trial events violate ordering or range constraints."""


class RejectedNonFinite(ToolkitError):
    """Data contains NaN or infinity."""


class IoError(ToolkitError):
    """Filesystem failure while reading or writing artifacts."""


# --- epoching ---

class ChannelNotFound(ToolkitError):
    """A required channel label is missing from the recording."""


class EmptyEpochSet(ToolkitError):
    """No trial survived epoching."""


class NotEnoughTrials(ToolkitError):
    """Requested split sizes exceed the available trial count."""


# --- autodiff / models ---

class ShapeError(ToolkitError):
    """Input shape incompatible with a layer or model."""


class NoGraph(ToolkitError):
    """backward() called without a recorded forward graph."""


class NonFiniteGradient(ToolkitError):
    """Optimizer received a gradient containing NaN or infinity."""


class SingularSystem(ToolkitError):
    """Normal equations are singular; a positive ridge term is needed."""


class SequenceTooShort(ToolkitError):
    """Lag window too short for the pooling chain of the CNN-LSTM."""


class CorruptModel(ToolkitError):
    """Model parameters contain non-finite values."""


# --- harness ---

class UndefinedCorrelation(ToolkitError):
    """Pearson correlation undefined (zero variance or length < 2)."""


class DivergedTraining(ToolkitError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")


# --- cli ---

class StageAlreadyApplied(ToolkitError):
    """Preprocessing stage already present in the bundle's log."""


class ConfigError(ToolkitError):
    """Invalid or unknown run-configuration entry."""

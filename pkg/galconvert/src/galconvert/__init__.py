"""WAY-EEG-GAL to bundle-directory converter."""
from .convert import ConvertSummary, convert_participant
from .errors import ConvertError, MissingSeries, SourceParseError

__version__ = "0.1.0"
__all__ = ["ConvertSummary", "convert_participant",
           "ConvertError", "MissingSeries", "SourceParseError"]

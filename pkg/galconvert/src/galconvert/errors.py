class ConvertError(Exception):
    """Base for everything this tool raises on purpose."""


class MissingSeries(ConvertError):
    """A participant's series files are absent or have gaps."""


class SourceParseError(ConvertError):
    """A source file exists but cannot be understood."""

"""Exception types shared across the package."""


class CfStereoError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(CfStereoError):
    """Malformed or inconsistent run configuration."""


class FormatError(CfStereoError):
    """Malformed image or disparity file."""


class PipelineError(CfStereoError):
    """A pipeline stage failed; the message carries the stage tag."""

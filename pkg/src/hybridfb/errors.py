"""Exception types raised across the package."""


class NotAFrameError(ArithmeticError):
    """The filterbank has lower frame bound A = 0 where a frame is required."""

    def __init__(self, message, lower_bound=0.0):
        super().__init__(message)
        self.lower_bound = lower_bound


class ResourceLimitError(RuntimeError):
    """A size guard was exceeded (dense eigendecomposition, finite differences)."""


class TrainingDivergedError(ArithmeticError):
    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class FilterbankFormatError(ValueError):
    """Malformed or incompatible filterbank document."""


class WavFormatError(OSError):
    """Unsupported or malformed WAV file."""

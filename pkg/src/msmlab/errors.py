"""Exception types shared across the package."""


class MsmLabError(Exception):
    """Base class for all package-specific failures."""


class NonzeroMeanError(MsmLabError):
    """Poisson solve requested on data with a non-negligible mean."""


class ChartUndefinedError(MsmLabError):
    """Stereographic chart evaluated at or too close to its excluded pole."""


class NoConvergenceError(MsmLabError):
    """Implicit solve failed to reach tolerance within the iteration budget."""


class PicardDivergedError(MsmLabError):
    """Picard iteration stopped contracting.

    Carries the per-iteration update sizes so the caller can inspect how the
    iteration behaved before it was abandoned.
    """

    def __init__(self, message: str, trace: list[float]):
        super().__init__(message)
        self.trace = list(trace)


class TooLargeError(MsmLabError):
    """Requested exhaustive enumeration exceeds the supported budget."""


class ConfigError(MsmLabError):
    """Experiment configuration is malformed or inconsistent."""

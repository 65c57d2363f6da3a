"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Raised when an experiment configuration is malformed or inconsistent."""


class NumericalError(RuntimeError):
    """Raised when a numerical procedure fails (singular solve, non-finite result)."""


class NyquistViolationError(NumericalError):
    """Raised when event gaps exceed the Nyquist period, voiding the recovery guarantee."""

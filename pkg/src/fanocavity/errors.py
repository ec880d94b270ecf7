"""Exception types shared across the package."""


class FanocavityError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(FanocavityError):
    """A physical parameter is out of its allowed range."""


class ConfigError(FanocavityError):
    """Configuration file or override string could not be parsed."""


class DegenerateResponseError(FanocavityError):
    """The sideband linear system is singular at the requested detuning."""


class PoleError(FanocavityError):
    """The closed-form response denominator vanishes at this detuning."""

    def __init__(self, delta, message=None):
        self.delta = delta
        super().__init__(message or "response pole at delta=%r" % (delta,))


class PhaseUndefinedError(FanocavityError):
    """Transmission magnitude too small for a meaningful phase."""


class DivergenceError(FanocavityError):
    """Time-domain integration blew up (unstable parameter set)."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or "trajectory diverged at step %d" % step)


class InvalidWindowError(FanocavityError):
    """Demodulation window shorter than the requested number of periods."""


class InvalidSpecError(FanocavityError):
    """Sweep specification references an unknown parameter or preset."""

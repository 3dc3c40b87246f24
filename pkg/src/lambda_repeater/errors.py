"""Exception types shared across the package."""


class ZeroNormError(ValueError):
    """A state (or measurement branch) has vanishing norm.

    Raised when a post-selected branch is dark, e.g. projecting onto an
    outcome whose amplitudes are all exactly zero.
    """


class CapacityError(ValueError):
    """A register would exceed the configured maximum number of atoms."""


class DegenerateDenominatorError(ValueError):
    """Detuning and dissipation both vanish, so the effective rate is undefined."""


class ConvergenceFailure(RuntimeError):
    """The matrix exponential series did not reach its tolerance."""


class NotNormalizedError(ValueError):
    """A density matrix handed to a measure does not have unit trace."""


class ConfigError(ValueError):
    """Sweep configuration does not match the expected schema."""


class UnknownFigureError(KeyError):
    """No curve set is registered under the requested figure id."""

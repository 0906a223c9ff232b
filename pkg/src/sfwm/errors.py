"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class SFWMError(Exception):
    """Base class. ``exit_code`` is what the CLI returns for this failure."""

    exit_code = 3


class NumericalError(SFWMError):
    exit_code = 3


class DegenerateSteadyState(NumericalError):
    pass


class StepSizeTooLarge(NumericalError):
    pass


class ZeroDrive(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class DenominatorVanishes(NumericalError):
    pass


class SingularFirstOrderSystem(NumericalError):
    pass


class SingularBoundary(NumericalError):
    pass


class GridTooNarrow(NumericalError):
    pass


class ZeroRateNormalization(SFWMError):
    """No photon pairs are emitted, so g2 has no normalisation."""

    exit_code = 4


class ConfigError(SFWMError):
    exit_code = 2


class UnknownPreset(ConfigError):
    pass


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)

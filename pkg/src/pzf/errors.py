"""Exception hierarchy.

Each family maps onto one CLI exit code: configuration problems (2),
numerical failures (3) and violated preconditions (4).
"""


class PZFError(Exception):
    """Base class for all package errors."""


class ParameterError(PZFError, ValueError):
    """Invalid model parameters."""


class EqualSalinities(ParameterError):
    pass


class NonPositiveDilution(ParameterError):
    pass


class NonPositiveEffective(ParameterError):
    pass


class ConfigError(PZFError, ValueError):
    pass


class UnknownKey(ConfigError):
    def __init__(self, key):
        super().__init__(f"unknown configuration key {key!r}")
        self.key = key


class MalformedLine(ConfigError):
    def __init__(self, line_no, text=""):
        super().__init__(f"line {line_no}: malformed entry {text!r}")
        self.line_no = line_no


class InvalidValue(ConfigError):
    def __init__(self, key, value, reason=""):
        msg = f"invalid value {value!r} for {key!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.key = key


class NumericalError(PZFError, ArithmeticError):
    pass


class StepFailure(NumericalError):
    pass


class NonFiniteState(NumericalError):
    pass


class DegenerateEquilibrium(NumericalError):
    pass


class PreconditionError(PZFError):
    pass


class NotAnEquilibrium(PreconditionError):
    pass


class ZeroPopulation(PreconditionError):
    pass


class ZeroPhytoplankton(ZeroPopulation):
    pass


class InsufficientSamples(PreconditionError):
    pass


class InsufficientPeaks(PreconditionError):
    pass


class NoSignChange(PreconditionError):
    pass


class NoInteriorEquilibrium(PreconditionError):
    pass

"""
This module contains the exception hierarchy. Every error carries the process exit code the CLI maps it to.
"""


class RobustW1Error(Exception):
    """
    Base class for all errors raised by robustw1.
    """

    exit_code = 1


# Input and configuration errors (exit 2)


class InputError(RobustW1Error):
    exit_code = 2


class ConfigParseError(InputError):
    """
    Raised when an experiment config cannot be parsed or validated.
    """

    def __init__(
        self,
        message: str,
        field: str | None = None,
        line: int | None = None,
    ):
        self.field = field
        self.line = line
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


class MeasureFormatError(ConfigParseError):
    pass


class MeasureError(InputError):
    pass


class NegativeWeight(MeasureError):
    pass


class MassNotOne(MeasureError):
    pass


class DimensionMismatch(MeasureError):
    pass


class EmptySupport(MeasureError):
    pass


class NonFiniteValue(MeasureError):
    pass


class FiltrationError(InputError):
    pass


class InvalidBox(FiltrationError):
    pass


class AtomOutsideBox(FiltrationError):
    """
    Raised when a measure has an atom outside the filtration box.
    """

    def __init__(self, atom, lower, upper):
        self.atom = tuple(float(x) for x in atom)
        self.lower = tuple(float(x) for x in lower)
        self.upper = tuple(float(x) for x in upper)
        super().__init__(
            f"atom {self.atom} lies outside box {self.lower} .. {self.upper}"
        )


class LevelOverflow(FiltrationError):
    pass


class InstanceError(InputError):
    pass


class InvalidRadius(InstanceError):
    pass


class UnknownPayoff(InstanceError):
    pass


# Numerical errors (exit 3)


class SolverError(RobustW1Error):
    exit_code = 3


class InfeasibleInstance(SolverError):
    pass


class NumericalFailure(SolverError):
    pass


IO_EXIT_CODE = 4

"""Exception hierarchy.

``InputError`` subclasses signal bad user input (CLI exit code 2),
``NumericError`` subclasses signal numerical failure (CLI exit code 3).
"""


class TurnplateError(Exception):
    pass


class InputError(TurnplateError, ValueError):
    pass


class NumericError(TurnplateError, ArithmeticError):
    pass


class NotHermitian(InputError):
    pass


class InvalidSpec(InputError):
    pass


class InvalidDivisor(InputError):
    pass


class InvalidPartition(InputError):
    pass


class NoSymmetry(InputError):
    pass


class SectorOverflow(InputError):
    pass


class NoConvergence(NumericError):
    pass


class NotCommuting(NumericError):
    pass


class AmbiguousLabel(NumericError):
    pass


class EmptyManifold(NumericError):
    pass


class GapTooSmall(NumericError):
    pass

"""Exception hierarchy shared by the evaluation modules and the command line."""


class QTuranError(Exception):
    """Base class for every error raised by this package"""


class QDomainError(QTuranError, ValueError):
    """A parameter lies outside the domain of the requested function"""


class TuranIndexError(QTuranError, IndexError):
    """A Turán expression was requested at n = 0"""


class RemainderShiftError(QTuranError, ArithmeticError):
    """An index shift produced a non-positive remainder"""


class CrossCheckError(QTuranError, ArithmeticError):
    """Two independent evaluation routes disagree beyond their error bounds"""


class ConvergenceError(QTuranError, RuntimeError):
    """A series reached the configured term cap without meeting its tail bound"""


class GridSpecError(QTuranError, ValueError):
    """A scan description is empty, inverted or leaves the function domain"""

"""Exception hierarchy shared by all modules.

Each class carries an ``exit_code`` used by the command-line interface.
"""


class CoupledNLSError(Exception):
    exit_code = 1


class InvalidParameter(CoupledNLSError, ValueError):
    exit_code = 2


class ShapeMismatch(CoupledNLSError, ValueError):
    exit_code = 3


class NoConvergence(CoupledNLSError, RuntimeError):
    exit_code = 4


class NoMaximizer(CoupledNLSError, ArithmeticError):
    """The fibering map has no interior maximum (coupling integral B <= 0)."""

    exit_code = 5


class DegenerateComponent(CoupledNLSError, ArithmeticError):
    exit_code = 6


class TooLargeK(CoupledNLSError, ValueError):
    exit_code = 7


class ConfigError(CoupledNLSError, ValueError):
    exit_code = 8


class CriteriaFailed(CoupledNLSError):
    """One or more acceptance criteria did not pass."""

    exit_code = 9

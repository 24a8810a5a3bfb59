#  Copyright 2024 Amazon.com, Inc. or its affiliates.

from typing import Any, Optional


class AuctionQuantileError(Exception):
    """
    Base class for every error raised by the auction quantile toolkit. Each subclass carries the process exit code
    the command line surface reports when the error escapes a pipeline.
    """

    exit_code: int = 1


class InputError(AuctionQuantileError):
    """
    Raised when supplied data or configuration violates a documented requirement.
    """

    exit_code = 2


class MissingColumn(InputError):
    pass


class NonPositiveCovariate(InputError):
    pass


class WinnerError(InputError):
    pass


class NoWinner(WinnerError):
    pass


class MultipleWinners(WinnerError):
    pass


class RosterError(InputError):
    pass


class DimensionError(InputError):
    pass


class GridRangeError(InputError):
    pass


class ConfigError(InputError):
    pass


class NoQualifyingCells(InputError):
    pass


class NumericalError(AuctionQuantileError):
    """
    Raised when an optimizer, solver or root finder cannot produce a trustworthy answer.
    """

    exit_code = 3


class InvalidParameters(NumericalError):
    pass


class FlatLikelihood(NumericalError):
    pass


class NonConvergence(NumericalError):
    def __init__(self, message: str, best: Optional[Any] = None) -> None:
        """
        :param message: Description of the failure.
        :param best: The best iterate reached before giving up, if any.
        """
        super().__init__(message)
        self.best = best


class RankDeficient(NumericalError):
    pass


class Unbounded(NumericalError):
    pass


class RootFindingError(NumericalError):
    pass


class TestAbort(AuctionQuantileError):
    """
    Raised when too many bootstrap replicates fail for the result to be reported.
    """

    __test__ = False
    exit_code = 4


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to the exit code reported by the command line.

    :param error: The exception that ended the pipeline.
    :return: The exit code, 1 for anything outside the toolkit hierarchy.
    """
    if isinstance(error, AuctionQuantileError):
        return error.exit_code
    return 1

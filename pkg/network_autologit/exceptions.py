"""Exception hierarchy for Network Autologit.

Every error carries an ``exit_code`` so the command line can map it without a lookup table,
mirroring how Frappe exceptions carry an ``http_status_code``.
"""

from __future__ import annotations


class AutologitError(Exception):
    exit_code = 1


class ConfigError(AutologitError):
    """Invalid configuration or usage."""

    exit_code = 2


class DataError(AutologitError):
    """Input data violates the network contract."""

    exit_code = 3


class SelfLoopError(DataError):
    pass


class IndexRangeError(DataError):
    pass


class PairOrderError(DataError):
    """A dyad was addressed with i >= j."""


class MissingFitError(DataError):
    pass


class NumericalError(AutologitError):
    """A fit produced a non-finite objective."""

    exit_code = 4

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message if pair is None else f"pair {pair}: {message}")
        self.pair = pair

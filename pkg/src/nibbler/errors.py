"""Shared exception types.

Exit-code mapping used by the CLI: PreconditionError -> 2,
BudgetExhaustedError -> 3, I/O problems -> 4.
"""


class NibblerError(Exception):
    """Base class for package-specific failures."""


class PreconditionError(NibblerError, ValueError):
    """An operation was called outside its stated domain."""


class BudgetExhaustedError(NibblerError, RuntimeError):
    """A retry or resampling budget ran out before success.

    Carries a ``payload`` dict with whatever diagnostics the failing
    operation collected (stage index, trace, failing conditions, ...).
    """

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = dict(payload or {})

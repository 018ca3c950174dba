"""Exception hierarchy shared by every module."""


class RoughStatError(Exception):
    """Base class for all errors raised by this package."""


class RejectedInput(RoughStatError, ValueError):
    """An argument violates an operation's precondition."""


class DomainError(RejectedInput):
    """A point lies outside the domain of a partial metric space."""


class IncompleteSpecError(RoughStatError):
    """No piece of a sequence matches an index."""


class DegenerateSelectionError(RoughStatError):
    """A subsequence selection has no members up to the horizon."""


class ConfigError(RoughStatError):
    """An experiment config failed validation; carries every problem found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))

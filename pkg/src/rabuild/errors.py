"""Exception taxonomy shared across the package.

Each class carries the CLI exit code used when it escapes to the command
line front end.
"""


class RabuildError(Exception):
    exit_code = 1


class InputError(RabuildError):
    """Malformed user input: unknown generators, bad parameters, bad config."""

    exit_code = 2


class SizeCapError(RabuildError):
    """An enumeration exceeded its configured cap."""

    exit_code = 3

    def __init__(self, message, partial_count=None):
        super().__init__(message)
        self.partial_count = partial_count


class VerificationError(RabuildError):
    """A structural check that should hold failed (carries its report)."""

    exit_code = 4

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DomainError(RabuildError):
    """Operation applied outside its stated precondition."""

    exit_code = 5


class InternalError(RabuildError):
    """A guaranteed-by-construction invariant failed; indicates a bug."""

    exit_code = 6

"""Error taxonomy shared across the lab.

Exit codes follow the CLI contract: 1 for a failed check, 2 for bad
configuration or arguments, 3 for a numeric breakdown (quadrature that will
not converge, singular solves, iterations that stall).
"""


class DecayLabError(Exception):
    """Base class for everything raised deliberately by this package.

    Carries optional diagnostics so the caller can see the numbers
    behind the failure.
    """

    exit_code = 1

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = dict(diagnostics)


class CheckFailure(DecayLabError):
    """A verification ran to completion and the asserted bound is violated."""

    exit_code = 1


class InvalidArgumentError(DecayLabError):
    """Caller passed arguments outside the documented domain."""

    exit_code = 2


class NumericError(DecayLabError):
    """A numeric routine could not reach its accuracy target."""

    exit_code = 3

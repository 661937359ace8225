"""Shared exception types."""


class SplitkitError(Exception):
    """Base class for all package errors."""


class ParameterError(SplitkitError):
    """A parameter or schedule violates a validated constraint.

    The message quotes the violated inequality so callers (and the CLI) can
    report exactly which bound failed.
    """


class ScheduleError(ParameterError):
    """A block schedule violates the coverage/delay assumptions."""


class EmptyIntersectionError(SplitkitError):
    """The two half-spaces handed to the outer loop have empty intersection.

    Surfacing this means the target set is empty or a cut oracle violated
    its contract.
    """


class OracleError(SplitkitError):
    """A brute-force oracle cannot certify a solution for this instance."""

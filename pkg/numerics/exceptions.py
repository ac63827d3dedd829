"""
Exception types raised across the package.

Every error subclasses a built-in so that code catching ``ValueError`` or
``RuntimeError`` keeps working.
"""

from typing import Any, List, Optional


class ConfigurationError(ValueError):
    """Invalid or inconsistent parameters.

    Args:
        message: Summary message, or the only problem found.
        problems: Optional list of individual problems, reported together.
    """

    def __init__(self, message: str, problems: Optional[List[str]] = None):
        self.problems = list(problems) if problems else [message]
        if problems:
            message = f"{message}: " + "; ".join(problems)
        super().__init__(message)


class StepRangeError(ConfigurationError):
    """A step-size schedule was evaluated outside its horizon."""


class DegenerateConstantsError(ConfigurationError):
    """Bound constants for which a closed-form bound is undefined."""


class IngestionError(ValueError):
    """A dataset file is malformed.

    Args:
        field: Name of the offending header field or section.
        message: Description of the problem.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ContractViolationError(ValueError):
    """The caller broke a documented precondition (e.g. V_{k+1} < 0)."""


class DivergenceError(RuntimeError):
    """A non-finite iterate was produced.

    Args:
        message: Where the divergence happened.
        record: Partial run record collected before the failure, if any.
    """

    def __init__(self, message: str, record: Optional[Any] = None):
        self.record = record
        super().__init__(message)

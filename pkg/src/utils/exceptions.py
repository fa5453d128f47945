"""
Application exceptions with CLI exit code mapping.

All simulator exceptions inherit from PucsError which provides:
- Machine-readable error codes
- Exit code mapping for the command-line interface
- Structured details for logging

Usage:
    from src.utils.exceptions import ValidationError, ProbingBudgetError

    raise ValidationError("probs must sum to 1", field="probs", value=probs)
    raise ProbingBudgetError(probe_size=3, budget=2)
"""

from typing import Any, Dict, Optional


class PucsError(Exception):
    """
    Base exception for all simulator errors.

    Attributes:
        exit_code: Process exit code used by the CLI
        error_code: Machine-readable error code
        message: Human-readable error message
        details: Additional context for debugging
    """

    exit_code: int = 1
    error_code: str = "INTERNAL_ERROR"

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        error_code: Optional[str] = None,
    ):
        self.message = message
        self.details = details or {}
        if error_code:
            self.error_code = error_code
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to a dictionary for structured logs."""
        return {
            "error": self.error_code,
            "message": self.message,
            "details": self.details,
        }


# =============================================================================
# USAGE / CONFIG ERRORS (exit 2)
# =============================================================================


class ValidationError(PucsError):
    """
    Input validation failed.

    Raised when a distribution, PMF, probing cost, action profile or
    experiment config violates its invariants.
    """

    exit_code = 2
    error_code = "VALIDATION_ERROR"

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        value: Optional[Any] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        error_details = details or {}
        if field:
            error_details["field"] = field
        if value is not None:
            str_value = str(value)
            error_details["value"] = str_value[:80] if len(str_value) > 80 else value
        super().__init__(message, error_details)


class ConfigurationError(PucsError):
    """Invalid or missing configuration (config.yaml or experiment JSON)."""

    exit_code = 2
    error_code = "CONFIGURATION_ERROR"

    def __init__(
        self,
        message: str,
        config_key: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        error_details = details or {}
        if config_key:
            error_details["config_key"] = config_key
        super().__init__(message, error_details)


class ProbingBudgetError(PucsError):
    """A probing set larger than the per-round budget I was requested."""

    exit_code = 2
    error_code = "PROBING_BUDGET_EXCEEDED"

    def __init__(
        self,
        probe_size: int,
        budget: int,
        details: Optional[Dict[str, Any]] = None,
    ):
        error_details = details or {}
        error_details["probe_size"] = probe_size
        error_details["budget"] = budget
        super().__init__(
            f"Probing set of size {probe_size} exceeds probing budget I={budget}",
            error_details,
        )


class IngestError(PucsError):
    """
    Trip data cannot be turned into an environment.

    Use for missing mapped CSV columns or too few grid cells.
    """

    exit_code = 2
    error_code = "INGEST_ERROR"

    def __init__(
        self,
        message: str,
        column: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        error_details = details or {}
        if column:
            error_details["column"] = column
        super().__init__(message, error_details)
        self.column = column


# =============================================================================
# RUNTIME ERRORS (exit 1)
# =============================================================================


class ExpectationLimitError(PucsError):
    """Exact expectation would enumerate more joint outcomes than allowed."""

    exit_code = 1
    error_code = "EXPECTATION_LIMIT"

    def __init__(
        self,
        outcomes: int,
        limit: int,
        details: Optional[Dict[str, Any]] = None,
    ):
        error_details = details or {}
        error_details["outcomes"] = outcomes
        error_details["limit"] = limit
        super().__init__(
            f"Exact expectation needs {outcomes} joint outcomes, limit is {limit}; "
            "use MonteCarlo evaluation",
            error_details,
        )


class OracleInfeasibleError(PucsError):
    """Exhaustive search over probing sets is beyond the configured arm gate."""

    exit_code = 1
    error_code = "ORACLE_INFEASIBLE"

    def __init__(
        self,
        arms: int,
        max_arms: int,
        details: Optional[Dict[str, Any]] = None,
    ):
        error_details = details or {}
        error_details["arms"] = arms
        error_details["max_arms"] = max_arms
        super().__init__(
            f"Exhaustive probing oracle is infeasible for M={arms} (gate M <= {max_arms}); "
            "switch scoring to MonteCarlo mode (method=montecarlo) or reduce M",
            error_details,
        )


class DataFileError(PucsError):
    """An input file (environment JSON, trips CSV, config) cannot be read or parsed."""

    exit_code = 1
    error_code = "DATA_FILE_ERROR"

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        error_details = details or {}
        if path:
            error_details["path"] = str(path)
        super().__init__(message, error_details)

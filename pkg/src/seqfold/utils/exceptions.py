"""Custom exceptions for the application."""

from enum import Enum
from typing import Optional


class ErrorCode(Enum):
    """Error codes for application exceptions."""

    # General errors
    UNKNOWN_ERROR = 1000

    # Configuration errors
    CONFIG_ERROR = 2000

    # Array shape and numeric errors
    DIMENSION_ERROR = 3000
    NUMERIC_ERROR = 3100

    # Simulation errors
    SIMULATION_ERROR = 4000
    NO_GRASP = 4100

    # Dataset and checkpoint IO errors
    DATASET_ERROR = 5000
    CHECKPOINT_ERROR = 5100

    # Report writing errors
    REPORT_ERROR = 6000


class SeqfoldError(Exception):
    """Base exception for all application-specific errors."""

    def __init__(
        self,
        message: str = "An error occurred",
        detail: Optional[str] = None,
        error_code: ErrorCode = ErrorCode.UNKNOWN_ERROR,
    ):
        """Initialize the exception.

        Args:
            message: The error message
            detail: Additional detail about the error
            error_code: Specific error code
        """
        self.message = message
        self.detail = detail
        self.error_code = error_code
        super().__init__(f"{message}{f': {detail}' if detail else ''}")


class ConfigError(SeqfoldError):
    """Raised when there's an issue with configuration."""

    def __init__(
        self,
        message: str = "Configuration error",
        detail: Optional[str] = None,
    ):
        super().__init__(message, detail, ErrorCode.CONFIG_ERROR)


class DimensionError(SeqfoldError):
    """Raised when array shapes do not agree."""

    def __init__(
        self, message: str = "Dimension error", detail: Optional[str] = None
    ):
        super().__init__(message, detail, ErrorCode.DIMENSION_ERROR)


class NumericError(SeqfoldError):
    """Raised when a value or gradient becomes NaN or infinite."""

    def __init__(
        self, message: str = "Numeric error", detail: Optional[str] = None
    ):
        super().__init__(message, detail, ErrorCode.NUMERIC_ERROR)


class SimulationError(SeqfoldError):
    """Raised for degenerate cloth specs and topology mismatches."""

    def __init__(
        self,
        message: str = "Simulation error",
        detail: Optional[str] = None,
    ):
        super().__init__(message, detail, ErrorCode.SIMULATION_ERROR)


class NoGraspError(SimulationError):
    """Raised when a pick pixel grasps no particle."""

    def __init__(
        self,
        message: str = "No particle grasped",
        detail: Optional[str] = None,
    ):
        SeqfoldError.__init__(self, message, detail, ErrorCode.NO_GRASP)


class DatasetError(SeqfoldError):
    """Raised for missing, truncated or incompatible dataset files."""

    def __init__(
        self, message: str = "Dataset error", detail: Optional[str] = None
    ):
        super().__init__(message, detail, ErrorCode.DATASET_ERROR)


class CheckpointError(SeqfoldError):
    """Raised when a checkpoint cannot be written or parsed."""

    def __init__(
        self,
        message: str = "Checkpoint error",
        detail: Optional[str] = None,
    ):
        super().__init__(message, detail, ErrorCode.CHECKPOINT_ERROR)


class ReportError(SeqfoldError):
    """Raised when evaluation outputs cannot be written."""

    def __init__(
        self, message: str = "Report error", detail: Optional[str] = None
    ):
        super().__init__(message, detail, ErrorCode.REPORT_ERROR)

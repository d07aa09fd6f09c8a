"""
Error handling middleware and utilities.
Provides the exception hierarchy and centralized error handling for the CLI.
"""
from functools import wraps
import logging
import traceback

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class DriftPQCError(Exception):
    """Base class for every error raised on purpose by this package"""
    exit_code = EXIT_VALIDATION


class ValidationError(DriftPQCError, ValueError):
    """Inputs violate a documented precondition"""
    exit_code = EXIT_VALIDATION


class DataFileError(DriftPQCError):
    """
    A file could not be read or does not follow its schema.

    Carries optional file/row/column context so messages point at the cell.
    """
    exit_code = EXIT_IO

    def __init__(self, message, path=None, row=None, column=None):
        self.path = path
        self.row = row
        self.column = column
        super().__init__(message)

    def __str__(self):
        location = []
        if self.path is not None:
            location.append(str(self.path))
        if self.row is not None:
            location.append(f"row {self.row}")
        if self.column is not None:
            location.append(f"column '{self.column}'")
        message = super().__str__()
        return f"{', '.join(location)}: {message}" if location else message


class CalibrationError(DataFileError):
    """Calibration CSV or device JSON schema violation"""


class ChannelError(ValidationError):
    """Kraus set or channel parameter is invalid"""


class CircuitValidationError(ValidationError):
    """Circuit does not fit the device (coupling, indices) or is malformed"""

    def __init__(self, message, violations=None):
        self.violations = list(violations or [])
        super().__init__(message)


class UnboundParameterError(ValidationError):
    """A circuit still holds symbolic parameters where literals are required"""


def handle_error(error):
    """
    Centralized error handler.

    Args:
        error: Exception raised by a command

    Returns:
        Process exit code
    """
    error_message = str(error) if error else "An unexpected error occurred"

    if isinstance(error, DriftPQCError):
        logger.error(f"{type(error).__name__}: {error_message}")
        return error.exit_code

    if isinstance(error, (FileNotFoundError, PermissionError, IsADirectoryError)):
        logger.error(f"I/O error: {error_message}")
        return EXIT_IO

    # Unexpected failures keep the traceback
    logger.error(f"Unhandled error: {error_message}")
    logger.error(traceback.format_exc())
    return EXIT_VALIDATION


def error_boundary(f):
    """Decorator turning exceptions raised by a CLI command into exit codes"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            result = f(*args, **kwargs)
            return EXIT_OK if result is None else result
        except Exception as e:
            return handle_error(e)

    return decorated_function

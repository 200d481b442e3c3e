"""Exception hierarchy and the process exit codes shared across the package."""

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_CONFIG = 5
EXIT_INTERNAL = 6


class WalkvecError(Exception):
    """Base class for package-specific errors."""

    exit_code = EXIT_INTERNAL


class CorpusIOError(WalkvecError):
    """Unreadable input stream; carries the byte offset where reading failed."""

    exit_code = EXIT_IO

    def __init__(self, message: str, byte_offset: int | None = None):
        if byte_offset is not None:
            message = f"{message} (at byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class FormatError(WalkvecError):
    """Malformed or corrupt file content: bad header, truncation, checksum."""

    exit_code = EXIT_FORMAT


class ConfigurationError(WalkvecError):
    """Invalid configuration, parameter combination, or degenerate input."""

    exit_code = EXIT_CONFIG


class InternalConsistencyError(WalkvecError):
    """An invariant the implementation guarantees was violated."""

    exit_code = EXIT_INTERNAL


class UndefinedMetricError(WalkvecError):
    """A metric is undefined for the given inputs (zero vector, zero variance)."""

    exit_code = EXIT_CONFIG


class InsufficientCoverageError(UndefinedMetricError):
    """Too few in-vocabulary dataset items to compute a score."""

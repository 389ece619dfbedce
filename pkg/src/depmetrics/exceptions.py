"""Custom exceptions for depmetrics."""


class DepMetricsError(Exception):
    """Base exception for all depmetrics errors."""

    exit_code = 3

    def __init__(self, message: str, details: dict | None = None):
        """
        Initialize error.

        Args:
            message: Error message
            details: Additional error details
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ParseError(DepMetricsError):
    """Raised when a version or requirement string cannot be parsed."""

    def __init__(self, source: str, reason: str | None = None, details: dict | None = None):
        """
        Initialize error.

        Args:
            source: Text that failed to parse
            reason: Reason for parse failure
            details: Additional error details
        """
        message = f"Failed to parse '{source}'"
        if reason:
            message += f": {reason}"
        super().__init__(message, details)
        self.source = source
        self.reason = reason


class UnknownPackageError(DepMetricsError):
    """Raised when a package has no releases in the index."""

    def __init__(self, package: str, details: dict | None = None):
        super().__init__(f"Package '{package}' not found in release index", details)
        self.package = package


class MalformedDocumentError(DepMetricsError):
    """Raised when an OSV document lacks the fields needed to match versions."""

    def __init__(self, doc_id: str, reason: str, details: dict | None = None):
        """
        Initialize error.

        Args:
            doc_id: Advisory id (or file name when the id is missing)
            reason: What is wrong with the document
            details: Additional error details
        """
        super().__init__(f"Malformed advisory '{doc_id}': {reason}", details)
        self.doc_id = doc_id
        self.reason = reason


class NoDeclarationError(DepMetricsError):
    """Raised when no release of the importing package declares the dependency."""

    def __init__(self, from_pkg: str, to_pkg: str, details: dict | None = None):
        super().__init__(f"No release of '{from_pkg}' declares '{to_pkg}'", details)
        self.from_pkg = from_pkg
        self.to_pkg = to_pkg


class MixedPairError(DepMetricsError):
    """Raised when interval records of several pairs are summarized together."""

    def __init__(self, pairs: list[str], details: dict | None = None):
        super().__init__(f"Records span {len(pairs)} pairs: {', '.join(pairs[:5])}", details)
        self.pairs = pairs


class EmptyInputError(DepMetricsError):
    """Raised when an aggregate or statistic is requested over no data."""

    def __init__(self, operation: str, details: dict | None = None):
        super().__init__(f"Operation '{operation}' needs at least one value", details)
        self.operation = operation


class UnresolvableError(DepMetricsError):
    """Raised when a requirement matches no release available at the given instant."""

    def __init__(self, package: str, requirement: str, at: str, details: dict | None = None):
        """
        Initialize error.

        Args:
            package: Dependency name
            requirement: Requirement source text
            at: Instant of the resolution (RFC 3339)
            details: Additional error details
        """
        super().__init__(
            f"Requirement '{requirement}' on '{package}' matches no release at {at}", details
        )
        self.package = package
        self.requirement = requirement
        self.at = at


class DegenerateInputError(DepMetricsError):
    """Raised when a statistic is undefined for the input (e.g. constant vector)."""

    def __init__(self, operation: str, reason: str, details: dict | None = None):
        super().__init__(f"Operation '{operation}' undefined: {reason}", details)
        self.operation = operation
        self.reason = reason


class InsufficientDataError(DepMetricsError):
    """Raised when fewer values are available than a sample needs."""

    def __init__(self, label: str, available: int, needed: int, details: dict | None = None):
        super().__init__(
            f"Sample '{label}' has {available} values, {needed} needed", details
        )
        self.label = label
        self.available = available
        self.needed = needed


class ZeroMeanError(DepMetricsError):
    """Raised when an exponential fit is requested for an all-zero sample."""

    def __init__(self, label: str, details: dict | None = None):
        super().__init__(f"Sample '{label}' has zero mean, exponential rate undefined", details)
        self.label = label


class FormatError(DepMetricsError):
    """Raised when an input file does not follow its declared format."""

    exit_code = 2

    def __init__(self, path: str, reason: str, details: dict | None = None):
        super().__init__(f"Bad format in {path}: {reason}", details)
        self.path = path
        self.reason = reason


class InputIOError(DepMetricsError):
    """Raised when an input file cannot be read or an output cannot be written."""

    exit_code = 2

    def __init__(self, path: str, reason: str | None = None, details: dict | None = None):
        message = f"I/O failure on {path}"
        if reason:
            message += f": {reason}"
        super().__init__(message, details)
        self.path = path
        self.reason = reason


class InvariantViolationError(DepMetricsError):
    """Raised when a computed result breaks an internal invariant."""

    exit_code = 3

    def __init__(self, invariant: str, subject: str, details: dict | None = None):
        super().__init__(f"Invariant '{invariant}' violated for {subject}", details)
        self.invariant = invariant
        self.subject = subject


class UsageError(DepMetricsError):
    """Raised for invalid command-line or configuration values."""

    exit_code = 1

    def __init__(self, reason: str, details: dict | None = None):
        super().__init__(f"Usage error: {reason}", details)
        self.reason = reason

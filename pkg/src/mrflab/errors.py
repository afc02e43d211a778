"""Exception types shared across the package."""


class MrfLabError(Exception):
    """Base class for all package errors."""


class ValidationError(MrfLabError, ValueError):
    """Malformed input.  ``path`` points at the offending element when known."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ResourceLimitError(MrfLabError):
    """An enumeration or pivot guard was exceeded."""

    def __init__(self, what: str, limit: int):
        self.what = what
        self.limit = limit
        super().__init__(f"{what} exceeds limit {limit}")

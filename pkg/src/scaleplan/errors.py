"""Error hierarchy shared across the package.

Every error carries a machine-readable ``code`` (dotted field path or short
slug) and an optional ``location`` (``path:line`` for file-backed input) so
callers and the CLI can report failures without string matching.
"""

from __future__ import annotations


class ScaleplanError(Exception):
    """Base class for all errors raised by this package."""

    def __init__(self, message: str, *, code: str = "", location: str | None = None):
        self.code = code
        self.location = location
        prefix = f"{location}: " if location else ""
        super().__init__(f"{prefix}{message}")


class ConfigError(ScaleplanError):
    """Invalid configuration value or combination (CLI exit code 2)."""


class DataError(ScaleplanError):
    """Malformed or inconsistent input data such as plan/dump files (CLI exit code 3)."""


class InvariantViolation(ScaleplanError):
    """A verified artifact breaks a documented invariant (CLI exit code 4)."""

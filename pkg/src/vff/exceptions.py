"""Exceptions shared across the library, mapped to CLI exit codes."""

__all__ = ["ConfigError", "NumericError", "ResourceCapError"]


class ConfigError(ValueError):
    """Invalid or unknown configuration (CLI exit code 2)."""


class NumericError(RuntimeError):
    """Non-finite value encountered mid-computation (CLI exit code 3)."""


class ResourceCapError(RuntimeError):
    """Requested operation exceeds a qubit-count cap (CLI exit code 5)."""

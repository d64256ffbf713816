"""Exceptions raised across the toolkit."""


class CapExceeded(RuntimeError):
    """An enumeration size or step budget was exceeded; no partial result is returned."""


class MonotonicityViolation(RuntimeError):
    """Coupled chains lost their containment order."""

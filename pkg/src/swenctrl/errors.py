"""Exception types shared across the package."""


class ParseError(ValueError):
    """Malformed pattern text or JSON; the message names the line/column or JSON path."""


class ScaleError(RuntimeError):
    """An input exceeds a documented size or overflow guard."""


class ConsistencyError(RuntimeError):
    """An internal cross-check failed (e.g. cut capacity does not match flow value)."""

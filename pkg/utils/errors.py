from typing import Any, Dict, Optional


class FibcalcError(Exception):
    """Base error; carries an optional witness naming the offending data."""

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.witness = witness or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, "witness": self.witness}


class InputError(FibcalcError):
    """Malformed input, unknown identifiers, or inputs of the wrong shape."""


class PropertyFailure(FibcalcError):
    """A property required by an operation does not hold."""


class BoundExceeded(FibcalcError):
    """A configured cap was hit; the verdict is inconclusive."""


class InvariantError(FibcalcError):
    """An internal construction produced ill-defined data."""

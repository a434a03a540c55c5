"""Exception hierarchy shared by the computation modules and the CLI."""


class CentraError(Exception):
    """Base class for all engine errors."""

    exit_code = 1
    kind = "error"

    def to_json(self):
        return {"error": self.kind, "message": str(self)}


class ParseError(CentraError, ValueError):
    """Malformed input: bad rational, wrong matrix shape, unknown field."""

    exit_code = 2
    kind = "parse"


class CapExceeded(CentraError):
    """A resource cap (basis size, family size) was hit.

    ``partial`` carries whatever was computed before the cap triggered.
    """

    exit_code = 3
    kind = "cap_exceeded"

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial if partial is not None else []

    def to_json(self):
        out = super().to_json()
        out["partial_size"] = len(self.partial)
        return out


class UnsupportedInput(CentraError):
    """Input is well formed but outside what exact rational methods can do."""

    exit_code = 4
    kind = "unsupported"


class InternalInconsistency(CentraError):
    """A theorem-backed check failed; indicates a bug, not bad input."""

    exit_code = 1
    kind = "internal"


class ValidationError(CentraError, ValueError):
    """Well-formed input that violates a precondition (e.g. a non-equivariant seed)."""

    exit_code = 2
    kind = "validation"

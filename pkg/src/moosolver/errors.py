"""Exception types shared across the package."""


class CodeError(ValueError):
    """Base class for malformed code strings."""


class LengthError(CodeError):
    """Code string has the wrong number of characters."""


class NonDigitError(CodeError):
    """Code string contains a non-decimal character."""


class DuplicateDigitError(CodeError):
    """Code string repeats a digit."""


class ParseError(ValueError):
    """A strategy document is malformed.

    ``location`` is a dotted path into the document, e.g.
    ``children.2C.children.1B``.
    """

    def __init__(self, message: str, location: str = "") -> None:
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class MissingChildError(RuntimeError):
    """A replay reached a response class with no subtree."""


class MismatchedSpaceError(ValueError):
    """Two guess distributions cover differently sized code spaces."""


class UnsupportedDepthError(ValueError):
    """Max-node statistics are only tabulated up to depth 3."""


class DomainError(ValueError):
    """Argument outside a function's mathematical domain."""


class InconsistentHistoryError(ValueError):
    """A guess history admits no consistent secret."""


class SearchDepthError(RuntimeError):
    """Recursion exceeded the search safety cap."""

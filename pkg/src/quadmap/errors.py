"""Exception hierarchy shared by every quadmap module."""


class QuadmapError(Exception):
    """Base class for all library errors."""


class NonPrimeModulus(QuadmapError):
    pass


class NoIrreducible(QuadmapError):
    pass


class UnsupportedExtension(QuadmapError):
    pass


class CtxMismatch(QuadmapError):
    """Values from two different field contexts were combined."""


class IndexOutOfRange(QuadmapError):
    pass


class WrongCharacteristic(QuadmapError):
    pass


class NotQuadraticHomogeneous(QuadmapError):
    pass


class NotSquare(QuadmapError):
    pass


class ShapeMismatch(QuadmapError):
    pass


class Singular(QuadmapError):
    pass


class ZeroMatrix(QuadmapError):
    pass


class FieldTooSmall(QuadmapError):
    pass


class NotSymmetric(QuadmapError):
    pass


class NonzeroDiagonal(QuadmapError):
    pass


class ParseError(QuadmapError):
    """Raised by the text parsers; carries a 1-based line and column."""

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class PreconditionViolated(QuadmapError):
    pass


class HypothesisViolated(QuadmapError):
    pass


class RankMismatch(QuadmapError):
    pass


class ContractViolation(QuadmapError):
    """A branch that is unreachable for valid input was reached.

    ``state`` holds whatever the caller found useful for debugging.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state or {}


class NotKeller(QuadmapError):
    pass


class NotSquareMap(QuadmapError):
    pass


class RankTooHigh(QuadmapError):
    pass


class DegreeTooHigh(QuadmapError):
    pass


class TriangularizationStuck(QuadmapError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual

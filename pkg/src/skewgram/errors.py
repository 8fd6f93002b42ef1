"""Exception types raised across the package."""


class SkewGramError(Exception):
    """Base class for every error raised by skewgram."""


class NumericFailure(SkewGramError):
    """A computation could not produce a trustworthy result."""


class NotHermitian(SkewGramError, ValueError):
    pass


class NoConvergence(NumericFailure):
    pass


class ImaginaryResidue(NumericFailure):
    pass


class ComplexRoots(NumericFailure):
    pass


class NegativeDiscriminant(NumericFailure):
    pass


class DimensionMismatch(SkewGramError, ValueError):
    pass


class ShapeMismatch(SkewGramError, ValueError):
    pass


class DomainError(SkewGramError, ValueError):
    pass


class InvalidSpec(SkewGramError, ValueError):
    pass


class TruncationError(NumericFailure):
    """Fock truncation discards too much of the state's weight."""


class RankZero(SkewGramError, ValueError):
    pass


class NotRank2(SkewGramError, ValueError):
    pass


class NonOrthogonalColumns(SkewGramError, ValueError):
    pass

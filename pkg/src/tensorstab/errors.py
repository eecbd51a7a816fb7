"""Exception and warning types raised across the package."""

from __future__ import annotations


class TensorStabError(ValueError):
    """Base class for all domain errors."""


class UnsupportedSpace(TensorStabError):
    pass


class DegreeMismatch(TensorStabError):
    pass


class RankOrder(TensorStabError):
    pass


class EmptyPattern(TensorStabError):
    pass


class FormZero(TensorStabError):
    pass


class ScaleLimit(TensorStabError):
    pass


class NegativeWeightEntry(TensorStabError):
    pass


class Degenerate(TensorStabError):
    pass


class NotDegenerate(TensorStabError):
    pass


class NotZeroWeight(TensorStabError):
    pass


class NotSemistable(TensorStabError):
    pass


class NotSupported(TensorStabError):
    pass


class ZeroDenominator(TensorStabError):
    pass


class InvalidDatum(TensorStabError):
    pass


class RankMismatch(TensorStabError):
    pass


class AmbiguousSignClass(TensorStabError):
    pass


class NonConstantFirstTerm(UserWarning):
    """A filtration whose sheaf term is not constant cannot be balanced by a constant delta."""

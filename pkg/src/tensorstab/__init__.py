"""Exact stability of tensors on split sheaves over P1 and P2."""

from .exactalg import DeltaPoly, EvPoly, Space, rat
from .sheafmodel import Coordinate, Declared, SheafModel, Summand
from .tensor import TensorForm

__all__ = ["Coordinate", "Declared", "DeltaPoly", "EvPoly", "SheafModel", "Space", "Summand", "TensorForm", "rat"]

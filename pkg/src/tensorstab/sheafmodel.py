"""Split torsion-free sheaves on P1/P2 and their coordinate filtrations.

A model is a direct sum of twisted ideal sheaves ``I_Z(a)`` where ``Z`` is a
zero-dimensional subscheme of length ``colength``. Filtration steps are
either coordinate sub-direct-sums or declared subsheaves with explicit
rank and Hilbert polynomial.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

from .errors import TensorStabError
from .exactalg import EvPoly, Space, degree_of, hilbert_from_chern
from . import linalg


@dataclass(frozen=True)
class Summand:
    twist: int
    colength: int = 0

    def __post_init__(self):
        if self.colength < 0:
            raise TensorStabError("colength must be nonnegative")


@dataclass(frozen=True)
class SheafModel:
    space: Space
    summands: tuple[Summand, ...]

    def __post_init__(self):
        object.__setattr__(self, "space", Space.parse(self.space))
        object.__setattr__(self, "summands", tuple(self.summands))
        if not self.summands:
            raise TensorStabError("a sheaf model needs at least one summand")
        if self.space is Space.P1 and any(s.colength for s in self.summands):
            raise TensorStabError("colength must be 0 on P1")

    @classmethod
    def of(cls, space: Union[str, Space], *summands: tuple[int, int]) -> "SheafModel":
        return cls(Space.parse(space), tuple(Summand(*s) for s in summands))

    @property
    def rank(self) -> int:
        return len(self.summands)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def degree(self) -> int:
        return sum(s.twist for s in self.summands)

    @property
    def hilbert(self) -> EvPoly:
        return self.subsheaf_hilbert(range(self.rank))

    def summand_hilbert(self, i: int) -> EvPoly:
        s = self.summands[i]
        return hilbert_from_chern(self.space, 1, s.twist, s.colength)

    def subsheaf_hilbert(self, indices) -> EvPoly:
        total = EvPoly()
        for i in indices:
            total = total + self.summand_hilbert(i)
        return total

    def subsheaf_degree(self, indices) -> int:
        return sum(self.summands[i].twist for i in indices)

    def to_json(self) -> dict:
        return {
            "space": self.space.name,
            "summands": [{"twist": s.twist, "colength": s.colength} for s in self.summands],
        }


def sheaf_hilbert(model: SheafModel) -> EvPoly:
    return model.hilbert


@dataclass(frozen=True)
class Coordinate:
    """Sub-direct-sum spanned by the given summands (0-based indices)."""

    indices: frozenset[int]

    def __init__(self, indices):
        object.__setattr__(self, "indices", frozenset(indices))

    @property
    def label(self) -> str:
        return "{" + ",".join(f"e{i + 1}" for i in sorted(self.indices)) + "}"


@dataclass(frozen=True)
class Declared:
    """A subsheaf given by its numerical data.

    ``basis`` spans the subspace of the generic fibre; it is needed whenever
    the step is evaluated against a form.
    """

    rank: int
    hilbert: EvPoly
    label: str = "declared"
    basis: Optional[tuple[tuple[Fraction, ...], ...]] = field(default=None)

    def __post_init__(self):
        if self.basis is not None:
            basis = tuple(tuple(Fraction(x) for x in v) for v in self.basis)
            object.__setattr__(self, "basis", basis)
            if linalg.rank(basis) != self.rank or len(basis) != self.rank:
                raise TensorStabError(f"declared step {self.label}: basis does not have rank {self.rank}")


FiltStep = Union[Coordinate, Declared]


def step_rank(model: SheafModel, step: FiltStep) -> int:
    return len(step.indices) if isinstance(step, Coordinate) else step.rank


def step_hilbert(model: SheafModel, step: FiltStep) -> EvPoly:
    if isinstance(step, Coordinate):
        return model.subsheaf_hilbert(step.indices)
    return step.hilbert


def step_degree(model: SheafModel, step: FiltStep) -> Fraction:
    if isinstance(step, Coordinate):
        return Fraction(model.subsheaf_degree(step.indices))
    return degree_of(step.hilbert, step.rank, model.space)


def step_basis(model: SheafModel, step: FiltStep) -> list[tuple[Fraction, ...]]:
    if isinstance(step, Coordinate):
        return [linalg.unit(model.rank, i) for i in sorted(step.indices)]
    if step.basis is None:
        raise TensorStabError(f"declared step {step.label} has no fibre basis; cannot evaluate a form on it")
    if any(len(v) != model.rank for v in step.basis):
        raise TensorStabError(f"declared step {step.label}: basis vectors must have length {model.rank}")
    return list(step.basis)


def validate_step(model: SheafModel, step: FiltStep) -> None:
    r = model.rank
    if isinstance(step, Coordinate):
        if not step.indices or len(step.indices) >= r or not step.indices <= set(range(r)):
            raise TensorStabError(f"coordinate step {step.label} must be a proper nonempty subset of the summands")
        return
    if not 0 < step.rank < r:
        raise TensorStabError(f"declared step {step.label}: rank must lie in (0, {r})")
    if step.hilbert.degree != model.n or step.hilbert.leading() <= 0:
        raise TensorStabError(f"declared step {step.label}: Hilbert polynomial must have degree {model.n} and positive leading coefficient")


def validate_chain(model: SheafModel, steps: Sequence[FiltStep]) -> None:
    """Check each step and that the chain is strictly increasing."""
    if not steps:
        raise TensorStabError("a filtration needs at least one step")
    for step in steps:
        validate_step(model, step)
    ranks = [step_rank(model, s) for s in steps]
    if any(a >= b for a, b in zip(ranks, ranks[1:])):
        raise TensorStabError("filtration ranks must be strictly increasing")
    for a, b in zip(steps, steps[1:]):
        if isinstance(a, Coordinate) and isinstance(b, Coordinate):
            if not a.indices < b.indices:
                raise TensorStabError(f"{a.label} is not contained in {b.label}")
        elif _has_basis(a) and _has_basis(b):
            outer = step_basis(model, b)
            if any(not linalg.in_span(outer, v) for v in step_basis(model, a)):
                raise TensorStabError(f"step {_label(a)} is not contained in {_label(b)}")


def _has_basis(step: FiltStep) -> bool:
    return isinstance(step, Coordinate) or step.basis is not None


def _label(step: FiltStep) -> str:
    return step.label


def proper_subsets(r: int) -> list[frozenset[int]]:
    """Proper nonempty subsets of ``range(r)`` ordered by size then lexicographically."""
    out = []
    for k in range(1, r):
        out.extend(frozenset(c) for c in itertools.combinations(range(r), k))
    return out


def enumerate_coordinate_filtrations(model: SheafModel, max_steps: int) -> Iterator[tuple[Coordinate, ...]]:
    """All strictly nested chains of proper nonempty coordinate subsets, up to ``max_steps`` long.

    Chains come out shortest first; within a length, lexicographically in
    the (size, sorted indices) order of their steps.
    """
    if max_steps < 1:
        raise TensorStabError("max_steps must be at least 1")
    subsets = proper_subsets(model.rank)

    def extend(chain: tuple[frozenset[int], ...], length: int):
        if len(chain) == length:
            yield tuple(Coordinate(s) for s in chain)
            return
        for s in subsets:
            if not chain or chain[-1] < s:
                yield from extend(chain + (s,), length)

    for length in range(1, min(max_steps, model.rank - 1) + 1):
        yield from extend((), length)

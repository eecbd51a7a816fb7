import itertools
from fractions import Fraction

import pytest

from tensorstab.errors import TensorStabError
from tensorstab.exactalg import EvPoly
from tensorstab.sheafmodel import (
    Coordinate,
    Declared,
    SheafModel,
    enumerate_coordinate_filtrations,
    sheaf_hilbert,
    step_degree,
    step_hilbert,
    validate_chain,
)

T = EvPoly.t()


def nested_chains(r, max_steps):
    """Oracle: filter all tuples of proper subsets for strict nesting."""
    subsets = [frozenset(c) for k in range(1, r) for c in itertools.combinations(range(r), k)]
    out = set()
    for k in range(1, max_steps + 1):
        for chain in itertools.permutations(subsets, k):
            if all(a < b for a, b in zip(chain, chain[1:])):
                out.add(chain)
    return out


class TestHilbert:
    def test_example(self, example):
        model, _ = example
        assert sheaf_hilbert(model) == (T + 1) * (T + 2) * Fraction(3, 2) - 3
        assert model.degree == 0 and model.rank == 3

    def test_p1(self):
        assert sheaf_hilbert(SheafModel.of("P1", (3, 0))) == T + 4
        assert sheaf_hilbert(SheafModel.of("P1", (0, 0), (0, 0))) == 2 * T + 2

    def test_colength_rejected_on_p1(self):
        with pytest.raises(TensorStabError):
            SheafModel.of("P1", (0, 1))

    def test_coordinate_subsheaf(self, example):
        model, _ = example
        step = Coordinate({0, 2})
        assert step_hilbert(model, step) == model.summand_hilbert(0) + model.summand_hilbert(2)
        assert step_degree(model, step) == 0


class TestEnumeration:
    @pytest.mark.parametrize("r, max_steps, count", [(2, 1, 2), (3, 1, 6), (3, 2, 12), (4, 3, 74)])
    def test_counts(self, r, max_steps, count):
        model = SheafModel.of("P1", *[(0, 0)] * r)
        chains = list(enumerate_coordinate_filtrations(model, max_steps))
        assert len(chains) == count
        assert {tuple(s.indices for s in c) for c in chains} == nested_chains(r, max_steps)

    def test_order_shortest_first(self):
        model = SheafModel.of("P1", (0, 0), (0, 0), (0, 0))
        lengths = [len(c) for c in enumerate_coordinate_filtrations(model, 2)]
        assert lengths == sorted(lengths)

    def test_max_steps_positive(self):
        with pytest.raises(TensorStabError):
            list(enumerate_coordinate_filtrations(SheafModel.of("P1", (0, 0)), 0))


class TestSteps:
    def test_declared_rank_bounds(self):
        model = SheafModel.of("P1", (0, 0), (0, 0))
        with pytest.raises(TensorStabError):
            validate_chain(model, [Declared(2, 2 * T + 2)])

    def test_declared_hilbert_degree(self):
        model = SheafModel.of("P2", (0, 0), (0, 0))
        with pytest.raises(TensorStabError):
            validate_chain(model, [Declared(1, T + 1)])

    def test_declared_degree(self):
        model = SheafModel.of("P2", (0, 0), (0, 0))
        step = Declared(1, (T + 2) * (T + 3) * Fraction(1, 2))
        assert step_degree(model, step) == 1

    def test_nesting(self):
        model = SheafModel.of("P1", (0, 0), (0, 0), (0, 0))
        with pytest.raises(TensorStabError):
            validate_chain(model, [Coordinate({0}), Coordinate({1, 2})])
        validate_chain(model, [Coordinate({0}), Coordinate({0, 2})])

    def test_declared_basis_rank(self):
        with pytest.raises(TensorStabError):
            Declared(2, 2 * T + 2, "bad", ((1, 0), (2, 0)))

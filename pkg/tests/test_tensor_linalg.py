import itertools
import random
from fractions import Fraction

import pytest

from tensorstab import linalg
from tensorstab.tensor import ANTISYMMETRIC, SYMMETRIC, TensorForm


def leibniz(m):
    n = len(m)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        prod = Fraction(1)
        for i in range(n):
            prod *= m[i][perm[i]]
        total += sign * prod
    return total


class TestLinalg:
    def test_det_against_leibniz(self):
        rng = random.Random(1)
        for _ in range(50):
            n = rng.randint(1, 4)
            m = [[Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(n)] for _ in range(n)]
            assert linalg.det(m) == leibniz(m)

    def test_nullspace_is_kernel(self):
        rng = random.Random(2)
        for _ in range(50):
            rows = [[rng.randint(-2, 2) for _ in range(4)] for _ in range(rng.randint(1, 3))]
            ns = linalg.nullspace(rows, 4)
            assert len(ns) == 4 - linalg.rank(rows)
            for v in ns:
                assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in rows)

    def test_inverse(self):
        m = [[2, 1], [1, 1]]
        assert linalg.matmul(m, linalg.inverse(m)) == [[1, 0], [0, 1]]

    def test_primitive_and_canonical(self):
        assert linalg.primitive([Fraction(1, 2), Fraction(-3, 2)]) == (1, -3)
        assert linalg.canonical([-2, 4]) == (1, -2)


class TestTensorForm:
    def test_from_matrix_and_dense_roundtrip(self):
        Q = TensorForm.from_matrix([[0, 0, "1/2"], [0, 1, "1/2"], ["1/2", "1/2", 1]], SYMMETRIC)
        assert Q.determinant() == Fraction(-1, 4)
        assert TensorForm.from_dense(Q.dense(), 2, symmetry=SYMMETRIC) == Q

    def test_symmetry_is_validated(self):
        with pytest.raises(ValueError):
            TensorForm.from_matrix([[0, 1], [2, 0]], SYMMETRIC)
        with pytest.raises(ValueError):
            TensorForm.from_matrix([[1, 1], [-1, 0]], ANTISYMMETRIC)

    def test_symmetry_only_for_bilinear(self):
        with pytest.raises(ValueError):
            TensorForm(3, 1, 2, {}, SYMMETRIC)

    def test_copies(self):
        data = [[[1, 0], [0, 0]], [[0, 0], [0, 2]]]
        form = TensorForm.from_dense(data, 2)
        assert form.c == 2 and form.get(1, (1, 1)) == 2

    def test_change_basis_matches_congruence(self):
        rng = random.Random(3)
        for _ in range(30):
            n = rng.randint(2, 4)
            m = [[Fraction(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
            B = [[Fraction(rng.randint(-1, 2)) for _ in range(n)] for _ in range(n)]
            Q = TensorForm.from_matrix(m)
            expected = linalg.matmul(linalg.matmul(B, m), linalg.transpose(B))
            assert Q.change_basis(B).matrix() == expected

    def test_change_basis_cubic(self):
        # x0^3 in new coordinates x0 = y0 + y1
        form = TensorForm(3, 1, 2, {(0, (0, 0, 0)): 1})
        moved = form.change_basis([[1, 0], [1, 1]])
        assert all(v == 1 for _, v in moved.items()) and len(moved.items()) == 8

    def test_permute(self):
        Q = TensorForm.from_matrix([[1, 2], [2, 3]], SYMMETRIC)
        assert Q.permute([1, 0]).matrix() == [[3, 2], [2, 1]]

    def test_json_shape(self):
        Q = TensorForm.from_matrix([[0, 1], [1, 0]], SYMMETRIC)
        assert Q.to_json() == {"s": 2, "c": 1, "dim": 2, "symmetric": True, "entries": [["0", "1"], ["1", "0"]]}

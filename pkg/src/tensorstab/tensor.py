"""Multilinear forms ``(V^{(x)s})^{+c} -> k`` with exact rational entries."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .exactalg import format_rat, rat
from . import linalg

SYMMETRIC = "symmetric"
ANTISYMMETRIC = "antisymmetric"

Key = tuple[int, tuple[int, ...]]


class TensorForm:
    """A multilinear form of arity ``s`` with ``c`` copies on a ``dim``-dimensional space.

    Only nonzero entries are stored, keyed by ``(copy, (i_1, ..., i_s))`` with
    0-based indices. Instances are treated as immutable.
    """

    __slots__ = ("s", "c", "dim", "symmetry", "_entries")

    def __init__(
        self,
        s: int,
        c: int,
        dim: int,
        entries: Mapping[Key, object] | Iterable[tuple[Key, object]] = (),
        symmetry: Optional[str] = None,
        check: bool = True,
    ):
        if s < 1 or c < 1 or dim < 1:
            raise ValueError("arity, copies and dimension must be positive")
        if symmetry not in (None, SYMMETRIC, ANTISYMMETRIC):
            raise ValueError(f"unknown symmetry flag {symmetry!r}")
        if symmetry is not None and (s != 2 or c != 1):
            raise ValueError("symmetry flags apply to s=2, c=1 forms only")
        self.s, self.c, self.dim, self.symmetry = s, c, dim, symmetry
        items = entries.items() if isinstance(entries, Mapping) else entries
        store: dict[Key, Fraction] = {}
        for (k, idx), value in items:
            idx = tuple(idx)
            if not 0 <= k < c or len(idx) != s or not all(0 <= i < dim for i in idx):
                raise ValueError(f"entry index out of range: {(k, idx)}")
            v = rat(value)
            if v != 0:
                store[(k, idx)] = store.get((k, idx), Fraction(0)) + v
                if store[(k, idx)] == 0:
                    del store[(k, idx)]
        self._entries = store
        if check and symmetry is not None:
            self._check_symmetry()

    def _check_symmetry(self) -> None:
        sign = 1 if self.symmetry == SYMMETRIC else -1
        for (k, (i, j)), v in self._entries.items():
            if self.get(k, (j, i)) != sign * v:
                raise ValueError(f"form is not {self.symmetry} at ({i}, {j})")

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence], symmetry: Optional[str] = None) -> "TensorForm":
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise ValueError("bilinear form matrix must be square")
        entries = {(0, (i, j)): rows[i][j] for i in range(n) for j in range(n)}
        return cls(2, 1, n, entries, symmetry)

    @classmethod
    def from_dense(cls, data, s: int, c: Optional[int] = None, symmetry: Optional[str] = None) -> "TensorForm":
        """Build from nested lists: depth ``s`` (one copy) or ``s + 1`` (copies first)."""

        def depth(x) -> int:
            d = 0
            while isinstance(x, (list, tuple)):
                if not x:
                    raise ValueError("empty entry list")
                x = x[0]
                d += 1
            return d

        d = depth(data)
        if d == s:
            copies = [data]
        elif d == s + 1:
            copies = list(data)
        else:
            raise ValueError(f"entries nesting depth {d} does not match s={s}")
        if c is not None and len(copies) != c:
            raise ValueError(f"expected {c} copies, got {len(copies)}")
        dim = len(copies[0])
        entries = {}
        for k, block in enumerate(copies):
            for idx in itertools.product(range(dim), repeat=s):
                x = block
                for i in idx:
                    if len(x) != dim:
                        raise ValueError("ragged entries array")
                    x = x[i]
                entries[(k, idx)] = x
        return cls(s, len(copies), dim, entries, symmetry)

    def get(self, k: int, idx: Sequence[int]) -> Fraction:
        return self._entries.get((k, tuple(idx)), Fraction(0))

    def items(self):
        """Nonzero entries as ``((copy, index), value)`` pairs in sorted order."""
        return sorted(self._entries.items())

    def is_zero(self) -> bool:
        return not self._entries

    def matrix(self, k: int = 0) -> list[list[Fraction]]:
        if self.s != 2:
            raise ValueError("matrix view needs s = 2")
        return [[self.get(k, (i, j)) for j in range(self.dim)] for i in range(self.dim)]

    def dense(self):
        def build(prefix: tuple[int, ...], k: int):
            if len(prefix) == self.s:
                return self.get(k, prefix)
            return [build(prefix + (i,), k) for i in range(self.dim)]

        copies = [build((), k) for k in range(self.c)]
        return copies[0] if self.c == 1 else copies

    def replace_entries(self, entries: Mapping[Key, Fraction], symmetry: Optional[str] = "keep") -> "TensorForm":
        sym = self.symmetry if symmetry == "keep" else symmetry
        return TensorForm(self.s, self.c, self.dim, entries, sym, check=False)

    def change_basis(self, basis: Sequence[Sequence]) -> "TensorForm":
        """Express the form in a new basis; ``basis[a]`` is the a-th new vector in old coordinates."""
        if len(basis) != self.dim or any(len(b) != self.dim for b in basis):
            raise ValueError("change of basis must be square")
        cols = [[Fraction(x) for x in b] for b in basis]
        # row b of the transition matrix: old index -> list of (new index, coefficient)
        expand = [[(a, cols[a][b]) for a in range(self.dim) if cols[a][b] != 0] for b in range(self.dim)]
        current: dict[Key, Fraction] = dict(self._entries)
        for mode in range(self.s):
            nxt: dict[Key, Fraction] = {}
            for (k, idx), v in current.items():
                for a, coef in expand[idx[mode]]:
                    key = (k, idx[:mode] + (a,) + idx[mode + 1:])
                    nxt[key] = nxt.get(key, Fraction(0)) + v * coef
            current = {key: v for key, v in nxt.items() if v != 0}
        return TensorForm(self.s, self.c, self.dim, current, self.symmetry, check=False)

    def permute(self, order: Sequence[int]) -> "TensorForm":
        """Reorder coordinates: new coordinate ``a`` is old coordinate ``order[a]``."""
        inv = {old: new for new, old in enumerate(order)}
        entries = {(k, tuple(inv[i] for i in idx)): v for (k, idx), v in self._entries.items()}
        return TensorForm(self.s, self.c, self.dim, entries, self.symmetry, check=False)

    def determinant(self) -> Fraction:
        if self.s != 2 or self.c != 1:
            raise ValueError("determinant needs a single bilinear form")
        return linalg.det(self.matrix())

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorForm):
            return NotImplemented
        return (self.s, self.c, self.dim, self._entries) == (other.s, other.c, other.dim, other._entries)

    def __hash__(self) -> int:
        return hash((self.s, self.c, self.dim, frozenset(self._entries.items())))

    def to_json(self) -> dict:
        out: dict = {"s": self.s, "c": self.c, "dim": self.dim}
        if self.symmetry == SYMMETRIC:
            out["symmetric"] = True
        elif self.symmetry == ANTISYMMETRIC:
            out["antisymmetric"] = True

        def fmt(x):
            return [fmt(y) for y in x] if isinstance(x, list) else format_rat(x)

        out["entries"] = fmt(self.dense())
        return out

    def __repr__(self) -> str:
        return f"TensorForm(s={self.s}, c={self.c}, dim={self.dim}, nonzero={len(self._entries)})"

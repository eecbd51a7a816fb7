"""Subdivision of the weight cone into cells where the mu-weight is linear.

Work in weight coordinates ``m = (m_1, ..., m_t) >= 0``; the gamma vector is
``sum m_i gamma^(r_i)``. For a multi-index ``I`` the linear function
``L_I(m) = sum_j gamma_{r_{i_j}}`` equals ``sum_i m_i (s r_i - nu_i(I) r)``.
The mu-weight is the minimum of ``L_I`` over the multi-indices where the
form does not vanish, so it is linear on every cell of the arrangement
cut out by the hyperplanes ``L_I = L_J`` (those that actually cross the
orthant). That holds for every vanishing pattern at once, hence checking
the stability inequality at the extreme rays of the cells is enough.

Cells are produced by splitting the orthant one hyperplane at a time,
keeping the extreme rays of each piece (double description update with
the combinatorial adjacency test). The number of cells grows quickly; the
refinement is refused when the arrangement has more than
``MAX_HYPERPLANES`` hyperplanes (only the full flag at r=6, s=3 among
desk-scale inputs). Pattern-specific cells stay cheap at every scale.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import RankOrder, ScaleLimit
from . import linalg

MAX_RANK = 6
MAX_ARITY = 3
MAX_HYPERPLANES = 120

IntVec = tuple[int, ...]


def _check_ranks(r: int, ranks: Sequence[int]) -> tuple[int, ...]:
    ranks = tuple(int(k) for k in ranks)
    if not ranks:
        raise RankOrder("at least one filtration step is required")
    if any(a >= b for a, b in zip(ranks, ranks[1:])) or ranks[0] <= 0 or ranks[-1] >= r:
        raise RankOrder(f"ranks must be strictly increasing inside (0, {r}), got {ranks}")
    return ranks


def _check_scale(r: int, s: int) -> None:
    if r > MAX_RANK or s > MAX_ARITY:
        raise ScaleLimit(f"cone enumeration is limited to r <= {MAX_RANK}, s <= {MAX_ARITY} (got r={r}, s={s})")
    if r < 2 or s < 1:
        raise ValueError("need r >= 2 and s >= 1")


def nu(index: Sequence[int], i: int) -> int:
    """Number of entries of the multi-index at most ``i`` (block indices are 1-based)."""
    return sum(1 for k in index if k <= i)


def linear_form(r: int, ranks: Sequence[int], index: Sequence[int]) -> IntVec:
    s = len(index)
    return tuple(s * ranks[i - 1] - r * nu(index, i) for i in range(1, len(ranks) + 1))


def all_multi_indices(t: int, s: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(1, t + 2), repeat=s))


def _dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


@functools.lru_cache(maxsize=None)
def arrangement(r: int, ranks: tuple[int, ...], s: int) -> tuple[IntVec, ...]:
    """Normals of the hyperplanes ``L_I = L_J`` that cut the open orthant."""
    t = len(ranks)
    forms = sorted({linear_form(r, ranks, idx) for idx in itertools.combinations_with_replacement(range(1, t + 2), s)})
    normals = set()
    for a, b in itertools.combinations(forms, 2):
        diff = tuple(x - y for x, y in zip(a, b))
        if any(x > 0 for x in diff) and any(x < 0 for x in diff):
            normals.add(linalg.canonical(diff))
    return tuple(sorted(normals))


@dataclass(frozen=True)
class _Piece:
    rays: tuple[IntVec, ...]
    constraints: tuple[IntVec, ...]


def _zero_mask(v: IntVec, constraints: Sequence[IntVec]) -> int:
    mask = 0
    for k, c in enumerate(constraints):
        if _dot(c, v) == 0:
            mask |= 1 << k
    return mask


def _cut(rays: Sequence[IntVec], constraints: Sequence[IntVec], h: IntVec):
    """Split the cone generated by ``rays`` along ``h``.

    Returns the ray lists of the positive and negative sides, or ``None``
    when the hyperplane does not cross the interior. Adjacency uses the combinatorial
    test: ``p`` and ``q`` span an edge iff no other extreme ray is tight on
    every constraint that both are tight on.
    """
    vals = [_dot(h, v) for v in rays]
    if all(x >= 0 for x in vals) or all(x <= 0 for x in vals):
        return None
    masks = [_zero_mask(v, constraints) for v in rays]
    pos = [k for k, x in enumerate(vals) if x > 0]
    neg = [k for k, x in enumerate(vals) if x < 0]
    zero = [rays[k] for k, x in enumerate(vals) if x == 0]
    fresh: list[IntVec] = []
    for i in pos:
        for j in neg:
            common = masks[i] & masks[j]
            if any(k != i and k != j and masks[k] & common == common for k in range(len(rays))):
                continue
            w = linalg.primitive([vals[i] * b - vals[j] * a for a, b in zip(rays[i], rays[j])])
            if w not in fresh:
                fresh.append(w)
    return [rays[k] for k in pos] + zero + fresh, [rays[k] for k in neg] + zero + fresh


def _split(piece: _Piece, h: IntVec) -> list[_Piece]:
    cut = _cut(piece.rays, piece.constraints, h)
    if cut is None:
        return [piece]
    plus, minus = cut
    neg_h = tuple(-x for x in h)
    return [
        _Piece(tuple(plus), piece.constraints + (h,)),
        _Piece(tuple(minus), piece.constraints + (neg_h,)),
    ]


def cone_rays(inequalities: Sequence[IntVec], dim: int) -> list[IntVec]:
    """Extreme rays of ``{m >= 0 : a . m >= 0 for a in inequalities}`` (empty list if only the origin)."""
    orthant = [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
    rays: list[IntVec] = list(orthant)
    constraints: list[IntVec] = list(orthant)
    for a in inequalities:
        a = tuple(a)
        vals = [_dot(a, v) for v in rays]
        if all(x >= 0 for x in vals):
            constraints.append(a)
            continue
        if all(x <= 0 for x in vals):
            rays = [v for v, x in zip(rays, vals) if x == 0]
            constraints.append(a)
            if not rays:
                return []
            continue
        cut = _cut(rays, constraints, a)
        rays = cut[0]
        constraints.append(a)
    return sorted(set(rays))


def refinement_feasible(r: int, ranks: Sequence[int], s: int) -> bool:
    return len(arrangement(r, tuple(ranks), s)) <= MAX_HYPERPLANES


@functools.lru_cache(maxsize=None)
def _refinement(r: int, ranks: tuple[int, ...], s: int) -> tuple[_Piece, ...]:
    if not refinement_feasible(r, ranks, s):
        raise ScaleLimit(
            f"the common refinement for r={r}, ranks={ranks}, s={s} has "
            f"{len(arrangement(r, ranks, s))} hyperplanes (limit {MAX_HYPERPLANES}); "
            "use pattern-specific cells instead"
        )
    t = len(ranks)
    orthant = tuple(tuple(int(i == j) for j in range(t)) for i in range(t))
    pieces = [_Piece(orthant, orthant)]
    for h in arrangement(r, ranks, s):
        pieces = [q for p in pieces for q in _split(p, h)]
    return tuple(pieces)


@dataclass(frozen=True)
class ConeCell:
    """A polyhedral cell in weight coordinates.

    ``inequalities`` are integer normals ``a`` meaning ``a . m >= 0``;
    ``rays`` are primitive integer generators. ``index`` is the multi-index
    attaining the minimum throughout the cell when the cell was built for a
    vanishing pattern, else ``None``.
    """

    index: Optional[tuple[int, ...]]
    inequalities: tuple[IntVec, ...]
    rays: tuple[IntVec, ...]

    def interior_point(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.rays))

    def contains(self, m: Sequence, strict: bool = False) -> bool:
        if strict:
            return all(_dot(a, m) > 0 for a in self.inequalities)
        return all(_dot(a, m) >= 0 for a in self.inequalities)

    def minimizer(self, nonzero: Iterable[Sequence[int]], r: int, ranks: Sequence[int]) -> tuple[int, ...]:
        """Lexicographically least multi-index minimizing ``L_I`` on the cell interior."""
        point = self.interior_point()
        best = None
        for idx in sorted(tuple(i) for i in nonzero):
            val = _dot(linear_form(r, ranks, idx), point)
            if best is None or val < best[0]:
                best = (val, idx)
        if best is None:
            raise ValueError("empty vanishing pattern")
        return best[1]


def pattern_cells(r: int, ranks: Sequence[int], s: int, nonzero: Iterable[Sequence[int]]) -> list[ConeCell]:
    """The cones ``C_I`` on which ``L_I`` is minimal among the given multi-indices.

    Multi-indices sharing a linear form share a cell, labelled by the
    lexicographically least. Cells without interior are dropped. Passing
    only the minimal elements of an upward-closed pattern gives the same
    cells, since ``L`` only decreases when an entry moves down.
    """
    ranks = _check_ranks(r, ranks)
    t = len(ranks)
    nonzero = sorted({tuple(i) for i in nonzero})
    if not nonzero:
        raise ValueError("empty vanishing pattern")
    forms = {idx: linear_form(r, ranks, idx) for idx in nonzero}
    orthant = tuple(tuple(int(i == j) for j in range(t)) for i in range(t))
    cells = []
    done = set()
    for idx in nonzero:
        if forms[idx] in done:
            continue
        done.add(forms[idx])
        ineq = set()
        for other in nonzero:
            diff = tuple(a - b for a, b in zip(forms[other], forms[idx]))
            if any(diff):
                ineq.add(linalg.primitive(diff))
        ineq = sorted(ineq)
        rays = cone_rays(ineq, t)
        if rays and linalg.rank(rays) == t:
            cells.append(ConeCell(idx, orthant + tuple(ineq), tuple(rays)))
    return cells


def subdivide(r: int, ranks: Sequence[int], s: int, nonzero: Optional[Iterable[Sequence[int]]] = None) -> list[ConeCell]:
    """Cells of the weight cone on which the mu-weight is linear.

    Without ``nonzero`` the common refinement valid for every vanishing
    pattern is returned. With the set of nonzero multi-indices of a pattern,
    the coarser cells ``C_I`` (one per minimizing multi-index) are returned.
    """
    _check_scale(r, s)
    ranks = _check_ranks(r, ranks)
    if nonzero is not None:
        return pattern_cells(r, ranks, s, nonzero)
    return [ConeCell(None, p.constraints, tuple(sorted(p.rays))) for p in _refinement(r, ranks, s)]


def gamma_from_weights(r: int, ranks: Sequence[int], weights: Sequence) -> tuple:
    """``sum m_i gamma^(r_i)`` with ``gamma^(k) = (k - r) x k, k x (r - k)``."""
    out = [0] * r
    for k, m in zip(ranks, weights):
        for j in range(r):
            out[j] += m * (k - r if j < k else k)
    return tuple(out)


def weights_from_gamma(r: int, ranks: Sequence[int], gamma: Sequence) -> tuple[Fraction, ...]:
    """Invert ``gamma_from_weights``: ``m_i`` is the jump of gamma at position ``r_i`` divided by ``r``."""
    return tuple(Fraction(gamma[k] - gamma[k - 1], r) for k in ranks)


@dataclass(frozen=True)
class RaySet:
    rays: tuple[IntVec, ...]
    weights: tuple[IntVec, ...]
    a1: int


@functools.lru_cache(maxsize=None)
def _edges(r: int, ranks: tuple[int, ...], s: int) -> RaySet:
    pieces = _refinement(r, ranks, s)
    gammas = set()
    for p in pieces:
        for m in p.rays:
            g = linalg.primitive(gamma_from_weights(r, ranks, m))
            gammas.add(tuple(r * x for x in g))
    rays = tuple(sorted(gammas))
    weights = []
    for g in rays:
        w = weights_from_gamma(r, ranks, g)
        assert all(x.denominator == 1 and x >= 0 for x in w)
        weights.append(tuple(int(x) for x in w))
    a1 = max(max(w) for w in weights)
    return RaySet(rays, tuple(weights), a1)


def edges(r: int, ranks: Sequence[int], s: int) -> RaySet:
    """Extreme rays of all cells, as gamma vectors scaled by ``r``, with recovered weights and A1."""
    _check_scale(r, s)
    return _edges(r, _check_ranks(r, ranks), s)


@functools.lru_cache(maxsize=None)
def _candidates(r: int, ranks: tuple[int, ...], s: int) -> tuple[IntVec, ...]:
    out = {linalg.primitive(w) for w in _edges(r, ranks, s).weights}
    return tuple(sorted(out, key=lambda w: (sum(1 for x in w if x), tuple(-x for x in w))))


def weight_candidates(r: int, ranks: Sequence[int], s: int) -> tuple[IntVec, ...]:
    """Primitive weight vectors of the edge rays; zero entries mean the step is dropped."""
    _check_scale(r, s)
    return _candidates(r, _check_ranks(r, ranks), s)


def bound_a1(r: int, ranks: Sequence[int], s: int) -> int:
    return edges(r, ranks, s).a1


def gcd_normalize(weights: Sequence[int]) -> tuple[int, ...]:
    g = math.gcd(*weights)
    return tuple(w // g for w in weights) if g else tuple(weights)

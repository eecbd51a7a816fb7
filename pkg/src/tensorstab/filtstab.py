"""Gamma vectors, the mu-weight of a weighted filtration, and stability verdicts.

Stability of ``(E, phi)`` for a polynomial ``delta`` asks, for every
weighted filtration, that

    sum_i m_i (r P_{E_i} - r_i P) + mu(phi, E., m.) delta  <=  0

eventually (strictly for stable). The search here runs over a finite
family of filtrations and, for each one, over the weight vectors spanning
the cells on which ``mu`` is linear; a violation is an unconditional
certificate, while "stable" only speaks for the family searched.
"""

from __future__ import annotations

import enum
import functools
import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from .errors import EmptyPattern, FormZero, NonConstantFirstTerm, RankOrder, TensorStabError
from .exactalg import DeltaPoly, EvPoly, format_rat
from .sheafmodel import (
    FiltStep,
    SheafModel,
    enumerate_coordinate_filtrations,
    step_basis,
    step_degree,
    step_hilbert,
    step_rank,
    validate_chain,
)
from .tensor import TensorForm
from . import linalg, weightcones


def _check_ranks(r: int, ranks: Sequence[int]) -> None:
    if not ranks or ranks[0] <= 0 or ranks[-1] >= r or any(a >= b for a, b in zip(ranks, ranks[1:])):
        raise RankOrder(f"ranks must be strictly increasing inside (0, {r}), got {tuple(ranks)}")


def gamma_vector(r: int, ranks: Sequence[int], weights: Sequence) -> tuple[Fraction, ...]:
    _check_ranks(r, ranks)
    if len(ranks) != len(weights):
        raise ValueError("one weight per step is required")
    weights = [Fraction(m) for m in weights]
    if any(m <= 0 for m in weights):
        raise ValueError("weights must be positive")
    return tuple(Fraction(x) for x in weightcones.gamma_from_weights(r, ranks, weights))


@dataclass(frozen=True)
class VanishingPattern:
    """Which restrictions ``phi|(E_{i_1} x ... x E_{i_s})`` are nonzero.

    ``nonzero`` holds 1-based block multi-indices; block ``t + 1`` is ``E``.
    """

    t: int
    s: int
    nonzero: frozenset[tuple[int, ...]]

    def __post_init__(self):
        object.__setattr__(self, "nonzero", frozenset(tuple(i) for i in self.nonzero))

    @classmethod
    def upward_closure(cls, t: int, s: int, generators: Iterable[Sequence[int]]) -> "VanishingPattern":
        gens = {tuple(g) for g in generators}
        nonzero = {
            idx
            for idx in itertools.product(range(1, t + 2), repeat=s)
            if any(all(a <= b for a, b in zip(g, idx)) for g in gens)
        }
        return cls(t, s, frozenset(nonzero))

    def is_upward_closed(self) -> bool:
        for idx in self.nonzero:
            for j in range(self.s):
                if idx[j] <= self.t:
                    up = idx[:j] + (idx[j] + 1,) + idx[j + 1:]
                    if up not in self.nonzero:
                        return False
        return True

    def minimal(self) -> list[tuple[int, ...]]:
        """Minimal elements (the generators of the upward-closed set)."""
        out = []
        for idx in sorted(self.nonzero):
            below = (idx[:j] + (idx[j] - 1,) + idx[j + 1:] for j in range(self.s) if idx[j] > 1)
            if not any(b in self.nonzero for b in below):
                out.append(idx)
        return out

    def restrict(self, keep: Sequence[int]) -> "VanishingPattern":
        """Pattern of the subfiltration keeping the listed (1-based) steps."""
        keep = sorted(keep)
        mapping = {new: old for new, old in enumerate(keep, start=1)}
        mapping[len(keep) + 1] = self.t + 1
        nonzero = {
            idx
            for idx in itertools.product(range(1, len(keep) + 2), repeat=self.s)
            if tuple(mapping[i] for i in idx) in self.nonzero
        }
        return VanishingPattern(len(keep), self.s, frozenset(nonzero))


def adapted_basis(dim: int, subspaces: Sequence[Sequence[Sequence]]) -> list[tuple[Fraction, ...]]:
    """Basis whose first ``dim E_i`` vectors span each ``E_i`` of the chain."""
    basis: list[tuple[Fraction, ...]] = []
    for sub in list(subspaces) + [[linalg.unit(dim, i) for i in range(dim)]]:
        for v in sub:
            v = tuple(Fraction(x) for x in v)
            if linalg.rank(basis + [v]) > len(basis):
                basis.append(v)
    return basis


def block_of(position: int, ranks: Sequence[int]) -> int:
    """1-based block of a 0-based position in an adapted basis."""
    for i, k in enumerate(ranks, start=1):
        if position < k:
            return i
    return len(ranks) + 1


def pattern_from_form(form: TensorForm, subspaces: Sequence[Sequence[Sequence]]) -> VanishingPattern:
    """Vanishing pattern of a form along a chain of fibre subspaces."""
    if form.is_zero():
        raise FormZero("the form is identically zero")
    ranks = [len(sub) for sub in subspaces]
    basis = adapted_basis(form.dim, subspaces)
    if len(basis) != form.dim or [linalg.rank(basis[:k]) for k in ranks] != ranks:
        raise TensorStabError("subspaces do not form a chain")
    coords = _coordinate_order(basis)
    moved = form.permute(coords) if coords is not None else form.change_basis(basis)
    gens = {tuple(block_of(i, ranks) for i in idx) for (_, idx), _ in moved.items()}
    return VanishingPattern.upward_closure(len(ranks), form.s, gens)


def _coordinate_order(basis: Sequence[Sequence[Fraction]]) -> Optional[list[int]]:
    """If the basis is a permutation of unit vectors, the permutation."""
    order = []
    for v in basis:
        nz = [i for i, x in enumerate(v) if x != 0]
        if len(nz) != 1 or v[nz[0]] != 1:
            return None
        order.append(nz[0])
    return order


@dataclass(frozen=True)
class MuResult:
    mu: Fraction
    argmin: tuple[int, ...]
    epsilon: tuple[int, ...]
    nu: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "mu": format_rat(self.mu),
            "argmin": list(self.argmin),
            "epsilon": list(self.epsilon),
        }


def mu(pattern: VanishingPattern, r: int, ranks: Sequence[int], weights: Sequence) -> MuResult:
    """Minimum of ``sum_j gamma_{r_{i_j}}`` over the nonzero multi-indices."""
    _check_ranks(r, ranks)
    if pattern.t != len(ranks):
        raise ValueError("pattern and filtration lengths differ")
    if not pattern.nonzero:
        raise EmptyPattern("the form vanishes on every block")
    gamma = gamma_vector(r, ranks, weights)
    at = [gamma[k - 1] for k in ranks] + [gamma[r - 1]]
    best = None
    for idx in sorted(pattern.nonzero):
        val = sum((at[i - 1] for i in idx), Fraction(0))
        if best is None or val < best[0]:
            best = (val, idx)
    value, argmin = best
    nus = tuple(weightcones.nu(argmin, i) for i in range(1, len(ranks) + 1))
    return MuResult(value, argmin, nus, nus)


def epsilon_identity(r: int, ranks: Sequence[int], weights: Sequence, index: Sequence[int]) -> tuple[Fraction, Fraction]:
    """Both sides of ``sum_j gamma_{r_{i_j}} = sum_i m_i (s r_i - nu_i(I) r)``."""
    gamma = gamma_vector(r, ranks, weights)
    full = list(ranks) + [r]
    lhs = sum((gamma[full[i - 1] - 1] for i in index), Fraction(0))
    s = len(index)
    rhs = sum(
        (Fraction(m) * (s * k - weightcones.nu(index, i) * r) for i, (k, m) in enumerate(zip(ranks, weights), start=1)),
        Fraction(0),
    )
    return lhs, rhs


def stability_lhs(P: EvPoly, r: int, ranks: Sequence[int], hilberts: Sequence[EvPoly], weights: Sequence, mu_value: Fraction, delta: EvPoly) -> EvPoly:
    """``sum m_i (r P_{E_i} - r_i P) + mu * delta``."""
    total = first_term(P, r, ranks, hilberts, weights)
    return total + delta * Fraction(mu_value)


def first_term(P: EvPoly, r: int, ranks: Sequence[int], hilberts: Sequence[EvPoly], weights: Sequence) -> EvPoly:
    total = EvPoly()
    for k, h, m in zip(ranks, hilberts, weights):
        total = total + (h * r - P * k) * Fraction(m)
    return total


def slope_first_term(d, r: int, ranks: Sequence[int], degrees: Sequence, weights: Sequence) -> Fraction:
    return sum((Fraction(m) * (r * Fraction(e) - k * Fraction(d)) for k, e, m in zip(ranks, degrees, weights)), Fraction(0))


def slope_lhs(d, r: int, ranks: Sequence[int], degrees: Sequence, weights: Sequence, mu_value: Fraction, tau) -> Fraction:
    """``sum m_i (r deg E_i - r_i d) + mu * tau``."""
    return slope_first_term(d, r, ranks, degrees, weights) + Fraction(mu_value) * Fraction(tau)


@dataclass(frozen=True)
class WeightedFiltration:
    steps: tuple[FiltStep, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "weights", tuple(Fraction(w) for w in self.weights))
        if len(self.steps) != len(self.weights) or not self.steps:
            raise TensorStabError("a weighted filtration needs one positive weight per step")
        if any(w <= 0 for w in self.weights):
            raise TensorStabError("filtration weights must be positive")

    @classmethod
    def single(cls, step: FiltStep) -> "WeightedFiltration":
        return cls((step,), (Fraction(1),))

    @property
    def label(self) -> str:
        return " < ".join(s.label for s in self.steps)

    def ranks(self, model: SheafModel) -> list[int]:
        return [step_rank(model, s) for s in self.steps]


def delta_stability_lhs(model: SheafModel, filtration: WeightedFiltration, mu_value: Fraction, delta: DeltaPoly | EvPoly) -> EvPoly:
    d = delta.poly if isinstance(delta, DeltaPoly) else delta
    return stability_lhs(
        model.hilbert,
        model.rank,
        filtration.ranks(model),
        [step_hilbert(model, s) for s in filtration.steps],
        filtration.weights,
        mu_value,
        d,
    )


def slope_stability_lhs(model: SheafModel, filtration: WeightedFiltration, mu_value: Fraction, tau) -> Fraction:
    return slope_lhs(
        model.degree,
        model.rank,
        filtration.ranks(model),
        [step_degree(model, s) for s in filtration.steps],
        filtration.weights,
        mu_value,
        tau,
    )


def chain_pattern(model: SheafModel, form: TensorForm, steps: Sequence[FiltStep]) -> VanishingPattern:
    if form.dim != model.rank:
        raise TensorStabError(f"form dimension {form.dim} differs from sheaf rank {model.rank}")
    return pattern_from_form(form, [step_basis(model, s) for s in steps])


def filtration_mu(model: SheafModel, form: TensorForm, filtration: WeightedFiltration) -> MuResult:
    validate_chain(model, filtration.steps)
    pattern = chain_pattern(model, form, filtration.steps)
    return mu(pattern, model.rank, filtration.ranks(model), filtration.weights)


class Status(str, enum.Enum):
    STABLE = "stable"
    STRICTLY_SEMISTABLE = "strictly-semistable"
    UNSTABLE = "unstable"

    @property
    def semistable(self) -> bool:
        return self is not Status.UNSTABLE


@dataclass(frozen=True)
class Certificate:
    filtration: WeightedFiltration
    mu: MuResult
    lhs: Union[EvPoly, Fraction]

    def to_json(self, model: Optional[SheafModel] = None) -> dict:
        from .io import filtration_to_json  # local: io depends on this module

        lhs = self.lhs.to_json() if isinstance(self.lhs, EvPoly) else format_rat(self.lhs)
        return {
            "filtration": filtration_to_json(self.filtration),
            "label": self.filtration.label,
            "mu": self.mu.to_json(),
            "lhs": lhs,
            "lhs_text": str(self.lhs) if isinstance(self.lhs, EvPoly) else format_rat(self.lhs),
        }


@dataclass(frozen=True)
class StabilityVerdict:
    status: Status
    certificate: Optional[Certificate]
    relative_to_family: bool
    checked: int
    family: str = ""


@dataclass(frozen=True)
class Family:
    """Filtrations to search: all coordinate chains up to ``max_steps`` plus declared chains.

    ``extra`` are weighted filtrations evaluated with exactly their own weights.
    """

    coordinate: bool = True
    max_steps: Optional[int] = None
    declared: tuple[tuple[FiltStep, ...], ...] = ()
    extra: tuple[WeightedFiltration, ...] = ()

    def chains(self, model: SheafModel) -> Iterator[tuple[FiltStep, ...]]:
        if self.coordinate:
            limit = self.max_steps if self.max_steps is not None else model.rank - 1
            yield from enumerate_coordinate_filtrations(model, limit)
        yield from self.declared

    def describe(self, model: SheafModel) -> str:
        parts = []
        if self.coordinate:
            limit = self.max_steps if self.max_steps is not None else model.rank - 1
            parts.append(f"coordinate chains up to {limit} steps")
        if self.declared:
            parts.append(f"{len(self.declared)} declared chain(s)")
        if self.extra:
            parts.append(f"{len(self.extra)} explicit weighted filtration(s)")
        return "; ".join(parts) or "empty"


@functools.lru_cache(maxsize=4096)
def _pattern_candidates(r: int, ranks: tuple[int, ...], s: int, minimal: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    out = set()
    for cell in weightcones.pattern_cells(r, ranks, s, minimal):
        out.update(linalg.primitive(v) for v in cell.rays)
    return tuple(sorted(out, key=lambda w: (sum(1 for x in w if x), tuple(-x for x in w))))


CELL_MODES = ("auto", "refinement", "pattern")


def candidate_weights(r: int, ranks: Sequence[int], s: int, pattern: Optional[VanishingPattern] = None, cells: str = "auto") -> tuple[tuple[int, ...], ...]:
    """Weight vectors to test for a chain: the edge rays of the cells where mu is linear.

    ``refinement`` uses the pattern-independent cells of :mod:`weightcones`;
    ``pattern`` uses the cones ``C_I`` of the given pattern; ``auto`` takes
    the refinement whenever it is within reach.
    """
    if cells not in CELL_MODES:
        raise ValueError(f"cells must be one of {CELL_MODES}")
    if cells == "auto":
        cells = "refinement" if pattern is None or weightcones.refinement_feasible(r, ranks, s) else "pattern"
    if cells == "refinement":
        return weightcones.weight_candidates(r, ranks, s)
    if pattern is None:
        raise ValueError("pattern-specific candidates need a vanishing pattern")
    weightcones._check_scale(r, s)
    return _pattern_candidates(r, tuple(ranks), s, tuple(pattern.minimal()))


def _subfiltration(steps: Sequence[FiltStep], weights: Sequence[int]) -> WeightedFiltration:
    kept = [(st, w) for st, w in zip(steps, weights) if w]
    if len(kept) == 1:
        return WeightedFiltration.single(kept[0][0])
    return WeightedFiltration(tuple(st for st, _ in kept), tuple(Fraction(w) for _, w in kept))


@dataclass(frozen=True)
class Evaluation:
    filtration: WeightedFiltration
    mu: MuResult
    first: Union[EvPoly, Fraction]
    lhs: Union[EvPoly, Fraction]


def evaluations(model: SheafModel, form: TensorForm, family: Family, lhs_of: Callable[[WeightedFiltration, MuResult], object], *, cells: str = "auto") -> Iterator[Evaluation]:
    """Every (filtration, candidate weights) pair of the family, in canonical order, deduplicated."""
    if form.is_zero():
        raise FormZero("the form is identically zero")
    r = model.rank
    seen = set()

    def emit(filt: WeightedFiltration, pattern: VanishingPattern):
        key = (filt.steps, filt.weights)
        if key in seen:
            return None
        seen.add(key)
        res = mu(pattern, r, filt.ranks(model), filt.weights)
        return Evaluation(filt, res, None, lhs_of(filt, res))

    for steps in family.chains(model):
        validate_chain(model, steps)
        pattern = chain_pattern(model, form, steps)
        ranks = [step_rank(model, st) for st in steps]
        cands = candidate_weights(r, ranks, form.s, pattern, cells)
        for w in cands:
            keep = [i + 1 for i, x in enumerate(w) if x]
            filt = _subfiltration(steps, w)
            sub = pattern.restrict(keep) if len(keep) < len(steps) else pattern
            ev = emit(filt, sub)
            if ev is not None:
                yield ev
    for filt in family.extra:
        validate_chain(model, filt.steps)
        pattern = chain_pattern(model, form, filt.steps)
        ev = emit(filt, pattern)
        if ev is not None:
            yield ev


def _verdict(evals: Iterable[Evaluation], sign: Callable[[object], int], family: str) -> StabilityVerdict:
    witness = None
    count = 0
    for ev in evals:
        count += 1
        sg = sign(ev.lhs)
        if sg > 0:
            return StabilityVerdict(Status.UNSTABLE, Certificate(ev.filtration, ev.mu, ev.lhs), False, count, family)
        if sg == 0 and witness is None:
            witness = Certificate(ev.filtration, ev.mu, ev.lhs)
    if witness is not None:
        return StabilityVerdict(Status.STRICTLY_SEMISTABLE, witness, True, count, family)
    return StabilityVerdict(Status.STABLE, None, True, count, family)


def search_verdict(model: SheafModel, form: TensorForm, delta: DeltaPoly | EvPoly, family: Family = Family(), *, cells: str = "auto") -> StabilityVerdict:
    """delta-stability verdict over the family; "unstable" comes with a violating certificate."""
    d = delta.poly if isinstance(delta, DeltaPoly) else delta
    if isinstance(delta, DeltaPoly) and delta.n != model.n:
        raise TensorStabError("delta was built for a different dimension")
    evals = evaluations(model, form, family, lambda f, m: delta_stability_lhs(model, f, m.mu, d), cells=cells)
    return _verdict(evals, lambda p: p.sign(), family.describe(model))


def slope_verdict(model: SheafModel, form: TensorForm, tau, family: Family = Family(), *, cells: str = "auto") -> StabilityVerdict:
    """slope-tau-stability verdict over the family."""
    tau = Fraction(tau)
    evals = evaluations(model, form, family, lambda f, m: slope_stability_lhs(model, f, m.mu, tau), cells=cells)
    return _verdict(evals, lambda x: (x > 0) - (x < 0), family.describe(model))


@dataclass(frozen=True)
class ThresholdEntry:
    filtration: WeightedFiltration
    mu: Fraction
    first: EvPoly
    threshold: Optional[Fraction]
    note: str = ""


@dataclass(frozen=True)
class ThresholdAnalysis:
    value: Fraction
    witness: Optional[ThresholdEntry]
    entries: tuple[ThresholdEntry, ...]
    warnings: tuple[str, ...] = field(default=())


def threshold_analysis(model: SheafModel, form: TensorForm, family: Family = Family()) -> ThresholdAnalysis:
    """Supremum of the constant ``delta`` values that some family filtration violates.

    Applies in the ``delta_1 = 0`` regime on P2: with ``delta = delta_2``, a
    filtration with ``mu < 0`` and constant first term ``c`` is violated
    exactly when ``delta_2 < c / (-mu)``.
    """
    if model.n != 2:
        raise TensorStabError("the delta_2 threshold applies to surfaces (P2)")
    entries = []
    notes = []
    best: Optional[ThresholdEntry] = None
    evals = evaluations(model, form, family, lambda f, m: None)
    for ev in evals:
        first = first_term(
            model.hilbert,
            model.rank,
            ev.filtration.ranks(model),
            [step_hilbert(model, st) for st in ev.filtration.steps],
            ev.filtration.weights,
        )
        m = ev.mu.mu
        if not first.is_constant():
            msg = f"{ev.filtration.label}: first term {first} is not constant; excluded"
            warnings.warn(msg, NonConstantFirstTerm, stacklevel=2)
            notes.append(msg)
            entries.append(ThresholdEntry(ev.filtration, m, first, None, "non-constant first term"))
            continue
        c = first.coeff(0)
        if m < 0:
            value = c / (-m)
            entry = ThresholdEntry(ev.filtration, m, first, value)
            if best is None or value > best.threshold:
                best = entry
        elif m == 0 and c > 0:
            entry = ThresholdEntry(ev.filtration, m, first, None, "violated for every delta_2")
            notes.append(f"{ev.filtration.label}: mu = 0 with positive first term; unstable for every delta_2")
        else:
            entry = ThresholdEntry(ev.filtration, m, first, None, "mu >= 0")
        entries.append(entry)
    value = best.threshold if best is not None and best.threshold > 0 else Fraction(0)
    return ThresholdAnalysis(value, best if value > 0 else None, tuple(entries), tuple(notes))


def delta2_threshold(model: SheafModel, form: TensorForm, family: Family = Family()) -> Fraction:
    return threshold_analysis(model, form, family).value

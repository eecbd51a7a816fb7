"""Hilbert-Mumford weights of forms under diagonal one-parameter subgroups.

Convention: ``lambda(t)`` scales basis vector ``e_a`` by ``t^{Gamma_a}``, so
the entry at ``(a_1, ..., a_s)`` picks up ``t^{Gamma_{a_1} + ... + Gamma_{a_s}}``.
The weight ``mu_point`` is the minimum exponent over nonzero entries and
the limit at ``t -> 0`` exists in the affine space of forms iff no nonzero
entry has negative exponent. This matches the sheaf side, where entries
on blocks with negative gamma-sum must vanish for a zero-weight filtration.
Acting by ``lambda(t)^{-1}`` instead would negate every weight.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    Degenerate,
    FormZero,
    NegativeWeightEntry,
    NotSemistable,
    NotSupported,
    NotZeroWeight,
    RankOrder,
    ZeroDenominator,
)
from .exactalg import DeltaPoly, EvPoly
from .sheafmodel import SheafModel, step_basis
from .tensor import TensorForm
from . import filtstab, linalg


@dataclass(frozen=True)
class OnePS:
    """Diagonal one-parameter subgroup of SL(p): nondecreasing integer weights summing to 0."""

    gamma: tuple[int, ...]

    def __post_init__(self):
        g = tuple(self.gamma)
        object.__setattr__(self, "gamma", g)
        if not g:
            raise ValueError("a one-parameter subgroup needs at least one weight")
        if any(isinstance(x, bool) or Fraction(x).denominator != 1 for x in g):
            raise ValueError("one-parameter subgroup weights must be integers")
        object.__setattr__(self, "gamma", tuple(int(x) for x in g))
        if any(a > b for a, b in zip(self.gamma, self.gamma[1:])):
            raise RankOrder("one-parameter subgroup weights must be nondecreasing")
        if sum(self.gamma) != 0:
            raise ValueError("one-parameter subgroup weights must sum to 0")

    @property
    def dim(self) -> int:
        return len(self.gamma)

    @classmethod
    def from_filtration(cls, p: int, dims: Sequence[int], weights: Sequence) -> "OnePS":
        """``Gamma = sum m_i Gamma^(dim V_i)``, scaled to the smallest integer vector."""
        g = filtstab.gamma_vector(p, dims, weights)
        return cls(linalg.primitive(g))

    def weight(self, index: Sequence[int]) -> int:
        return sum(self.gamma[a] for a in index)


def _nonzero(form: TensorForm) -> None:
    if form.is_zero():
        raise FormZero("the form is identically zero")


def _check_dim(form: TensorForm, lam: OnePS) -> None:
    if form.dim != lam.dim:
        raise ValueError(f"form dimension {form.dim} differs from subgroup dimension {lam.dim}")


def mu_point(form: TensorForm, lam: OnePS) -> int:
    """Minimum of ``sum_j Gamma_{a_j}`` over nonzero entries (any copy)."""
    _nonzero(form)
    _check_dim(form, lam)
    return min(lam.weight(idx) for (_, idx), _ in form.items())


def limit_form(form: TensorForm, lam: OnePS) -> TensorForm:
    """``lim_{t->0} lambda(t) . form``: weight-0 entries survive, positive ones vanish."""
    _nonzero(form)
    _check_dim(form, lam)
    kept = {}
    for key, v in form.items():
        w = lam.weight(key[1])
        if w < 0:
            raise NegativeWeightEntry(f"entry {tuple(i + 1 for i in key[1])} has weight {w} < 0; the limit does not exist")
        if w == 0:
            kept[key] = v
    return form.replace_entries(kept)


def acted_form(form: TensorForm, lam: OnePS, t: Fraction) -> TensorForm:
    """``lambda(t) . form`` at a specific nonzero rational ``t``."""
    t = Fraction(t)
    return form.replace_entries({key: v * t ** lam.weight(key[1]) for key, v in form.items()})


@dataclass(frozen=True)
class SemistabilityReport:
    weights: tuple[tuple[OnePS, int], ...]
    violations: tuple[tuple[OnePS, int], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _bilinear(Q: TensorForm) -> None:
    if Q.s != 2 or Q.c != 1:
        raise ValueError("a single bilinear form (s=2, c=1) is required")


def nondegenerate_semistable_check(Q: TensorForm, lams: Sequence[OnePS]) -> SemistabilityReport:
    """Weights of a nondegenerate bilinear form against each subgroup; any positive weight is a violation."""
    _bilinear(Q)
    if Q.determinant() == 0:
        raise Degenerate("the form is degenerate")
    pairs = tuple((lam, mu_point(Q, lam)) for lam in lams)
    return SemistabilityReport(pairs, tuple(p for p in pairs if p[1] > 0))


def edge_subgroups(p: int, s: int = 2) -> list[OnePS]:
    """Subgroups from every edge ray of every chain of dimensions in ``(0, p)``."""
    from . import weightcones

    out = []
    seen = set()
    for t in range(1, p):
        for dims in itertools.combinations(range(1, p), t):
            for w in weightcones.weight_candidates(p, dims, s):
                kept = [(d, m) for d, m in zip(dims, w) if m]
                lam = OnePS.from_filtration(p, [d for d, _ in kept], [m for _, m in kept])
                if lam.gamma not in seen:
                    seen.add(lam.gamma)
                    out.append(lam)
    return out


def _blocks(dims: Sequence[int], p: int) -> list[int]:
    """1-based block of each position for the chain of leading coordinate spans."""
    return [filtstab.block_of(a, dims) for a in range(p)]


@dataclass(frozen=True)
class LimitAnalysis:
    limit: TensorForm
    subgroup: OnePS
    dims: tuple[int, ...]
    weights: tuple[Fraction, ...]
    blocks: dict
    det_original: Fraction
    det_limit: Fraction
    facts: dict = field(default_factory=dict)

    @property
    def all_hold(self) -> bool:
        return all(self.facts.values())


def _span_equal(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    return linalg.rank(a) == linalg.rank(b) == linalg.rank(list(a) + list(b))


def _perp(Q: Sequence[Sequence[Fraction]], vectors: Sequence[Sequence]) -> list[tuple[Fraction, ...]]:
    n = len(Q)
    rows = [[sum(Fraction(v[a]) * Q[a][b] for a in range(n)) for b in range(n)] for v in vectors]
    return linalg.nullspace(rows, n) if rows else [linalg.unit(n, i) for i in range(n)]


def analyze_zero_weight_limit(Q: TensorForm, dims: Sequence[int], weights: Sequence) -> LimitAnalysis:
    """Limit of a nondegenerate bilinear form along a zero-weight filtration, with each structural fact checked.

    The filtration is ``W_i = span(e_1..e_{dims[i]})``. The facts are
    checked against both the original form and the limit; the fact
    ``W_i^perp = W_{t+1-i}`` is taken with respect to the original form.
    """
    _bilinear(Q)
    det_q = Q.determinant()
    if det_q == 0:
        raise Degenerate("the form is degenerate")
    p = Q.dim
    dims = tuple(dims)
    weights = tuple(Fraction(w) for w in weights)
    lam = OnePS.from_filtration(p, dims, weights)
    mu = mu_point(Q, lam)
    if mu != 0:
        raise NotZeroWeight(f"the filtration has weight {mu}, not 0")
    limit = limit_form(Q, lam)
    t = len(dims)
    full = dims + (p,)
    blk = _blocks(dims, p)
    support = sorted({(blk[i], blk[j]) for (_, (i, j)), _ in limit.items()})
    antidiag = {(i, t + 2 - i) for i in range(1, t + 2)}
    widths = [full[0]] + [full[i] - full[i - 1] for i in range(1, t + 1)]
    facts = {
        "det_preserved": limit.determinant() == det_q,
        "antidiagonal_support": set(support) == antidiag,
        "rank_symmetry": all(dims[i] == p - dims[t - 1 - i] for i in range(t)),
        "weight_symmetry": all(weights[i] == weights[t - 1 - i] for i in range(t)),
    }
    qm = Q.matrix()
    lm = limit.matrix()
    pairing = True
    pairing_limit = True
    for i in range(t):
        w_i = [linalg.unit(p, a) for a in range(dims[i])]
        other = [linalg.unit(p, a) for a in range(dims[t - 1 - i])]
        pairing = pairing and _span_equal(_perp(qm, w_i), other)
        pairing_limit = pairing_limit and _span_equal(_perp(lm, w_i), other)
    facts["perp_pairing"] = pairing
    facts["perp_pairing_limit"] = pairing_limit
    return LimitAnalysis(
        limit,
        lam,
        dims,
        weights,
        {"support": support, "widths": widths},
        det_q,
        limit.determinant(),
        facts,
    )


@dataclass(frozen=True)
class GradedDeformation:
    dims: tuple[int, ...]
    form: TensorForm
    mu: Fraction
    kept_blocks: tuple[tuple[int, ...], ...]
    basis: tuple[tuple[Fraction, ...], ...]

    def graded_form(self) -> TensorForm:
        """The deformed form written in the adapted (graded) basis."""
        return self.form.change_basis(self.basis)


def graded_deformation(form: TensorForm, subspaces: Sequence[Sequence[Sequence]], weights: Sequence) -> GradedDeformation:
    """Keep only the components of minimal gamma-weight along the filtration.

    ``subspaces`` lists bases of ``E_1 c ... c E_t`` in the fibre. The
    result is returned in the original coordinates, with the splitting
    given by the adapted basis (the part of ``E_i`` is spanned by its new
    basis vectors). This is ``lim t^{-mu} lambda(t) . form``.
    """
    _nonzero(form)
    p = form.dim
    dims = [len(sub) for sub in subspaces]
    basis = filtstab.adapted_basis(p, subspaces)
    if len(basis) != p or [linalg.rank(basis[:k]) for k in dims] != dims:
        raise ValueError("subspaces do not form a chain")
    gamma = filtstab.gamma_vector(p, dims, weights)
    blk = _blocks(dims, p)
    graded = form.change_basis(basis)
    best = min(sum(gamma[a] for a in idx) for (_, idx), _ in graded.items())
    kept = {key: v for key, v in graded.items() if sum(gamma[a] for a in key[1]) == best}
    kept_blocks = tuple(sorted({tuple(blk[a] for a in key[1]) for key in kept}))
    inv = linalg.inverse(basis)
    back = graded.replace_entries(kept).change_basis(inv)
    return GradedDeformation(tuple(dims), back, best, kept_blocks, tuple(basis))


def stabilizer_dimension(Q: TensorForm) -> int:
    """Dimension of ``{(A, a) : A^T Q + Q A = a Q}``."""
    _bilinear(Q)
    _nonzero(Q)
    p = Q.dim
    q = Q.matrix()
    # unknowns: A[i][j] at i*p + j, then a
    rows = []
    for r_ in range(p):
        for c_ in range(p):
            row = [Fraction(0)] * (p * p + 1)
            for k in range(p):
                row[k * p + r_] += q[k][c_]  # (A^T Q)[r][c] = sum_k A[k][r] Q[k][c]
                row[k * p + c_] += q[r_][k]  # (Q A)[r][c] = sum_k Q[r][k] A[k][c]
            row[-1] = -q[r_][c_]
            rows.append(row)
    return p * p + 1 - linalg.rank(rows)


def combined_git_weight(dims: Sequence[int], P_at_l, p: int, P_EV_at_l: Sequence, weights: Sequence, mu_phi, n1, n2) -> Fraction:
    """``n1 * sum m_i (dim V_i P(l) - p P_{E_{V_i}}(l)) + n2 * mu``."""
    if any(a >= b for a, b in zip(dims, dims[1:])) or (dims and (dims[0] <= 0 or dims[-1] >= p)):
        raise RankOrder("dimensions must increase strictly inside (0, p)")
    total = sum(
        (Fraction(m) * (d * Fraction(P_at_l) - p * Fraction(pe)) for d, pe, m in zip(dims, P_EV_at_l, weights)),
        Fraction(0),
    )
    return Fraction(n1) * total + Fraction(n2) * Fraction(mu_phi)


def polarization_ratio(P: EvPoly, delta, m: int, l: int, s: int) -> Fraction:
    """``(P(l) delta(m) - delta(l) P(m)) / (P(m) - s delta(m))``."""
    d = delta.poly if isinstance(delta, DeltaPoly) else (delta if isinstance(delta, EvPoly) else EvPoly.constant(delta))
    den = P(m) - s * d(m)
    if den == 0:
        raise ZeroDenominator("P(m) - s delta(m) vanishes")
    return (P(l) * d(m) - d(l) * P(m)) / den


@dataclass(frozen=True)
class GitWeightData:
    dims: tuple[int, ...]
    p: int
    P_at_l: Fraction
    P_EV_at_l: tuple[Fraction, ...]
    weights: tuple[Fraction, ...]
    mu_phi: Fraction
    n1: Fraction
    n2: Fraction

    def value(self) -> Fraction:
        return combined_git_weight(self.dims, self.P_at_l, self.p, self.P_EV_at_l, self.weights, self.mu_phi, self.n1, self.n2)


def git_weight_data(model: SheafModel, form: TensorForm, filtration: "filtstab.WeightedFiltration", delta, m: int, l: int) -> GitWeightData:
    """Quotient-side data matching a sheaf filtration.

    With ``V = H^0(E(m))`` of dimension ``p = P(m)`` and ``V_i`` the sections
    of ``E_i(m)`` (dimension ``P_{E_i}(m)``), the form on ``V`` has
    ``mu = sum m_i (s dim V_i - eps_i p)`` with ``eps`` from the sheaf side.
    ``n1 = 1`` and ``n2`` is the polarization ratio.
    """
    from .sheafmodel import step_hilbert

    res = filtstab.filtration_mu(model, form, filtration)
    P = model.hilbert
    p = P(m)
    if p.denominator != 1:
        raise ValueError("P(m) must be an integer")
    dims = tuple(int(step_hilbert(model, st)(m)) for st in filtration.steps)
    mu_phi = sum(
        (w * (form.s * d - e * p) for d, e, w in zip(dims, res.epsilon, filtration.weights)),
        Fraction(0),
    )
    n2 = polarization_ratio(P, delta, m, l, form.s)
    return GitWeightData(
        dims,
        int(p),
        P(l),
        tuple(step_hilbert(model, st)(l) for st in filtration.steps),
        filtration.weights,
        mu_phi,
        Fraction(1),
        n2,
    )


@dataclass(frozen=True)
class SEquivStep:
    filtration: str
    weights: tuple[Fraction, ...]
    form: TensorForm
    stabilizer: int


@dataclass(frozen=True)
class SEquivResult:
    form: TensorForm
    steps: tuple[SEquivStep, ...]
    start_stabilizer: int


def s_equiv_representative(form: TensorForm, delta, model: SheafModel, family: "filtstab.Family" = None) -> SEquivResult:
    """Iterate admissible deformations until none raises the stabilizer dimension.

    Admissible means equality in the stability inequality. Each round
    scans the family in canonical order and adopts the first deformation
    whose stabilizer dimension is strictly larger; the bound ``p^2 + 1`` on
    that dimension bounds the number of rounds.
    """
    if form.s != 2 or form.c != 1:
        raise NotSupported("S-equivalence is implemented for a single bilinear form only")
    family = family if family is not None else filtstab.Family()
    verdict = filtstab.search_verdict(model, form, delta, family)
    if verdict.status is filtstab.Status.UNSTABLE:
        raise NotSemistable("the input is unstable relative to the family")
    current = form
    stab = stabilizer_dimension(current)
    start = stab
    history = []
    d = delta.poly if isinstance(delta, DeltaPoly) else delta
    for _ in range(form.dim ** 2 + 1):
        adopted = None
        for ev in filtstab.evaluations(model, current, family, lambda f, r: filtstab.delta_stability_lhs(model, f, r.mu, d)):
            if not ev.lhs.is_zero():
                continue
            subs = [step_basis(model, st) for st in ev.filtration.steps]
            out = graded_deformation(current, subs, ev.filtration.weights).form
            if out == current:
                continue
            k = stabilizer_dimension(out)
            if k > stab:
                adopted = SEquivStep(ev.filtration.label, ev.filtration.weights, out, k)
                break
        if adopted is None:
            break
        history.append(adopted)
        current, stab = adopted.form, adopted.stabilizer
    return SEquivResult(current, tuple(history), start)

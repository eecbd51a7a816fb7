"""Orthogonal and symplectic sheaves in the split model.

An orthogonal (symplectic) sheaf is a split model with a constant
nondegenerate symmetric (antisymmetric) form ``Q`` on the fibre. A nonzero
entry ``Q[a][b]`` is a morphism ``L_a (x) L_b -> O``, so it may only join
summands of opposite twist; this keeps the fibre model honest.

Isotropic subsheaves are tested through the two-step filtration
``F c F^perp c E`` with weights ``(1, 1)``, whose mu-weight is zero.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import AmbiguousSignClass, Degenerate, FormZero, InvalidDatum, NotDegenerate, RankMismatch
from .exactalg import EvPoly, degree_of, format_rat, rat, structure_poly
from .sheafmodel import Coordinate, Declared, FiltStep, SheafModel, step_hilbert
from .tensor import ANTISYMMETRIC, TensorForm
from . import filtstab, linalg


class Kind(str, enum.Enum):
    ORTHOGONAL = "orthogonal"
    SYMPLECTIC = "symplectic"


@dataclass(frozen=True)
class OrthSheafModel:
    sheaf: SheafModel
    Q: TensorForm
    kind: Kind = Kind.ORTHOGONAL
    psi: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.psi is not None:
            object.__setattr__(self, "psi", Fraction(self.psi))

    @property
    def rank(self) -> int:
        return self.sheaf.rank


@dataclass(frozen=True)
class Validation:
    failures: tuple[tuple[str, str], ...]
    det: Optional[Fraction]

    @property
    def ok(self) -> bool:
        return not self.failures

    def failed(self) -> list[str]:
        return [name for name, _ in self.failures]


def validate(model: OrthSheafModel) -> Validation:
    """Check the axioms of an orthogonal/symplectic (and, with ``psi``, special orthogonal) sheaf.

    Every failing axiom is listed with a reason; nothing is raised.
    """
    fails = []
    sheaf, Q = model.sheaf, model.Q
    if Q.s != 2 or Q.c != 1 or Q.dim != sheaf.rank:
        fails.append(("shape", f"form must be a single bilinear form on a {sheaf.rank}-dimensional fibre"))
        return Validation(tuple(fails), None)
    if sheaf.degree != 0:
        fails.append(("OS1", f"determinant degree is {sheaf.degree}, must be 0"))
    if model.kind is Kind.SYMPLECTIC and sheaf.rank % 2:
        fails.append(("OS1", "a symplectic sheaf needs even rank"))
    m = Q.matrix()
    sign = 1 if model.kind is Kind.ORTHOGONAL else -1
    r = sheaf.rank
    if any(m[a][b] != sign * m[b][a] for a in range(r) for b in range(r)):
        fails.append(("OS2", f"form is not {'symmetric' if sign == 1 else 'antisymmetric'}"))
    det = Q.determinant()
    if det == 0:
        fails.append(("OS4", "form is degenerate"))
    bad = [
        (a + 1, b + 1)
        for a in range(r)
        for b in range(a, r)
        if m[a][b] != 0 and sheaf.summands[a].twist + sheaf.summands[b].twist != 0
    ]
    if bad:
        fails.append(("twists", f"entries {bad} join summands whose twists do not cancel"))
    if model.psi is not None:
        if model.kind is not Kind.ORTHOGONAL:
            fails.append(("SOS", "a trivialization psi applies to orthogonal sheaves only"))
        elif det != model.psi ** 2:
            fails.append(("SOS", f"det Q = {format_rat(det)} differs from psi^2 = {format_rat(model.psi ** 2)}"))
    return Validation(tuple(fails), det)


def _nondegenerate(Q: TensorForm) -> list[list[Fraction]]:
    if Q.s != 2 or Q.c != 1:
        raise ValueError("a single bilinear form is required")
    if Q.determinant() == 0:
        raise Degenerate("the form is degenerate")
    return Q.matrix()


def _as_vectors(dim: int, F) -> list[tuple[Fraction, ...]]:
    """Coordinate steps or explicit basis vectors, as fibre vectors."""
    if isinstance(F, Coordinate):
        return [linalg.unit(dim, i) for i in sorted(F.indices)]
    if isinstance(F, Declared):
        if F.basis is None:
            raise InvalidDatum(f"{F.label} has no fibre basis")
        return list(F.basis)
    return [tuple(Fraction(x) for x in v) for v in F]


def perp(Q: TensorForm, F) -> list[tuple[Fraction, ...]]:
    """Canonical integer basis of ``{v : Q(f, v) = 0 for all f in F}``."""
    m = _nondegenerate(Q)
    n = Q.dim
    vectors = _as_vectors(n, F)
    rows = [[sum(v[a] * m[a][b] for a in range(n)) for b in range(n)] for v in vectors]
    if not any(any(x for x in row) for row in rows):
        return [linalg.unit(n, i) for i in range(n)]
    return linalg.span_basis(linalg.nullspace(rows, n), n)


def is_isotropic(Q: TensorForm, F) -> bool:
    vectors = _as_vectors(Q.dim, F)
    m = Q.matrix()
    n = Q.dim
    return all(sum(u[a] * m[a][b] * v[b] for a in range(n) for b in range(n)) == 0 for u in vectors for v in vectors)


def coordinate_span(vectors: Sequence[Sequence]) -> Optional[frozenset[int]]:
    """The coordinate subset spanning the same space, if there is one."""
    if not vectors:
        return frozenset()
    support = frozenset(i for v in vectors for i, x in enumerate(v) if x != 0)
    if len(support) == linalg.rank(vectors):
        return support
    return None


@dataclass(frozen=True)
class IsotropicDatum:
    """An isotropic subsheaf ``F`` with the numerical data of ``F`` and ``F^perp``."""

    F: FiltStep
    perp: FiltStep
    label: str = ""

    @property
    def name(self) -> str:
        return self.label or self.F.label


def _step_rank(step: FiltStep) -> int:
    return len(step.indices) if isinstance(step, Coordinate) else step.rank


def check_datum(model: OrthSheafModel, datum: IsotropicDatum) -> None:
    """Raise InvalidDatum unless ``F`` is isotropic, ranks are complementary and degrees agree."""
    sheaf, Q = model.sheaf, model.Q
    fv = _as_vectors(sheaf.rank, datum.F)
    if not is_isotropic(Q, fv):
        raise InvalidDatum(f"{datum.name} is not isotropic")
    rf, rp = _step_rank(datum.F), _step_rank(datum.perp)
    if rf + rp != sheaf.rank:
        raise InvalidDatum(f"{datum.name}: rank of F^perp is {rp}, expected {sheaf.rank - rf}")
    dF = degree_of(step_hilbert(sheaf, datum.F), rf, sheaf.space)
    dP = degree_of(step_hilbert(sheaf, datum.perp), rp, sheaf.space)
    if dF != dP:
        raise InvalidDatum(f"{datum.name}: deg F = {format_rat(dF)} but deg F^perp = {format_rat(dP)}")
    try:
        pv = _as_vectors(sheaf.rank, datum.perp)
    except InvalidDatum:
        return
    if not _same_span(pv, perp(Q, fv)):
        raise InvalidDatum(f"{datum.name}: declared F^perp is not the perpendicular of F")


def _same_span(a, b) -> bool:
    return linalg.rank(a) == linalg.rank(b) == linalg.rank(list(a) + list(b))


def coordinate_isotropic_family(model: OrthSheafModel) -> list[IsotropicDatum]:
    """Nonzero coordinate isotropic subspaces whose perpendicular is again coordinate."""
    Q = model.Q
    out = []
    for k in range(1, model.rank // 2 + 1):
        for subset in itertools.combinations(range(model.rank), k):
            step = Coordinate(subset)
            if not is_isotropic(Q, step):
                continue
            span = coordinate_span(perp(Q, step))
            if span is None:
                continue
            out.append(IsotropicDatum(step, Coordinate(span)))
    return out


class Mode(str, enum.Enum):
    GIESEKER = "gieseker"
    SLOPE = "slope"


@dataclass(frozen=True)
class OrthCertificate:
    datum: IsotropicDatum
    value: object  # EvPoly in gieseker mode, Fraction in slope mode


@dataclass(frozen=True)
class OrthVerdict:
    status: filtstab.Status
    certificate: Optional[OrthCertificate]
    checked: int
    relative_to_family: bool = True


def isotropic_value(model: OrthSheafModel, datum: IsotropicDatum, mode: Mode):
    sheaf = model.sheaf
    if Mode(mode) is Mode.GIESEKER:
        return step_hilbert(sheaf, datum.F) + step_hilbert(sheaf, datum.perp) - sheaf.hilbert
    return degree_of(step_hilbert(sheaf, datum.F), _step_rank(datum.F), sheaf.space)


def orth_stability(model: OrthSheafModel, mode: Mode | str = Mode.GIESEKER, isotropics: Optional[Iterable[IsotropicDatum]] = None) -> OrthVerdict:
    """Gieseker mode: ``P_F + P_{F^perp} <= P``; slope mode: ``deg F <= 0``; strict for stable."""
    mode = Mode(mode)
    family = list(isotropics) if isotropics is not None else coordinate_isotropic_family(model)
    witness = None
    for k, datum in enumerate(family, start=1):
        check_datum(model, datum)
        value = isotropic_value(model, datum, mode)
        sign = value.sign() if isinstance(value, EvPoly) else (value > 0) - (value < 0)
        if sign > 0:
            return OrthVerdict(filtstab.Status.UNSTABLE, OrthCertificate(datum, value), k, False)
        if sign == 0 and witness is None:
            witness = OrthCertificate(datum, value)
    status = filtstab.Status.STRICTLY_SEMISTABLE if witness else filtstab.Status.STABLE
    return OrthVerdict(status, witness, len(family))


def induced_filtration(model: OrthSheafModel, datum: IsotropicDatum) -> filtstab.WeightedFiltration:
    """``F c F^perp`` with weights ``(1, 1)``; a single step of weight 2 when ``F = F^perp``."""
    rf, rp = _step_rank(datum.F), _step_rank(datum.perp)
    if rf + rp != model.rank:
        raise RankMismatch(f"rank of F^perp is {rp}, expected {model.rank - rf}")
    if rf == rp:
        return filtstab.WeightedFiltration((datum.F,), (Fraction(2),))
    return filtstab.WeightedFiltration((datum.F, datum.perp), (Fraction(1), Fraction(1)))


@dataclass(frozen=True)
class BridgeResult:
    filtration: filtstab.WeightedFiltration
    mu: Fraction
    filtration_side: EvPoly
    isotropic_side: EvPoly

    @property
    def holds(self) -> bool:
        return self.mu == 0 and self.filtration_side == self.isotropic_side


def isotropic_bridge(model: OrthSheafModel, datum: IsotropicDatum) -> BridgeResult:
    """Compare ``sum m_i (r P_{E_i} - r_i P)`` on ``F c F^perp`` with ``r (P_F + P_{F^perp} - P)``."""
    sheaf = model.sheaf
    filt = induced_filtration(model, datum)
    res = filtstab.filtration_mu(sheaf, model.Q, filt)
    first = filtstab.first_term(
        sheaf.hilbert,
        sheaf.rank,
        filt.ranks(sheaf),
        [step_hilbert(sheaf, st) for st in filt.steps],
        filt.weights,
    )
    iso = (step_hilbert(sheaf, datum.F) + step_hilbert(sheaf, datum.perp) - sheaf.hilbert) * sheaf.rank
    return BridgeResult(filt, res.mu, first, iso)


@dataclass(frozen=True)
class DegeneracyCertificate:
    kernel: tuple[tuple[Fraction, ...], ...]
    filtration: filtstab.WeightedFiltration
    mu: Fraction
    kernel_degree: Fraction
    degree_source: str
    tau: Fraction
    slope_lhs: Fraction

    @property
    def valid(self) -> bool:
        return self.mu > 0 and self.slope_lhs > 0


def degeneracy_certificate(model: OrthSheafModel, tau=1) -> DegeneracyCertificate:
    """For a degenerate form, the filtration ``E^perp c E`` has positive mu, so the slope LHS is ``mu tau > 0``.

    The degree of ``E^perp`` is computed directly when the kernel is a
    coordinate subspace; otherwise it is the value 0 forced for the kernel
    of a degenerate symmetric or antisymmetric form on a sheaf of trivial
    determinant.
    """
    sheaf, Q = model.sheaf, model.Q
    if Q.is_zero():
        raise FormZero("the form is identically zero")
    if Q.determinant() != 0:
        raise NotDegenerate("the form is nondegenerate")
    tau = Fraction(tau)
    n = Q.dim
    kernel = linalg.span_basis(linalg.nullspace(Q.matrix(), n), n)
    span = coordinate_span(kernel)
    if span is not None:
        step: FiltStep = Coordinate(span)
        kdeg = Fraction(sheaf.subsheaf_degree(span))
        source = "coordinate"
    else:
        # only the degree matters for the slope check; O^k carries it
        step = Declared(len(kernel), structure_poly(sheaf.space) * len(kernel), "E^perp", tuple(kernel))
        kdeg = Fraction(0)
        source = "trivial determinant"
    filt = filtstab.WeightedFiltration.single(step)
    pattern = filtstab.pattern_from_form(Q, [list(kernel)])
    res = filtstab.mu(pattern, n, [len(kernel)], [1])
    lhs = filtstab.slope_lhs(sheaf.degree, n, [len(kernel)], [kdeg], [1], res.mu, tau)
    return DegeneracyCertificate(tuple(kernel), filt, res.mu, kdeg, source, tau, lhs)


def sos_check(Q: TensorForm, psi) -> bool:
    """``det Q = psi^2``."""
    d = Q.determinant()
    if d == 0:
        raise Degenerate("the form is degenerate")
    return d == Fraction(psi) ** 2


def sign_class_count(r: int, simple: Optional[bool] = None) -> int:
    """Number of special orthogonal classes over one orthogonal class."""
    if r < 1:
        raise ValueError("rank must be positive")
    if r % 2:
        return 1
    if simple is None or not simple:
        raise AmbiguousSignClass("even rank: the count is 2 for simple objects and undetermined otherwise")
    return 2


def from_document(data: dict) -> OrthSheafModel:
    """Build from a model document with an embedded ``form`` and optional ``kind``/``psi``."""
    from .io import InputError, form_from_json, model_from_json

    if "form" not in data:
        raise InputError("orthogonal model: missing field 'form'")
    kind = data.get("kind")
    Q = form_from_json(data["form"])
    if kind is None:
        kind = Kind.SYMPLECTIC if Q.symmetry == ANTISYMMETRIC else Kind.ORTHOGONAL
    try:
        kind = Kind(kind)
    except ValueError:
        raise InputError(f"unknown kind {kind!r}") from None
    psi = data.get("psi")
    return OrthSheafModel(model_from_json(data), Q, kind, rat(psi) if psi is not None else None)


def p2_example() -> OrthSheafModel:
    """The orthogonal sheaf ``I_2 + I_1 + O`` on P2 shipped with the package."""
    from .io import BUILTIN_PREFIX, load_json

    return from_document(load_json(BUILTIN_PREFIX + "p2"))

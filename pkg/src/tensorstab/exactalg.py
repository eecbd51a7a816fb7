"""Exact rationals, univariate polynomials with the eventual ordering, and
Riemann-Roch Hilbert polynomials on P1 and P2.

Rationals are plain :class:`fractions.Fraction` values. Polynomials compare
by their values for all sufficiently large arguments, which amounts to a
lexicographic comparison of coefficients starting at the top degree.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DegreeMismatch, TensorStabError, UnsupportedSpace

Rat = Fraction
RatLike = Union[int, str, Fraction]


def rat(value: RatLike) -> Fraction:
    """Parse ``"p/q"``, ``"p"``, an int or a Fraction. Floats are refused."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational")
        try:
            return Fraction(text)
        except ValueError:
            raise ValueError(f"not a rational: {value!r}") from None
    raise TypeError(f"cannot read {type(value).__name__} as an exact rational")


def format_rat(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class Space(enum.Enum):
    P1 = 1
    P2 = 2

    @property
    def n(self) -> int:
        return self.value

    @classmethod
    def parse(cls, name: Union[str, "Space"]) -> "Space":
        if isinstance(name, Space):
            return name
        key = str(name).strip().upper()
        if key in cls.__members__:
            return cls[key]
        if key.startswith("P") and key[1:].isdigit():
            raise UnsupportedSpace(f"only P1 and P2 are supported, got {name}")
        raise ValueError(f"unknown space {name!r}")


class EvPoly:
    """Univariate polynomial in ``t`` with exact rational coefficients.

    ``coeffs`` is highest degree first. Comparison operators implement the
    eventual ordering: ``p < q`` iff ``p(m) < q(m)`` for all ``m >> 0``.
    Equality means identical polynomials.
    """

    __slots__ = ("_low",)

    def __init__(self, coeffs: Iterable[RatLike] = ()):
        low = [rat(c) for c in reversed(list(coeffs))]
        while low and low[-1] == 0:
            low.pop()
        self._low = tuple(low)

    @classmethod
    def from_low(cls, low: Sequence[Fraction]) -> "EvPoly":
        return cls(reversed(list(low)))

    @classmethod
    def constant(cls, c: RatLike) -> "EvPoly":
        return cls([c])

    @classmethod
    def t(cls) -> "EvPoly":
        return cls([1, 0])

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(reversed(self._low)) if self._low else (Fraction(0),)

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self._low) - 1

    def coeff(self, k: int) -> Fraction:
        return self._low[k] if 0 <= k < len(self._low) else Fraction(0)

    def is_zero(self) -> bool:
        return not self._low

    def is_constant(self) -> bool:
        return len(self._low) <= 1

    def leading(self) -> Fraction:
        return self._low[-1] if self._low else Fraction(0)

    def sign(self) -> int:
        """Eventual sign: +1, 0 or -1."""
        lead = self.leading()
        return (lead > 0) - (lead < 0)

    def __call__(self, x: RatLike) -> Fraction:
        x = rat(x)
        acc = Fraction(0)
        for c in reversed(self._low):
            acc = acc * x + c
        return acc

    def _coerce(self, other) -> "EvPoly":
        if isinstance(other, EvPoly):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return EvPoly.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self._low), len(other._low))
        return EvPoly.from_low([self.coeff(k) + other.coeff(k) for k in range(n)])

    __radd__ = __add__

    def __neg__(self) -> "EvPoly":
        return EvPoly.from_low([-c for c in self._low])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return EvPoly.from_low([c * other for c in self._low])
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return EvPoly()
        out = [Fraction(0)] * (len(self._low) + len(other._low) - 1)
        for i, a in enumerate(self._low):
            for j, b in enumerate(other._low):
                out[i + j] += a * b
        return EvPoly.from_low(out)

    __rmul__ = __mul__

    def cmp(self, other) -> Ordering:
        other = self._coerce(other)
        return Ordering((self - other).sign())

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._low == other._low

    def __hash__(self) -> int:
        return hash(("EvPoly", self._low))

    def __lt__(self, other) -> bool:
        return self.cmp(other) is Ordering.LESS

    def __le__(self, other) -> bool:
        return self.cmp(other) is not Ordering.GREATER

    def __gt__(self, other) -> bool:
        return self.cmp(other) is Ordering.GREATER

    def __ge__(self, other) -> bool:
        return self.cmp(other) is not Ordering.LESS

    def to_json(self) -> list[str]:
        return [format_rat(c) for c in self.coeffs]

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k in range(len(self._low) - 1, -1, -1):
            c = self._low[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{format_rat(mag)}*{mono}"
            else:
                body = format_rat(mag)
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"EvPoly({[format_rat(c) for c in self.coeffs]})"


def poly_cmp_eventual(p: EvPoly, q: EvPoly) -> Ordering:
    return p.cmp(q)


@dataclass(frozen=True)
class DeltaPoly:
    """The stability parameter delta, of degree below ``dim X``.

    ``tau`` is the coefficient of ``t^(n-1)`` times ``(n-1)!``.
    """

    poly: EvPoly
    n: int

    def __post_init__(self):
        if self.poly.is_zero():
            raise TensorStabError("delta = 0 is not allowed")
        if self.poly.degree >= self.n:
            raise TensorStabError(f"deg(delta) must be < {self.n}")
        if self.poly.sign() <= 0:
            raise TensorStabError("delta must be eventually positive")

    @classmethod
    def parse(cls, text: str, n: int) -> "DeltaPoly":
        """Comma-separated coefficients, highest degree first."""
        return cls(EvPoly(rat(c) for c in text.split(",")), n)

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        """``(delta_1, ..., delta_n)`` padded to length n."""
        return tuple(self.poly.coeff(self.n - 1 - i) for i in range(self.n))

    @property
    def delta1(self) -> Fraction:
        return self.poly.coeff(self.n - 1)

    @property
    def tau(self) -> Fraction:
        return self.delta1 * math.factorial(self.n - 1)

    def __call__(self, x: RatLike) -> Fraction:
        return self.poly(x)


def structure_poly(space: Union[str, Space]) -> EvPoly:
    """Hilbert polynomial of the structure sheaf."""
    space = Space.parse(space)
    if space is Space.P1:
        return EvPoly([1, 1])
    return EvPoly([Fraction(1, 2), Fraction(3, 2), 1])


def hilbert_from_chern(space: Union[str, Space], rank: int, c1: int, c2: int = 0) -> EvPoly:
    """Hilbert polynomial of a sheaf on P1/P2 from rank and Chern classes."""
    space = Space.parse(space)
    if rank < 1:
        raise TensorStabError("rank must be positive")
    base = structure_poly(space) * rank
    if space is Space.P1:
        if c2 != 0:
            raise TensorStabError("c2 must vanish on P1")
        return base + c1
    return base + EvPoly([c1, 0]) + Fraction(c1 * (c1 + 3), 2) - c2


def degree_of(p: EvPoly, rank: int, space: Union[str, Space]) -> Fraction:
    """Degree of a sheaf with Hilbert polynomial ``p`` and the given rank."""
    space = Space.parse(space)
    n = space.n
    if p.degree != n:
        raise DegreeMismatch(f"expected a degree-{n} Hilbert polynomial, got degree {p.degree}")
    base = structure_poly(space)
    return math.factorial(n - 1) * (p.coeff(n - 1) - rank * base.coeff(n - 1))

"""
Exact coefficients in Q(sqrt 3).

Every coefficient that appears in the built-in decompositions (0, +-1, 1/2, 2/3,
sqrt(3)/2, 2 sqrt(3)/3, 4/3, ...) is of the form a + b*sqrt(3) with rational a, b.
Keeping them in this field lets decompositions be verified without any tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Union

from .Errors import ContractViolation

Rational = Union[int, Fraction]

# significant digits of the Decimal view
_VIEW_DIGITS = 80


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ContractViolation(f"not a rational coefficient: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        # doubles are dyadic rationals, so this is exact
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise ContractViolation(f"not a rational coefficient: {x!r}")


def _sqrt3_decimal() -> Decimal:
    return Decimal(3).sqrt()


@dataclass(frozen=True)
class ExactCoefficient:
    """An element a + b*sqrt(3) of Q(sqrt 3)"""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self):
        # Fraction already keeps lowest terms with a positive denominator
        object.__setattr__(self, "a", _as_fraction(self.a))
        object.__setattr__(self, "b", _as_fraction(self.b))

    @classmethod
    def of(cls, value) -> "ExactCoefficient":
        if isinstance(value, ExactCoefficient):
            return value
        return cls(_as_fraction(value), Fraction(0))

    @classmethod
    def sqrt3(cls, scale: Rational = 1) -> "ExactCoefficient":
        """scale * sqrt(3)"""
        return cls(Fraction(0), _as_fraction(scale))

    # Field arithmetic

    def __add__(self, other) -> "ExactCoefficient":
        other = ExactCoefficient.of(other)
        return ExactCoefficient(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self) -> "ExactCoefficient":
        return ExactCoefficient(-self.a, -self.b)

    def __sub__(self, other) -> "ExactCoefficient":
        return self + (-ExactCoefficient.of(other))

    def __rsub__(self, other) -> "ExactCoefficient":
        return ExactCoefficient.of(other) - self

    def __mul__(self, other) -> "ExactCoefficient":
        other = ExactCoefficient.of(other)
        # (a + b r)(c + d r) = (ac + 3bd) + (ad + bc) r,  r = sqrt(3)
        return ExactCoefficient(
            self.a * other.a + 3 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def conjugate(self) -> "ExactCoefficient":
        return ExactCoefficient(self.a, -self.b)

    def norm(self) -> Fraction:
        """Field norm a^2 - 3 b^2 (zero only for the zero element)"""
        return self.a * self.a - 3 * self.b * self.b

    def __truediv__(self, other) -> "ExactCoefficient":
        other = ExactCoefficient.of(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero in Q(sqrt 3)")
        num = self * other.conjugate()
        den = other.norm()
        return ExactCoefficient(num.a / den, num.b / den)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ExactCoefficient.of(other)
        if not isinstance(other, ExactCoefficient):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def square(self) -> "ExactCoefficient":
        return self * self

    # Views

    def to_decimal(self, digits: int = _VIEW_DIGITS) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = digits
            a = Decimal(self.a.numerator) / Decimal(self.a.denominator)
            if self.b == 0:
                return +a
            b = Decimal(self.b.numerator) / Decimal(self.b.denominator)
            return a + b * _sqrt3_decimal()

    @property
    def float_view(self) -> float:
        """Nearest double to a + b*sqrt(3)"""
        if self.b == 0:
            # Fraction.__float__ is correctly rounded
            return float(self.a)
        return float(self.to_decimal())

    def __float__(self) -> float:
        return self.float_view

    def __repr__(self) -> str:
        if self.b == 0:
            return f"ExactCoefficient({self.a})"
        return f"ExactCoefficient({self.a} + {self.b}*sqrt3)"

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt3"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a} {sign} {abs(self.b)}*sqrt3"

    # JSON codec

    def to_json(self):
        if self.b == 0 and self.a.denominator == 1:
            return self.a.numerator
        return {
            "a": [self.a.numerator, self.a.denominator],
            "b": [self.b.numerator, self.b.denominator],
        }

    @classmethod
    def from_json(cls, raw) -> "ExactCoefficient":
        if isinstance(raw, bool):
            raise ContractViolation(f"boolean is not a coefficient: {raw!r}")
        if isinstance(raw, (int, Fraction)):
            return cls.of(raw)
        if isinstance(raw, float):
            # only reached when the loader did not preserve decimal text
            return cls.of(Fraction(repr(raw)))
        if isinstance(raw, dict):
            try:
                a = Fraction(*[int(x) for x in raw.get("a", [0, 1])])
                b = Fraction(*[int(x) for x in raw.get("b", [0, 1])])
            except (TypeError, ValueError, ZeroDivisionError) as e:
                raise ContractViolation(f"bad coefficient {raw!r}: {e}") from e
            return cls(a, b)
        raise ContractViolation(f"bad coefficient {raw!r}")


ZERO = ExactCoefficient(0, 0)
ONE = ExactCoefficient(1, 0)

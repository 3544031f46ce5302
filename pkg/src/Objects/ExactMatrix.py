"""
Exact ground truth for the accuracy experiments.

Matrices over Q and Q + Qi are kept in common-denominator form: an object array of Python
integers plus one positive integer denominator. Doubles are dyadic rationals, so inputs
convert exactly with a power-of-two denominator, and products reduce to big-integer
matrix products. Nothing here touches floating-point state; the only rounding is the
final conversion of an error value to a double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from src.log import get_logger

from .ComplexMatrix import ComplexMatrix, as_real_matrix
from .Errors import ContractViolation

logger = get_logger("Oracle")

BigRational = Fraction


class GaussianRational(NamedTuple):
    re: Fraction
    im: Fraction


def double_to_rational(x: float) -> Fraction:
    """Exact value of an IEEE 754 double as p / 2^k in lowest terms"""
    x = float(x)
    if not math.isfinite(x):
        raise ContractViolation(f"cannot convert non-finite value {x!r} to a rational")
    return Fraction(*x.as_integer_ratio())


def _object_array(values, shape) -> np.ndarray:
    out = np.empty(len(values), dtype=object)
    out[:] = values
    return out.reshape(shape)


def _doubles_to_dyadic(arr: np.ndarray) -> Tuple[np.ndarray, int]:
    """Integer numerators N and exponent k with arr == N / 2^k exactly"""
    if not np.isfinite(arr).all():
        raise ContractViolation("cannot convert non-finite entries to rationals")
    mant, expo = np.frexp(arr)
    # mant in [0.5, 1), so mant * 2^53 is an integer below 2^53
    ints = (mant * 2.0 ** 53).astype(np.int64)
    shifts = expo.astype(np.int64) - 53
    nonzero = ints != 0
    k = int(max(0, -int(shifts[nonzero].min()))) if nonzero.any() else 0
    flat = [int(m) << int(s + k) if m else 0 for m, s in zip(ints.ravel(), shifts.ravel())]
    return _object_array(flat, arr.shape), k


@dataclass(frozen=True)
class ExactMatrix:
    """Rational matrix num / den with den > 0"""

    num: np.ndarray
    den: int = 1

    def __post_init__(self):
        den = int(self.den)
        if den <= 0:
            raise ContractViolation("denominator must be positive")
        num = np.asarray(self.num, dtype=object)
        if num.ndim != 2:
            raise ContractViolation(f"exact matrix must be 2-D, got shape {num.shape}")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    # Construction

    @classmethod
    def from_doubles(cls, arr) -> "ExactMatrix":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise ContractViolation(f"expected a 2-D matrix, got shape {arr.shape}")
        num, k = _doubles_to_dyadic(arr)
        return cls(num, 1 << k)

    @classmethod
    def from_fractions(cls, rows: Sequence[Sequence]) -> "ExactMatrix":
        fr = [[Fraction(x) for x in row] for row in rows]
        den = 1
        for row in fr:
            for x in row:
                den = den * x.denominator // math.gcd(den, x.denominator)
        flat = [x.numerator * (den // x.denominator) for row in fr for x in row]
        return cls(_object_array(flat, (len(fr), len(fr[0]) if fr else 0)), den)

    @classmethod
    def from_ints(cls, arr) -> "ExactMatrix":
        arr = np.asarray(arr)
        return cls(_object_array([int(x) for x in arr.ravel()], arr.shape), 1)

    @classmethod
    def zeros(cls, shape: Tuple[int, int]) -> "ExactMatrix":
        return cls(_object_array([0] * (shape[0] * shape[1]), shape), 1)

    @classmethod
    def identity(cls, n: int, scale: Fraction = Fraction(1)) -> "ExactMatrix":
        scale = Fraction(scale)
        flat = [scale.numerator if i == j else 0 for i in range(n) for j in range(n)]
        return cls(_object_array(flat, (n, n)), scale.denominator)

    # Access

    @property
    def shape(self) -> Tuple[int, int]:
        return self.num.shape

    def entry(self, i: int, j: int) -> Fraction:
        return Fraction(self.num[i, j], self.den)

    def to_fractions(self) -> List[List[Fraction]]:
        return [[Fraction(x, self.den) for x in row] for row in self.num]

    def to_float(self) -> np.ndarray:
        """Nearest doubles (int / int true division is correctly rounded)"""
        den = self.den
        return np.array([x / den for x in self.num.ravel()], dtype=np.float64).reshape(self.shape)

    def reduced(self) -> "ExactMatrix":
        g = self.den
        for x in self.num.ravel():
            if g == 1:
                break
            g = math.gcd(g, int(x))
        if g <= 1:
            return self
        return ExactMatrix(self.num // g, self.den // g)

    # Arithmetic

    def _rescaled(self, den: int) -> np.ndarray:
        factor = den // self.den
        return self.num if factor == 1 else self.num * factor

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        _check_same_shape(self.shape, other.shape)
        den = self.den * other.den // math.gcd(self.den, other.den)
        return ExactMatrix(self._rescaled(den) + other._rescaled(den), den)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        _check_same_shape(self.shape, other.shape)
        den = self.den * other.den // math.gcd(self.den, other.den)
        return ExactMatrix(self._rescaled(den) - other._rescaled(den), den)

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(-self.num, self.den)

    def scale(self, s) -> "ExactMatrix":
        s = Fraction(s)
        return ExactMatrix(self.num * s.numerator, self.den * s.denominator)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        # cross-multiplied comparison, independent of representation
        return bool(np.all(self.num * other.den == other.num * self.den))

    __hash__ = None

    def relu(self) -> "ExactMatrix":
        """max(x, 0) entrywise; den > 0 so the sign test on numerators is exact"""
        return ExactMatrix(np.where(self.num > 0, self.num, 0), self.den)

    def max_abs(self) -> Fraction:
        return Fraction(max(abs(int(x)) for x in self.num.ravel()), self.den)


def _check_same_shape(a, b) -> None:
    if tuple(a) != tuple(b):
        raise ContractViolation(f"shape mismatch: {tuple(a)} vs {tuple(b)}")


@dataclass(frozen=True)
class ExactComplexMatrix:
    """Gaussian-rational matrix re + i im"""

    re: ExactMatrix
    im: ExactMatrix

    def __post_init__(self):
        _check_same_shape(self.re.shape, self.im.shape)

    @classmethod
    def from_complex_matrix(cls, z: ComplexMatrix) -> "ExactComplexMatrix":
        return cls(ExactMatrix.from_doubles(z.re), ExactMatrix.from_doubles(z.im))

    @classmethod
    def from_real(cls, a: ExactMatrix) -> "ExactComplexMatrix":
        return cls(a, ExactMatrix.zeros(a.shape))

    @classmethod
    def identity(cls, n: int, scale: Fraction = Fraction(1)) -> "ExactComplexMatrix":
        return cls(ExactMatrix.identity(n, scale), ExactMatrix.zeros((n, n)))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.re.shape

    def entry(self, i: int, j: int) -> GaussianRational:
        return GaussianRational(self.re.entry(i, j), self.im.entry(i, j))

    def __add__(self, other: "ExactComplexMatrix") -> "ExactComplexMatrix":
        return ExactComplexMatrix(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ExactComplexMatrix") -> "ExactComplexMatrix":
        return ExactComplexMatrix(self.re - other.re, self.im - other.im)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactComplexMatrix):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    __hash__ = None

    def scale(self, s) -> "ExactComplexMatrix":
        return ExactComplexMatrix(self.re.scale(s), self.im.scale(s))

    def relu(self) -> "ExactComplexMatrix":
        return ExactComplexMatrix(self.re.relu(), self.im.relu())

    def max_norm(self) -> Fraction:
        return max(self.re.max_abs(), self.im.max_abs())

    def to_complex_matrix(self) -> ComplexMatrix:
        return ComplexMatrix(self.re.to_float(), self.im.to_float())


ExactMatrixR = ExactMatrix
ExactMatrixC = ExactComplexMatrix
AnyExact = Union[ExactMatrix, ExactComplexMatrix]


def _real_matmul(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    if A.shape[1] != B.shape[0]:
        raise ContractViolation(f"inner dimensions differ: {A.shape} x {B.shape}")
    # object-dtype dot runs on Python ints: exact
    return ExactMatrix(np.dot(A.num, B.num), A.den * B.den)


def exact_matmul(A: AnyExact, B: AnyExact) -> AnyExact:
    """Exact product over Q, or over Q + Qi when either factor is complex"""
    if isinstance(A, ExactMatrix) and isinstance(B, ExactMatrix):
        return _real_matmul(A, B)
    if isinstance(A, ExactMatrix):
        A = ExactComplexMatrix.from_real(A)
    if isinstance(B, ExactMatrix):
        B = ExactComplexMatrix.from_real(B)
    ac = _real_matmul(A.re, B.re)
    bd = _real_matmul(A.im, B.im)
    ad = _real_matmul(A.re, B.im)
    bc = _real_matmul(A.im, B.re)
    return ExactComplexMatrix(ac - bd, ad + bc)


def _as_exact_complex(x) -> ExactComplexMatrix:
    if isinstance(x, ExactComplexMatrix):
        return x
    if isinstance(x, ExactMatrix):
        return ExactComplexMatrix.from_real(x)
    if isinstance(x, ComplexMatrix):
        return ExactComplexMatrix.from_complex_matrix(x)
    return ExactComplexMatrix.from_real(ExactMatrix.from_doubles(as_real_matrix(x)))


def max_norm_error(computed, exact) -> Tuple[Fraction, Fraction]:
    """Exact max-norm error of the real and the imaginary parts, separately"""
    got = _as_exact_complex(computed)
    want = _as_exact_complex(exact)
    _check_same_shape(got.shape, want.shape)
    diff = want - got
    return diff.re.max_abs(), diff.im.max_abs()


def max_norm_rel_error(computed, exact_prod, scale_x: float, scale_y: float = 1.0) -> float:
    """
    ||E - E_hat||_max / (scale_x * scale_y), computed exactly and rounded once.

    computed: ComplexMatrix or real ndarray; exact_prod: ExactComplexMatrix or ExactMatrix.
    """
    if not (scale_x > 0 and scale_y > 0):
        raise ContractViolation(f"scales must be positive, got {scale_x}, {scale_y}")
    re_err, im_err = max_norm_error(computed, exact_prod)
    err = max(re_err, im_err)
    return float(err / (double_to_rational(scale_x) * double_to_rational(scale_y)))


def max_norm_rel_error_to_exact(computed, exact) -> float:
    """||E - E_hat||_max / ||E||_max with the exact norm of E in the denominator"""
    want = _as_exact_complex(exact)
    norm = want.max_norm()
    if norm == 0:
        raise ContractViolation("exact value is zero; relative error undefined")
    re_err, im_err = max_norm_error(computed, want)
    return float(max(re_err, im_err) / norm)


# ---------------------------------------------------------------------------
# High-precision cross-check (independent of the integer path above)
# ---------------------------------------------------------------------------


def decimal_matmul(A: np.ndarray, B: np.ndarray, digits: int = 80) -> List[List[Decimal]]:
    """Product of two double matrices in Decimal arithmetic at the given precision"""
    A = as_real_matrix(A)
    B = as_real_matrix(B)
    if A.shape[1] != B.shape[0]:
        raise ContractViolation(f"inner dimensions differ: {A.shape} x {B.shape}")
    with localcontext() as ctx:
        ctx.prec = digits
        Ad = [[Decimal(float(x)) for x in row] for row in A]
        Bd = [[Decimal(float(x)) for x in row] for row in B.T]
        return [[sum((a * b for a, b in zip(row, col)), Decimal(0)) for col in Bd] for row in Ad]

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .Errors import ContractViolation


def as_real_matrix(x, label: str = "matrix") -> np.ndarray:
    """Validate a real double matrix (2-D, finite) and return it as float64"""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ContractViolation(f"{label} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ContractViolation(f"{label} has non-finite entries")
    return arr


@dataclass(frozen=True)
class ComplexMatrix:
    """A + iB held as two real double matrices of identical shape"""

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        re = as_real_matrix(self.re, "real part")
        im = as_real_matrix(self.im, "imaginary part")
        if re.shape != im.shape:
            raise ContractViolation(f"real part {re.shape} and imaginary part {im.shape} differ in shape")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def from_complex(cls, z) -> "ComplexMatrix":
        z = np.asarray(z, dtype=np.complex128)
        return cls(z.real.copy(), z.imag.copy())

    @classmethod
    def from_stacked(cls, stacked: np.ndarray) -> "ComplexMatrix":
        return cls(stacked[0], stacked[1])

    @classmethod
    def identity(cls, n: int) -> "ComplexMatrix":
        return cls(np.eye(n), np.zeros((n, n)))

    @classmethod
    def real(cls, a) -> "ComplexMatrix":
        a = as_real_matrix(a)
        return cls(a, np.zeros_like(a))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.re.shape

    @property
    def rows(self) -> int:
        return self.re.shape[0]

    @property
    def cols(self) -> int:
        return self.re.shape[1]

    def stacked(self) -> np.ndarray:
        """(2, rows, cols) array; linear combinations act on both parts at once"""
        return np.stack([self.re, self.im])

    def to_complex(self) -> np.ndarray:
        return self.re + 1j * self.im

    def conj(self) -> "ComplexMatrix":
        return ComplexMatrix(self.re, -self.im)

    def scale(self, s: float) -> "ComplexMatrix":
        return ComplexMatrix(self.re * s, self.im * s)

    def max_norm(self) -> float:
        """max over |re_ij| and |im_ij|"""
        return float(max(np.abs(self.re).max(), np.abs(self.im).max()))

    def abs_parts(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.abs(self.re), np.abs(self.im)

    def bitwise_equal(self, other: "ComplexMatrix") -> bool:
        return (
            self.shape == other.shape
            and np.array_equal(self.re, other.re)
            and np.array_equal(self.im, other.im)
        )


def complex_relu(z: ComplexMatrix) -> ComplexMatrix:
    """sigma(a + bi) = max(a, 0) + max(b, 0) i, entrywise"""
    # np.maximum(-0.0, 0.0) may return -0.0; where() keeps the result a clean +0.0
    return ComplexMatrix(np.where(z.re > 0, z.re, 0.0), np.where(z.im > 0, z.im, 0.0))


def complex_relu_scalar(z: complex) -> complex:
    return complex(z.real if z.real > 0 else 0.0, z.imag if z.imag > 0 else 0.0)

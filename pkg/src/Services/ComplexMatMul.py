"""
Complex matrix multiplication (A + iB)(C + iD) from real matrix products.

    regular:  (AC - BD) + i(AD + BC)                         4 products
    gauss:    (AC - BD) + i(((A + B)(C + D) - AC) - BD)      3 products
    new:      P1 = (A + B/sqrt3)(C + D/sqrt3)
              P2 = (A - B/sqrt3)(C - D/sqrt3)                3 products
              real = ((P1 + P2) - (8/3) BD) / 2
              imag = (sqrt3 / 2)(P1 - P2)

The same combination code runs with double constants on a float backend, and with
constants in Q(sqrt 3) on object arrays for the exact (oracle) mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Tuple, Union

import numpy as np

from src.log import get_logger
from src.Objects.ComplexMatrix import ComplexMatrix
from src.Objects.Errors import ContractViolation
from src.Objects.ExactCoefficient import ExactCoefficient
from src.Services import Catalog
from src.Services.MatMul import Kernel, RecursionPolicy, multiply_conventional, multiply_recursive

logger = get_logger("CMM")

# correctly rounded doubles, computed once
INV_SQRT3 = 1.0 / math.sqrt(3.0)
SQRT3_HALF = math.sqrt(3.0) / 2.0
EIGHT_THIRDS = 8.0 / 3.0
HALF = 0.5

_EXACT_INV_SQRT3 = ExactCoefficient.sqrt3(Fraction(1, 3))
_EXACT_SQRT3_HALF = ExactCoefficient.sqrt3(Fraction(1, 2))
_EXACT_EIGHT_THIRDS = ExactCoefficient.of(Fraction(8, 3))
_EXACT_HALF = ExactCoefficient.of(Fraction(1, 2))


class CmmScheme(Enum):
    REGULAR = "regular"
    GAUSS = "gauss"
    NEW = "new"


class BackendKind(Enum):
    CONVENTIONAL = "conventional"
    STRASSEN = "strassen"
    WINOGRAD = "winograd"


@dataclass(frozen=True)
class RealBackend:
    """Real matrix product used for every product inside a complex scheme"""

    kind: BackendKind = BackendKind.CONVENTIONAL
    policy: RecursionPolicy = field(default_factory=RecursionPolicy)

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", BackendKind(self.kind))

    def multiply(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        if self.kind is BackendKind.CONVENTIONAL:
            return multiply_conventional(A, B, self.policy.kernel)
        D = Catalog.get_builtin(self.kind.value).decomposition
        return multiply_recursive(A, B, D, self.policy)

    def label(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class CmmAlgorithm:
    scheme: CmmScheme
    backend: RealBackend = field(default_factory=RealBackend)

    def __post_init__(self):
        if isinstance(self.scheme, str):
            object.__setattr__(self, "scheme", parse_scheme(self.scheme))

    @property
    def name(self) -> str:
        return self.scheme.value


def parse_scheme(name: str) -> CmmScheme:
    try:
        return CmmScheme(str(name).strip().lower())
    except ValueError:
        valid = ", ".join(s.value for s in CmmScheme)
        raise ContractViolation(f"unknown complex multiplication algorithm '{name}' (valid: {valid})") from None


def blas_algorithm(scheme: Union[str, CmmScheme]) -> CmmAlgorithm:
    """Conventional backend on numpy.matmul, for timing runs"""
    return CmmAlgorithm(scheme, RealBackend(BackendKind.CONVENTIONAL, RecursionPolicy(kernel=Kernel.BLAS)))


def _scheme_of(algo) -> CmmScheme:
    if isinstance(algo, CmmAlgorithm):
        return algo.scheme
    if isinstance(algo, CmmScheme):
        return algo
    return parse_scheme(algo)


def product_count(algo: Union[str, CmmScheme, CmmAlgorithm]) -> int:
    return 4 if _scheme_of(algo) is CmmScheme.REGULAR else 3


# ---------------------------------------------------------------------------
# Combination step (shared by float and exact modes)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Constants:
    inv_sqrt3: object
    sqrt3_half: object
    eight_thirds: object
    half: object


_FLOAT_CONSTANTS = _Constants(INV_SQRT3, SQRT3_HALF, EIGHT_THIRDS, HALF)
_EXACT_CONSTANTS = _Constants(_EXACT_INV_SQRT3, _EXACT_SQRT3_HALF, _EXACT_EIGHT_THIRDS, _EXACT_HALF)


def _combine(scheme: CmmScheme, A, B, C, D, mul: Callable, k: _Constants) -> Tuple:
    # scalars go on the right so object arrays dispatch to the element type
    if scheme is CmmScheme.REGULAR:
        AC = mul(A, C)
        BD = mul(B, D)
        AD = mul(A, D)
        BC = mul(B, C)
        return AC - BD, AD + BC
    if scheme is CmmScheme.GAUSS:
        AC = mul(A, C)
        BD = mul(B, D)
        T = mul(A + B, C + D)
        return AC - BD, (T - AC) - BD
    Bs = B * k.inv_sqrt3
    Ds = D * k.inv_sqrt3
    P1 = mul(A + Bs, C + Ds)
    P2 = mul(A - Bs, C - Ds)
    P3 = mul(B, D)
    real = ((P1 + P2) - P3 * k.eight_thirds) * k.half
    imag = (P1 - P2) * k.sqrt3_half
    return real, imag


def cmm(
    X: ComplexMatrix,
    Y: ComplexMatrix,
    algo: Union[str, CmmScheme, CmmAlgorithm],
    matmul: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
) -> ComplexMatrix:
    """
    (A + iB)(C + iD) with the given scheme.

    matmul overrides the backend product (used to count or trace products).
    """
    if not isinstance(algo, CmmAlgorithm):
        algo = CmmAlgorithm(algo)
    if X.cols != Y.rows:
        raise ContractViolation(f"inner dimensions differ: {X.shape} x {Y.shape}")
    mul = matmul or algo.backend.multiply
    re, im = _combine(algo.scheme, X.re, X.im, Y.re, Y.im, mul, _FLOAT_CONSTANTS)
    return ComplexMatrix(re, im)


# ---------------------------------------------------------------------------
# Exact mode
# ---------------------------------------------------------------------------


def _exact_array(x) -> np.ndarray:
    arr = np.asarray(x)
    out = np.empty(arr.shape, dtype=object)
    for idx, value in np.ndenumerate(arr):
        out[idx] = value if isinstance(value, ExactCoefficient) else ExactCoefficient.of(float(value))
    return out


def _exact_dot(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    rows, inner = A.shape
    cols = B.shape[1]
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        for j in range(cols):
            acc = ExactCoefficient.of(0)
            for k in range(inner):
                acc = acc + A[i, k] * B[k, j]
            out[i, j] = acc
    return out


def cmm_exact(X, Y, algo: Union[str, CmmScheme, CmmAlgorithm]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Run a scheme in exact arithmetic over Q(sqrt 3).

    X and Y are ComplexMatrix (doubles are converted exactly) or (re, im) pairs of object
    arrays of ExactCoefficient. Returns (real, imag) object arrays. Every scheme reproduces
    the exact complex product here; this is the oracle mode used to check the formulas.
    """
    scheme = _scheme_of(algo)
    A, B = (X.re, X.im) if isinstance(X, ComplexMatrix) else X
    C, D = (Y.re, Y.im) if isinstance(Y, ComplexMatrix) else Y
    A, B, C, D = (_exact_array(m) for m in (A, B, C, D))
    if A.shape[1] != C.shape[0]:
        raise ContractViolation(f"inner dimensions differ: {A.shape} x {C.shape}")
    return _combine(scheme, A, B, C, D, _exact_dot, _EXACT_CONSTANTS)

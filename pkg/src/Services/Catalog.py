"""
Built-in decompositions: Strassen and Winograd 2x2 matrix multiplication, the conventional
m x n x p matrix multiplication, and three algorithms for complex multiplication.

Matrix coefficient patterns are transcribed as-is (no sign normalisation) and flattened
row-major; every entry is checked exactly against its reference tensor by the tests.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

from src.log import get_logger
from src.Objects.BilinearDecomposition import (
    BilinearDecomposition,
    DenseTensor3,
    Term,
    growth_factor,
    tensor_from_entries,
    verify_decomposition,
)
from src.Objects.Errors import CatalogLookupError, ContractViolation
from src.Objects.ExactCoefficient import ExactCoefficient

logger = get_logger("Catalog")

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

COMPLEX_NUCLEAR_NORM = 4.0


@dataclass(frozen=True)
class CatalogEntry:
    decomposition: BilinearDecomposition
    closed_form_growth: str
    closed_form_value: Callable[[], float]
    known_nuclear_norm: Optional[float]
    source: str
    reference: Callable[[], DenseTensor3]

    @property
    def name(self) -> str:
        return self.decomposition.name

    def closed_form(self) -> float:
        return self.closed_form_value()

    def verify(self) -> bool:
        return verify_decomposition(self.decomposition, self.reference())


def _flat(rows: List[List[int]]) -> Tuple[int, ...]:
    return tuple(x for row in rows for x in row)


def _mm_terms(triples) -> Tuple[Term, ...]:
    return tuple(Term(_flat(U), _flat(V), _flat(W)) for U, V, W in triples)


# ---------------------------------------------------------------------------
# Reference tensors
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def matmul_tensor(m: int, n: int, p: int) -> DenseTensor3:
    """Tensor of (A, B) -> AB for A m x n, B n x p, flattened row-major"""
    entries = {}
    for i in range(m):
        for j in range(n):
            for k in range(p):
                entries[(i * n + j, j * p + k, i * p + k)] = 1
    return tensor_from_entries((m * n, n * p, m * p), entries)


@lru_cache(maxsize=None)
def complex_mult_tensor() -> DenseTensor3:
    """(a + bi)(c + di) = (ac - bd) + (ad + bc) i on R^2 x R^2 -> R^2"""
    return tensor_from_entries(
        (2, 2, 2),
        {(0, 0, 0): 1, (1, 1, 0): -1, (0, 1, 1): 1, (1, 0, 1): 1},
    )


# ---------------------------------------------------------------------------
# Matrix multiplication
# ---------------------------------------------------------------------------

# M1 = (A11 + A22)(B11 + B22), ..., AB = [[M1 + M4 - M5 + M7, M3 + M5], [M2 + M4, M1 - M2 + M3 + M6]]
_STRASSEN = [
    ([[1, 0], [0, 1]], [[1, 0], [0, 1]], [[1, 0], [0, 1]]),
    ([[0, 0], [1, 1]], [[1, 0], [0, 0]], [[0, 0], [1, -1]]),
    ([[1, 0], [0, 0]], [[0, 1], [0, -1]], [[0, 1], [0, 1]]),
    ([[0, 0], [0, 1]], [[-1, 0], [1, 0]], [[1, 0], [1, 0]]),
    ([[1, 1], [0, 0]], [[0, 0], [0, 1]], [[-1, 1], [0, 0]]),
    ([[-1, 0], [1, 0]], [[1, 1], [0, 0]], [[0, 0], [0, 1]]),
    ([[0, 1], [0, -1]], [[0, 0], [1, 1]], [[1, 0], [0, 0]]),
]

# M1' = (A21 + A22 - A11)(B11 + B22 - B12), M2' = A11 B11, ...
_WINOGRAD = [
    ([[-1, 0], [1, 1]], [[1, -1], [0, 1]], [[0, 1], [1, 1]]),
    ([[1, 0], [0, 0]], [[1, 0], [0, 0]], [[1, 1], [1, 1]]),
    ([[0, 1], [0, 0]], [[0, 0], [1, 0]], [[1, 0], [0, 0]]),
    ([[1, 0], [-1, 0]], [[0, -1], [0, 1]], [[0, 0], [1, 1]]),
    ([[0, 0], [1, 1]], [[-1, 1], [0, 0]], [[0, 1], [0, 1]]),
    ([[1, 1], [-1, -1]], [[0, 0], [0, 1]], [[0, 1], [0, 0]]),
    ([[0, 0], [0, 1]], [[1, -1], [-1, 1]], [[0, 0], [-1, 0]]),
]


def strassen_2x2() -> BilinearDecomposition:
    return BilinearDecomposition(
        "strassen_2x2",
        (4, 4, 4),
        _mm_terms(_STRASSEN),
        known_growth_factor_closed_form="12 + 2*sqrt(2)",
    )


def winograd_2x2() -> BilinearDecomposition:
    return BilinearDecomposition(
        "winograd_2x2",
        (4, 4, 4),
        _mm_terms(_WINOGRAD),
        known_growth_factor_closed_form="7 + 4*sqrt(2) + 3*sqrt(3)",
    )


def conventional_mm(m: int, n: int, p: int) -> BilinearDecomposition:
    """sum_{i,j,k} tr(E_ij^T A) tr(E_jk^T B) E_ik, one term per (i, j, k)"""
    if min(m, n, p) < 1:
        raise ContractViolation(f"conventional_mm needs m, n, p >= 1, got ({m}, {n}, {p})")
    terms = []
    for i in range(m):
        for j in range(n):
            for k in range(p):
                u = [0] * (m * n)
                v = [0] * (n * p)
                w = [0] * (m * p)
                u[i * n + j] = 1
                v[j * p + k] = 1
                w[i * p + k] = 1
                terms.append(Term(tuple(u), tuple(v), tuple(w)))
    name = "conventional_2x2" if (m, n, p) == (2, 2, 2) else f"conventional_mm({m},{n},{p})"
    return BilinearDecomposition(
        name,
        (m * n, n * p, m * p),
        tuple(terms),
        known_growth_factor_closed_form=f"{m * n * p}",
    )


# ---------------------------------------------------------------------------
# Complex multiplication, C = R^2 with basis (1, i)
# ---------------------------------------------------------------------------


def complex_regular() -> BilinearDecomposition:
    """(e1* e1* - e2* e2*) e1 + (e1* e2* + e2* e1*) e2"""
    return BilinearDecomposition(
        "complex_regular",
        (2, 2, 2),
        (
            Term((1, 0), (1, 0), (1, 0)),
            Term((0, -1), (0, 1), (1, 0)),
            Term((1, 0), (0, 1), (0, 1)),
            Term((0, 1), (1, 0), (0, 1)),
        ),
        known_nuclear_norm=COMPLEX_NUCLEAR_NORM,
        known_growth_factor_closed_form="4",
    )


def complex_gauss() -> BilinearDecomposition:
    """(e1* + e2*)(e1* + e2*) e2 + e1* e1* (e1 - e2) - e2* e2* (e1 + e2)"""
    return BilinearDecomposition(
        "complex_gauss",
        (2, 2, 2),
        (
            Term((1, 1), (1, 1), (0, 1)),
            Term((1, 0), (1, 0), (1, -1)),
            Term((0, -1), (0, 1), (1, 1)),
        ),
        known_nuclear_norm=COMPLEX_NUCLEAR_NORM,
        known_growth_factor_closed_form="2*(1 + sqrt(2))",
    )


def complex_new() -> BilinearDecomposition:
    """
    4/3 ( [s e1* + h e2*]^2 (h e1 + s e2) + [s e1* - h e2*]^2 (h e1 - s e2) - e2* e2* e1 )

    with s = sqrt(3)/2, h = 1/2. The 4/3 is folded into the w vectors.
    """
    half = ExactCoefficient(Fraction(1, 2))
    s = ExactCoefficient.sqrt3(Fraction(1, 2))
    four_thirds = ExactCoefficient(Fraction(4, 3))
    return BilinearDecomposition(
        "complex_new",
        (2, 2, 2),
        (
            Term((s, half), (s, half), (four_thirds * half, four_thirds * s)),
            Term((s, -half), (s, -half), (four_thirds * half, -(four_thirds * s))),
            Term((0, 1), (0, 1), (-four_thirds, 0)),
        ),
        known_nuclear_norm=COMPLEX_NUCLEAR_NORM,
        known_growth_factor_closed_form="4",
    )


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

_SOURCE_FMM = "bilinear stability, fast matrix multiplication section"
_SOURCE_CMM = "bilinear stability, complex multiplication section"


def _entries() -> Dict[str, Callable[[], CatalogEntry]]:
    return {
        "strassen_2x2": lambda: CatalogEntry(
            strassen_2x2(), "12 + 2*sqrt(2)", lambda: 12 + 2 * SQRT2, None, _SOURCE_FMM,
            lambda: matmul_tensor(2, 2, 2),
        ),
        "winograd_2x2": lambda: CatalogEntry(
            winograd_2x2(), "7 + 4*sqrt(2) + 3*sqrt(3)", lambda: 7 + 4 * SQRT2 + 3 * SQRT3, None,
            _SOURCE_FMM, lambda: matmul_tensor(2, 2, 2),
        ),
        "conventional_2x2": lambda: _conventional_entry(2, 2, 2),
        "complex_regular": lambda: CatalogEntry(
            complex_regular(), "4", lambda: 4.0, COMPLEX_NUCLEAR_NORM, _SOURCE_CMM, complex_mult_tensor,
        ),
        "complex_gauss": lambda: CatalogEntry(
            complex_gauss(), "2*(1 + sqrt(2))", lambda: 2 * (1 + SQRT2), COMPLEX_NUCLEAR_NORM,
            _SOURCE_CMM, complex_mult_tensor,
        ),
        "complex_new": lambda: CatalogEntry(
            complex_new(), "4", lambda: 4.0, COMPLEX_NUCLEAR_NORM, _SOURCE_CMM, complex_mult_tensor,
        ),
    }


def _conventional_entry(m: int, n: int, p: int) -> CatalogEntry:
    count = m * n * p
    return CatalogEntry(
        conventional_mm(m, n, p),
        str(count),
        lambda: float(count),
        None,
        _SOURCE_FMM,
        lambda: matmul_tensor(m, n, p),
    )


BUILTIN_NAMES = (
    "strassen_2x2",
    "winograd_2x2",
    "conventional_2x2",
    "complex_regular",
    "complex_gauss",
    "complex_new",
)

_CONVENTIONAL_RE = re.compile(r"^conventional_mm\((\d+),(\d+),(\d+)\)$")

# short names accepted by the CLI and the matmul/complex services
ALIASES = {
    "strassen": "strassen_2x2",
    "winograd": "winograd_2x2",
    "conventional": "conventional_2x2",
    "regular": "complex_regular",
    "gauss": "complex_gauss",
    "new": "complex_new",
}


@lru_cache(maxsize=None)
def get_builtin(name: str) -> CatalogEntry:
    """Look up a built-in by name; conventional_mm(m,n,p) is accepted for any m, n, p >= 1"""
    key = ALIASES.get(name, name).replace(" ", "")
    match = _CONVENTIONAL_RE.match(key)
    if match:
        m, n, p = (int(g) for g in match.groups())
        return _conventional_entry(m, n, p)
    factories = _entries()
    if key not in factories:
        raise CatalogLookupError(
            f"unknown built-in '{name}'; choose one of {', '.join(BUILTIN_NAMES)} or conventional_mm(m,n,p)"
        )
    logger.debug(f"Loaded built-in {key}")
    return factories[key]()


def catalog_constants() -> List[Dict]:
    """(name, r, growth factor, nuclear norm or 'unknown') for the six built-ins"""
    rows = []
    for name in BUILTIN_NAMES:
        entry = get_builtin(name)
        rows.append(
            {
                "name": name,
                "r": entry.decomposition.rank,
                "growth_factor": growth_factor(entry.decomposition),
                "closed_form": entry.closed_form_growth,
                "nuclear_norm": entry.known_nuclear_norm if entry.known_nuclear_norm is not None else "unknown",
            }
        )
    return rows

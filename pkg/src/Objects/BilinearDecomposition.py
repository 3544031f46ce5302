"""
Bilinear decompositions and the algorithms they define.

A decomposition of a bilinear map beta: R^m x R^n -> R^p is a list of r rank-1 terms
(u_i, v_i, w_i); the algorithm it defines computes

    beta(x, y) = sum_i (u_i . x) (v_i . y) w_i

The linear functionals are stored as their coefficient vectors, and matrix spaces are
flattened row-major, so a 2x2 matrix [[a, b], [c, d]] is the vector (a, b, c, d).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .Errors import ContractViolation, DecompositionFormatError
from .ExactCoefficient import ZERO, ExactCoefficient

Vector = Tuple[ExactCoefficient, ...]


class NormSpec(Enum):
    """Norm used on each of the three spaces"""

    # Euclidean (Frobenius on flattened matrix spaces); self-dual, so the dual norm of a
    # functional is the 2-norm of its coefficient vector
    EUCLIDEAN = "euclidean"


def _coerce_vector(values, length: int, label: str) -> Vector:
    vec = tuple(ExactCoefficient.of(x) for x in values)
    if len(vec) != length:
        raise ContractViolation(f"{label} has length {len(vec)}, expected {length}")
    return vec


@dataclass(frozen=True)
class Term:
    """One rank-1 triple u (x) v (x) w"""

    u: Vector
    v: Vector
    w: Vector

    def is_zero(self) -> bool:
        return (
            all(c.is_zero() for c in self.u)
            or all(c.is_zero() for c in self.v)
            or all(c.is_zero() for c in self.w)
        )


@dataclass(frozen=True)
class DenseTensor3:
    """m x n x p array of exact coefficients; entries[j][k][l]"""

    dims: Tuple[int, int, int]
    entries: Tuple[Tuple[Tuple[ExactCoefficient, ...], ...], ...]

    def __post_init__(self):
        m, n, p = self.dims
        if len(self.entries) != m or any(len(row) != n for row in self.entries) or any(
            len(fiber) != p for row in self.entries for fiber in row
        ):
            raise ContractViolation(f"tensor entries do not match dims {self.dims}")

    @classmethod
    def zeros(cls, dims: Tuple[int, int, int]) -> "DenseTensor3":
        m, n, p = dims
        return cls(dims, tuple(tuple(tuple(ZERO for _ in range(p)) for _ in range(n)) for _ in range(m)))

    def __getitem__(self, index: Tuple[int, int, int]) -> ExactCoefficient:
        j, k, l = index
        return self.entries[j][k][l]

    def nonzero(self) -> Dict[Tuple[int, int, int], ExactCoefficient]:
        m, n, p = self.dims
        return {
            (j, k, l): self.entries[j][k][l]
            for j, k, l in product(range(m), range(n), range(p))
            if not self.entries[j][k][l].is_zero()
        }

    def to_float_array(self) -> np.ndarray:
        m, n, p = self.dims
        out = np.zeros((m, n, p))
        for (j, k, l), c in self.nonzero().items():
            out[j, k, l] = c.float_view
        return out


@dataclass(frozen=True)
class BilinearDecomposition:
    """A named decomposition; r = len(terms) is its bilinear complexity"""

    name: str
    dims: Tuple[int, int, int]
    terms: Tuple[Term, ...]
    known_nuclear_norm: Optional[float] = None
    known_growth_factor_closed_form: Optional[str] = None
    # float views of the coefficients, cached for evaluation
    _float_u: np.ndarray = field(init=False, repr=False, compare=False)
    _float_v: np.ndarray = field(init=False, repr=False, compare=False)
    _float_w: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise ContractViolation(f"dims must be three positive integers, got {self.dims}")
        object.__setattr__(self, "dims", dims)
        m, n, p = dims
        terms = []
        for i, t in enumerate(self.terms):
            if not isinstance(t, Term):
                t = Term(*t)
            term = Term(
                _coerce_vector(t.u, m, f"term {i + 1} u"),
                _coerce_vector(t.v, n, f"term {i + 1} v"),
                _coerce_vector(t.w, p, f"term {i + 1} w"),
            )
            if term.is_zero():
                raise ContractViolation(f"term {i + 1} of {self.name} is a zero triple")
            terms.append(term)
        if not terms:
            raise ContractViolation(f"{self.name} has no terms")
        object.__setattr__(self, "terms", tuple(terms))
        if self.known_nuclear_norm is not None and self.known_nuclear_norm < 0:
            raise ContractViolation("known nuclear norm must be nonnegative")
        object.__setattr__(self, "_float_u", self._float_matrix(lambda t: t.u, m))
        object.__setattr__(self, "_float_v", self._float_matrix(lambda t: t.v, n))
        object.__setattr__(self, "_float_w", self._float_matrix(lambda t: t.w, p))
        for arr in (self._float_u, self._float_v, self._float_w):
            arr.setflags(write=False)

    def _float_matrix(self, pick, width: int) -> np.ndarray:
        out = np.zeros((len(self.terms), width))
        for i, t in enumerate(self.terms):
            out[i] = [c.float_view for c in pick(t)]
        return out

    @property
    def rank(self) -> int:
        return len(self.terms)

    @property
    def float_terms(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(U, V, W) with one row per term, coefficients rounded to nearest double"""
        return self._float_u, self._float_v, self._float_w

    def with_terms(self, terms: Sequence[Term], name: Optional[str] = None) -> "BilinearDecomposition":
        return BilinearDecomposition(
            name or self.name,
            self.dims,
            tuple(terms),
            self.known_nuclear_norm,
            self.known_growth_factor_closed_form,
        )

    # JSON format: {"name", "dims", "terms": [{"u", "v", "w"}]}

    def to_dict(self) -> Dict:
        out = {
            "name": self.name,
            "dims": list(self.dims),
            "terms": [
                {
                    "u": [c.to_json() for c in t.u],
                    "v": [c.to_json() for c in t.v],
                    "w": [c.to_json() for c in t.w],
                }
                for t in self.terms
            ],
        }
        if self.known_nuclear_norm is not None:
            out["known_nuclear_norm"] = self.known_nuclear_norm
        if self.known_growth_factor_closed_form is not None:
            out["known_growth_factor_closed_form"] = self.known_growth_factor_closed_form
        return out

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, raw: Dict) -> "BilinearDecomposition":
        try:
            name = str(raw["name"])
            dims = tuple(int(d) for d in raw["dims"])
            terms = [
                Term(
                    tuple(ExactCoefficient.from_json(c) for c in t["u"]),
                    tuple(ExactCoefficient.from_json(c) for c in t["v"]),
                    tuple(ExactCoefficient.from_json(c) for c in t["w"]),
                )
                for t in raw["terms"]
            ]
        except (KeyError, TypeError) as e:
            raise DecompositionFormatError(f"malformed decomposition: {e}") from e
        nuclear = raw.get("known_nuclear_norm")
        return cls(
            name,
            dims,
            tuple(terms),
            None if nuclear is None else float(nuclear),
            raw.get("known_growth_factor_closed_form"),
        )

    @classmethod
    def from_json(cls, text: str) -> "BilinearDecomposition":
        try:
            # numbers keep their decimal text so 0.1 parses as 1/10, not the double near it
            raw = json.loads(text, parse_float=Fraction)
        except json.JSONDecodeError as e:
            raise DecompositionFormatError(f"invalid JSON: {e}") from e
        if isinstance(raw.get("known_nuclear_norm"), Fraction):
            raw["known_nuclear_norm"] = float(raw["known_nuclear_norm"])
        return cls.from_dict(raw)

    @classmethod
    def load(cls, path: str) -> "BilinearDecomposition":
        with open(path, "r") as f:
            return cls.from_json(f.read())

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            f.write(self.to_json())
            f.write("\n")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def _norm2(vec: Sequence[ExactCoefficient]) -> float:
    s = 0.0
    for c in vec:
        x = c.float_view
        s += x * x
    return math.sqrt(s)


def growth_factor(D: BilinearDecomposition, norms: NormSpec = NormSpec.EUCLIDEAN) -> float:
    """sum_i |u_i| |v_i| |w_i|, term by term, summed left to right"""
    if norms is not NormSpec.EUCLIDEAN:
        raise ContractViolation(f"unsupported norm {norms}")
    total = 0.0
    for t in D.terms:
        total += _norm2(t.u) * _norm2(t.v) * _norm2(t.w)
    return total


def _dot_left_to_right(coeffs: np.ndarray, x: Sequence[float]) -> float:
    acc = 0.0
    for c, xi in zip(coeffs, x):
        acc += float(c) * float(xi)
    return acc


def _check_lengths(D: BilinearDecomposition, u_len: int, v_len: int) -> None:
    m, n, _ = D.dims
    if u_len != m or v_len != n:
        raise ContractViolation(
            f"{D.name} expects inputs of lengths ({m}, {n}), got ({u_len}, {v_len})"
        )


def evaluate(D: BilinearDecomposition, u: Sequence[float], v: Sequence[float]) -> np.ndarray:
    """
    Run the algorithm defined by D on (u, v) in double precision.

    phi_i(u) and psi_i(v) are dot products accumulated left to right, c_i is their
    product, and the output is c_1 w_1 + c_2 w_2 + ... summed strictly left to right.
    """
    u = [float(x) for x in np.ravel(np.asarray(u, dtype=float))]
    v = [float(x) for x in np.ravel(np.asarray(v, dtype=float))]
    _check_lengths(D, len(u), len(v))
    U, V, W = D.float_terms
    p = D.dims[2]
    out = [0.0] * p
    for i in range(D.rank):
        c = _dot_left_to_right(U[i], u) * _dot_left_to_right(V[i], v)
        for l in range(p):
            out[l] += c * float(W[i, l])
    return np.array(out)


def evaluate_many(D: BilinearDecomposition, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Batched evaluate: one input pair per row, same per-pair operation order"""
    us = np.atleast_2d(np.asarray(us, dtype=float))
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    if us.shape[0] != vs.shape[0]:
        raise ContractViolation(f"batch sizes differ: {us.shape[0]} vs {vs.shape[0]}")
    _check_lengths(D, us.shape[1], vs.shape[1])
    U, V, W = D.float_terms
    batch = us.shape[0]
    out = np.zeros((batch, D.dims[2]))
    for i in range(D.rank):
        phi = np.zeros(batch)
        for j in range(us.shape[1]):
            phi = phi + U[i, j] * us[:, j]
        psi = np.zeros(batch)
        for k in range(vs.shape[1]):
            psi = psi + V[i, k] * vs[:, k]
        c = phi * psi
        for l in range(D.dims[2]):
            out[:, l] = out[:, l] + c * W[i, l]
    return out


def materialize_tensor(D: BilinearDecomposition) -> DenseTensor3:
    """T[j, k, l] = sum_i u_i[j] v_i[k] w_i[l], exactly in Q(sqrt 3)"""
    m, n, p = D.dims
    acc = [[[ZERO] * p for _ in range(n)] for _ in range(m)]
    for t in D.terms:
        for j in range(m):
            uj = t.u[j]
            if uj.is_zero():
                continue
            for k in range(n):
                vk = t.v[k]
                if vk.is_zero():
                    continue
                ujvk = uj * vk
                for l in range(p):
                    wl = t.w[l]
                    if not wl.is_zero():
                        acc[j][k][l] = acc[j][k][l] + ujvk * wl
    return DenseTensor3(D.dims, tuple(tuple(tuple(fiber) for fiber in row) for row in acc))


def verify_decomposition(D: BilinearDecomposition, reference: DenseTensor3) -> bool:
    """Exact, tolerance-free comparison against a reference tensor"""
    if tuple(reference.dims) != D.dims:
        raise ContractViolation(f"reference dims {reference.dims} do not match {D.dims}")
    return materialize_tensor(D).entries == reference.entries


def tensor_from_entries(dims: Tuple[int, int, int], entries: Dict[Tuple[int, int, int], object]) -> DenseTensor3:
    """Build a sparse-specified tensor; unlisted positions are zero"""
    m, n, p = dims
    acc = [[[ZERO] * p for _ in range(n)] for _ in range(m)]
    for (j, k, l), value in entries.items():
        acc[j][k][l] = ExactCoefficient.of(value)
    return DenseTensor3(dims, tuple(tuple(tuple(fiber) for fiber in row) for row in acc))


def growth_factor_decimal(D: BilinearDecomposition, digits: int = 60) -> Decimal:
    """High-precision growth factor, used to check the double result"""
    with localcontext() as ctx:
        ctx.prec = digits
        total = Decimal(0)
        for t in D.terms:
            norms = []
            for vec in (t.u, t.v, t.w):
                sq = ZERO
                for c in vec:
                    sq = sq + c * c
                norms.append(sq.to_decimal(digits).sqrt())
            total += norms[0] * norms[1] * norms[2]
        return total

"""
Closed-form forward error bounds (first-order terms).

All bounds are returned without the O(u^2) remainder; callers compare against
bound * slack, with the slack from settings.BOUND_SLACK.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from src.Objects.Errors import ContractViolation
from src.settings import BOUND_SLACK, UNIT_ROUNDOFF

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class UnitRoundoff:
    u: float = UNIT_ROUNDOFF

    def __post_init__(self):
        if not 0.0 < self.u < 1.0:
            raise ContractViolation(f"unit roundoff must lie in (0, 1), got {self.u}")


@dataclass(frozen=True)
class BoundReport:
    first_order_bound: float
    slack_factor: float = BOUND_SLACK
    inputs: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.first_order_bound < 0:
            raise ContractViolation(f"bound must be nonnegative, got {self.first_order_bound}")

    @property
    def bound(self) -> float:
        """First-order bound with the slack applied"""
        return self.first_order_bound * self.slack_factor

    def holds_for(self, error: float) -> bool:
        return error <= self.bound

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["bound_with_slack"] = self.bound
        return out


def thm_main_bound(
    m: int,
    n: int,
    r: int,
    gamma: float,
    norm_u: float,
    norm_v: float,
    u: UnitRoundoff = UnitRoundoff(),
    slack: float = BOUND_SLACK,
) -> BoundReport:
    """
    Forward error bound of a bilinear algorithm with growth factor gamma:

        ||beta(x, y) - fl(beta(x, y))||_inf <= (m + n + r + 1) gamma ||x|| ||y|| u

    Input norms are Euclidean.
    """
    if min(m, n, r) < 1:
        raise ContractViolation(f"m, n, r must be positive, got {(m, n, r)}")
    if gamma < 0 or norm_u < 0 or norm_v < 0:
        raise ContractViolation("gamma and input norms must be nonnegative")
    value = (m + n + r + 1) * gamma * norm_u * norm_v * u.u
    return BoundReport(
        value,
        slack,
        {"m": m, "n": n, "r": r, "gamma": gamma, "norm_u": norm_u, "norm_v": norm_v, "u": u.u},
    )


def corollary_bound(entry, norm_u: float, norm_v: float, u: UnitRoundoff = UnitRoundoff()) -> BoundReport:
    """thm_main_bound with gamma replaced by the tensor nuclear norm (stablest algorithm)"""
    D = entry.decomposition
    nuclear = entry.known_nuclear_norm
    if nuclear is None:
        raise ContractViolation(f"nuclear norm of {D.name} is unknown")
    m, n, _ = D.dims
    return thm_main_bound(m, n, D.rank, nuclear, norm_u, norm_v, u)


def _abs_parts(A, B, C, D) -> Tuple[np.ndarray, ...]:
    mats = [np.abs(np.asarray(x, dtype=np.float64)) for x in (A, B, C, D)]
    for x in mats:
        if x.ndim != 2:
            raise ContractViolation(f"expected 2-D matrices, got shape {x.shape}")
    A, B, C, D = mats
    if A.shape != B.shape or C.shape != D.shape:
        raise ContractViolation(f"real and imaginary parts differ in shape: {A.shape}/{B.shape}, {C.shape}/{D.shape}")
    if A.shape[1] != C.shape[0]:
        raise ContractViolation(f"inner dimensions differ: {A.shape} x {C.shape}")
    return A, B, C, D


def new_alg_entrywise_bounds(A, B, C, D, u: UnitRoundoff = UnitRoundoff()) -> Tuple[np.ndarray, np.ndarray]:
    """
    Entrywise first-order error bounds for the 3-product scheme with the 1/sqrt3 scaling.

        real: (n + 7)(|A| + |B|/sqrt3)(|C| + |D|/sqrt3) u + (4n/3 + 4)|B||D| u
        imag: sqrt3 (n + 6)(|A| + |B|/sqrt3)(|C| + |D|/sqrt3) u
    """
    A, B, C, D = _abs_parts(A, B, C, D)
    n = A.shape[1]
    P = (A + B / SQRT3) @ (C + D / SQRT3)
    BD = B @ D
    real = (n + 7) * P * u.u + (4.0 * n / 3.0 + 4.0) * BD * u.u
    imag = SQRT3 * (n + 6) * P * u.u
    return real, imag


def gauss_entrywise_bounds(A, B, C, D, u: UnitRoundoff = UnitRoundoff()) -> Tuple[np.ndarray, np.ndarray]:
    """
    real: (n + 1)(|A||C| + |B||D|) u
    imag: (n + 4)[(|A| + |B|)(|C| + |D|) + |A||C| + |B||D|] u
    """
    A, B, C, D = _abs_parts(A, B, C, D)
    n = A.shape[1]
    AC = A @ C
    BD = B @ D
    real = (n + 1) * (AC + BD) * u.u
    imag = (n + 4) * ((A + B) @ (C + D) + AC + BD) * u.u
    return real, imag


def regular_entrywise_bounds(A, B, C, D, u: UnitRoundoff = UnitRoundoff()) -> Tuple[np.ndarray, np.ndarray]:
    """Both parts: (n + 1)(|A||C| + |B||D|) u resp. (n + 1)(|A||D| + |B||C|) u"""
    A, B, C, D = _abs_parts(A, B, C, D)
    n = A.shape[1]
    return (n + 1) * (A @ C + B @ D) * u.u, (n + 1) * (A @ D + B @ C) * u.u


def recursive_envelope(gamma: float, levels: int, n: int, u: UnitRoundoff = UnitRoundoff()) -> float:
    """
    Loose relative max-norm envelope gamma^levels * n * 4u for a recursive fast product,
    relative to ||A||_max ||B||_max.
    """
    return gamma ** levels * n * 4.0 * u.u


# leading coefficients of the max-norm error when every |entry| <= theta
ASYMPTOTIC_COEFFICIENTS = {
    "new_real": 1.0 + 5.0 / 3.0 + 2.0 / SQRT3,
    "new_imag": SQRT3 + 2.0 + 1.0 / SQRT3,
    "gauss_real": 2.0,
    "gauss_imag": 6.0,
}


def asymptotic_compare(n: int, theta: float, u: UnitRoundoff = UnitRoundoff()) -> Dict[str, float]:
    """Dominant error terms c * n^2 theta^2 u for the new and Gauss schemes"""
    if n < 1:
        raise ContractViolation(f"n must be >= 1, got {n}")
    if theta < 0:
        raise ContractViolation(f"theta must be nonnegative, got {theta}")
    scale = n * n * theta * theta * u.u
    return {key: coeff * scale for key, coeff in ASYMPTOTIC_COEFFICIENTS.items()}


def bound_for_product(
    scheme: str,
    A,
    B,
    C,
    D,
    u: UnitRoundoff = UnitRoundoff(),
) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Entrywise bounds for one complex matrix product by scheme name"""
    table = {
        "regular": regular_entrywise_bounds,
        "gauss": gauss_entrywise_bounds,
        "new": new_alg_entrywise_bounds,
    }
    fn = table.get(scheme)
    return fn(A, B, C, D, u) if fn else None

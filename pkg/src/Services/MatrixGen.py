"""
Seeded input generators.

Random bits come from SplitMix64 (Steele, Lea and Flood; the public-domain 64-bit
generator used to seed xoshiro), implemented on numpy uint64 arrays so one seed gives
the same stream on every platform. Uniform doubles take the top 53 bits of each word.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from src.log import get_logger
from src.Objects.ComplexMatrix import ComplexMatrix, as_real_matrix
from src.Objects.Errors import ContractViolation

logger = get_logger("MatrixGen")

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_EXACT_LIMIT = 2 ** 53


def derive_seed(seed: int, stream: int) -> int:
    """Independent sub-seed for one input of a trial"""
    return int(SplitMix64(seed * 1000003 + stream).next_u64(1)[0])


class SplitMix64:
    def __init__(self, seed: int):
        if int(seed) < 0:
            raise ContractViolation(f"seed must be a nonnegative 64-bit integer, got {seed}")
        self.state = int(seed) & _MASK64

    def next_u64(self, count: int) -> np.ndarray:
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * _GOLDEN
            z = (z ^ (z >> np.uint64(30))) * _MIX1
            z = (z ^ (z >> np.uint64(27))) * _MIX2
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + count * int(_GOLDEN)) & _MASK64
        return z

    def uniform01(self, count: int) -> np.ndarray:
        """Doubles k * 2^-53 in [0, 1)"""
        return (self.next_u64(count) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53

    def integers(self, count: int, lo: int, hi: int) -> List[int]:
        """Integers in [lo, hi] as Python ints (multiply-shift range reduction)"""
        span = int(hi) - int(lo) + 1
        return [int(lo) + ((int(w) * span) >> 64) for w in self.next_u64(count)]

    def permutation(self, n: int) -> np.ndarray:
        perm = np.arange(n)
        # Fisher-Yates, j uniform in [0, i]
        for i, w in zip(range(n - 1, 0, -1), self.next_u64(max(n - 1, 0))):
            j = (int(w) * (i + 1)) >> 64
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def signs(self, n: int) -> np.ndarray:
        bits = self.next_u64(n) >> np.uint64(63)
        return np.where(bits == 1, -1, 1).astype(np.int64)


# ---------------------------------------------------------------------------
# Random matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    kind: str = "uniform"
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        if self.kind not in ("uniform", "normal"):
            raise ContractViolation(f"unknown distribution '{self.kind}'")
        if self.kind == "uniform" and not self.lo < self.hi:
            raise ContractViolation(f"invalid range [{self.lo}, {self.hi}]")

    @classmethod
    def uniform(cls, lo: float = -1.0, hi: float = 1.0) -> "Distribution":
        return cls("uniform", float(lo), float(hi))

    @classmethod
    def normal(cls) -> "Distribution":
        return cls("normal", 0.0, 1.0)


def _draw(rng: SplitMix64, count: int, dist: Distribution) -> np.ndarray:
    if dist.kind == "uniform":
        return dist.lo + (dist.hi - dist.lo) * rng.uniform01(count)
    # Box-Muller; 1 - x is in (0, 1] so the log is finite
    u1 = 1.0 - rng.uniform01(count)
    u2 = rng.uniform01(count)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _check_shape(rows: int, cols: int) -> None:
    if rows < 1 or cols < 1:
        raise ContractViolation(f"matrix dimensions must be >= 1, got {rows}x{cols}")


def gen_random(rows: int, cols: int, dist: Distribution = Distribution(), seed: int = 0) -> np.ndarray:
    _check_shape(rows, cols)
    rng = SplitMix64(seed)
    return _draw(rng, rows * cols, dist).reshape(rows, cols)


def gen_random_complex(rows: int, cols: int, dist: Distribution = Distribution(), seed: int = 0) -> ComplexMatrix:
    """Real and imaginary parts are consecutive independent draws from one stream"""
    _check_shape(rows, cols)
    rng = SplitMix64(seed)
    re = _draw(rng, rows * cols, dist).reshape(rows, cols)
    im = _draw(rng, rows * cols, dist).reshape(rows, cols)
    return ComplexMatrix(re, im)


# ---------------------------------------------------------------------------
# Hadamard and conditioned matrices
# ---------------------------------------------------------------------------


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _sylvester(n: int) -> np.ndarray:
    H = np.ones((1, 1), dtype=np.int64)
    base = np.array([[1, 1], [1, -1]], dtype=np.int64)
    while H.shape[0] < n:
        H = np.kron(base, H)
    return H


def _hadamard(n: int, rng: SplitMix64) -> np.ndarray:
    H = _sylvester(n)
    H = H[rng.permutation(n)][:, rng.permutation(n)]
    return rng.signs(n)[:, None] * H * rng.signs(n)[None, :]


def gen_hadamard(n: int, seed: int = 0) -> np.ndarray:
    """Random signed permutation of the Sylvester Hadamard matrix; int64, H H^T = n I"""
    if not is_power_of_two(n) or n < 2:
        raise ContractViolation(f"Hadamard order must be a power of 2 (>= 2), got {n}")
    return _hadamard(n, SplitMix64(seed))


@dataclass(frozen=True)
class ConditionedSpec:
    n: int
    kappa: int
    seed: int = 0

    def __post_init__(self):
        if not is_power_of_two(int(self.n)) or int(self.n) < 2:
            raise ContractViolation(f"n must be a power of 2 (>= 2), got {self.n}")
        if int(self.kappa) != self.kappa or int(self.kappa) < 2:
            raise ContractViolation(f"kappa must be an integer >= 2, got {self.kappa}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "kappa", int(self.kappa))

    def is_exact(self) -> bool:
        """Whether every entry of H Lambda H^T is guaranteed to be a double"""
        return self.n * self.kappa * self.n < _EXACT_LIMIT


def _object_ints(arr) -> np.ndarray:
    out = np.empty(np.shape(arr), dtype=object)
    for idx, value in np.ndenumerate(np.asarray(arr)):
        out[idx] = int(value)
    return out


def conditioned_integers(H: np.ndarray, lam: List[int]) -> np.ndarray:
    """H diag(lam) H^T as an object array of Python ints"""
    Hobj = _object_ints(H)
    return np.dot(Hobj * np.array(lam, dtype=object)[None, :], Hobj.T)


def _to_doubles(X: np.ndarray) -> np.ndarray:
    # int -> float conversion rounds to nearest
    return np.array([float(x) for x in X.ravel()], dtype=np.float64).reshape(X.shape)


def _guard(spec: ConditionedSpec, strict: bool) -> None:
    if spec.is_exact():
        return
    if strict:
        raise ContractViolation(
            f"n={spec.n}, kappa={spec.kappa}: entries of the conditioned matrix may exceed 2^53"
        )
    logger.debug(f"n={spec.n} kappa={spec.kappa}: entries rounded to double, kappa is nominal")


def _diagonal(rng: SplitMix64, n: int, kappa: int, pinned: Tuple[int, int]) -> List[int]:
    lam = rng.integers(n, 1, kappa - 1)
    lam[pinned[0]] = 1
    lam[pinned[1]] = kappa
    return lam


def gen_conditioned_exact(spec: ConditionedSpec) -> Tuple[np.ndarray, List[int]]:
    """(exact integer X, diagonal) for X = H Lambda H^T"""
    rng = SplitMix64(spec.seed)
    H = _hadamard(spec.n, rng)
    order = rng.permutation(spec.n)
    lam = _diagonal(rng, spec.n, spec.kappa, (int(order[0]), int(order[1])))
    return conditioned_integers(H, lam), lam


def gen_conditioned(spec: ConditionedSpec, strict: bool = True) -> np.ndarray:
    """
    Symmetric integer matrix with 2-norm condition number exactly kappa.

    Singular values of X are n * Lambda_jj, so kappa_2(X) = kappa. With strict=True the
    generator refuses sizes whose entries might not be exact doubles.
    """
    _guard(spec, strict)
    X, _ = gen_conditioned_exact(spec)
    return _to_doubles(X)


def _complex_factors(spec: ConditionedSpec) -> Tuple[np.ndarray, List[int], List[int]]:
    rng = SplitMix64(spec.seed)
    H = _hadamard(spec.n, rng)
    order = rng.permutation(spec.n)
    # both parts pin 1 and kappa at the same two indices
    pinned = (int(order[0]), int(order[1]))
    lam_a = _diagonal(rng, spec.n, spec.kappa, pinned)
    lam_b = _diagonal(rng, spec.n, spec.kappa, pinned)
    return H, lam_a, lam_b


def gen_conditioned_complex_exact(spec: ConditionedSpec) -> Tuple[np.ndarray, np.ndarray]:
    H, lam_a, lam_b = _complex_factors(spec)
    return conditioned_integers(H, lam_a), conditioned_integers(H, lam_b)


def gen_conditioned_complex(
    n: int, kappa: int, seed: int = 0, strict: bool = True, fast: bool = False
) -> ComplexMatrix:
    """
    A + iB = H (Lambda_A + i Lambda_B) H^T with a shared H.

    Singular values are n |lambda_A,j + i lambda_B,j|, ranging over [n sqrt2, n sqrt2 kappa]
    with both ends attained, so kappa_2(A + iB) = kappa_2(A) = kappa_2(B) = kappa.
    """
    spec = ConditionedSpec(n, kappa, seed)
    _guard(spec, strict)
    if fast:
        # floating-point product, for timing runs at sizes the integer path cannot reach
        H, lam_a, lam_b = _complex_factors(spec)
        Hf = H.astype(np.float64)
        return ComplexMatrix(
            (Hf * np.array(lam_a, dtype=np.float64)) @ Hf.T,
            (Hf * np.array(lam_b, dtype=np.float64)) @ Hf.T,
        )
    A, B = gen_conditioned_complex_exact(spec)
    return ComplexMatrix(_to_doubles(A), _to_doubles(B))


# ---------------------------------------------------------------------------
# Unitary matrices
# ---------------------------------------------------------------------------


def householder_qr(Z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Complex Householder QR with diag(R) real and nonnegative"""
    R = np.array(Z, dtype=np.complex128)
    n = R.shape[0]
    Q = np.eye(n, dtype=np.complex128)
    for k in range(n):
        x = R[k:, k].copy()
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * norm_x
        v /= np.linalg.norm(v)
        R[k:, :] -= 2.0 * np.outer(v, v.conj() @ R[k:, :])
        Q[:, k:] -= 2.0 * np.outer(Q[:, k:] @ v, v.conj())
    d = np.diag(R).copy()
    mags = np.abs(d)
    fix = np.where(mags > 0, d / np.where(mags > 0, mags, 1.0), 1.0)
    Q = Q * fix[None, :]
    R = fix.conj()[:, None] * R
    return Q, R


def gen_unitary(n: int, seed: int = 0) -> ComplexMatrix:
    """Q factor of a matrix with entries U[0,1] + U[0,1]i"""
    if n < 1:
        raise ContractViolation(f"n must be >= 1, got {n}")
    Z = gen_random_complex(n, n, Distribution.uniform(0.0, 1.0), seed)
    Q, _ = householder_qr(Z.to_complex())
    return ComplexMatrix.from_complex(Q)


# ---------------------------------------------------------------------------
# Dense SVD oracle (one-sided Jacobi), small sizes only
# ---------------------------------------------------------------------------


def _jacobi_singular_values(M, tol: float = 1e-15, max_sweeps: int = 60) -> np.ndarray:
    """Singular values of a real or complex matrix, descending"""
    if isinstance(M, ComplexMatrix):
        M = M.to_complex()
    G = np.array(M, dtype=np.complex128)
    cols = G.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                alpha = np.vdot(G[:, p], G[:, p]).real
                beta = np.vdot(G[:, q], G[:, q]).real
                gamma = np.vdot(G[:, p], G[:, q])
                g = abs(gamma)
                if g <= tol * math.sqrt(alpha * beta) or g == 0.0:
                    continue
                rotated = True
                # unit phase on column q makes a_p^H a_q real and positive
                b = G[:, q] * (gamma.conjugate() / g)
                zeta = (beta - alpha) / (2.0 * g)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                a = G[:, p].copy()
                G[:, p] = c * a - s * b
                G[:, q] = s * a + c * b
        if not rotated:
            break
    return np.sort(np.linalg.norm(G, axis=0))[::-1]


def condition_number(M) -> float:
    sv = _jacobi_singular_values(M)
    return float(sv[0] / sv[-1])


# ---------------------------------------------------------------------------
# Scaling and text export
# ---------------------------------------------------------------------------


def power_of_two_scale(max_norm: float) -> float:
    """Largest 2^k <= max_norm"""
    if not max_norm > 0:
        raise ContractViolation(f"cannot scale by a nonpositive norm {max_norm}")
    mant, expo = math.frexp(max_norm)
    return math.ldexp(1.0, expo - 1)


def normalize(X: Union[np.ndarray, ComplexMatrix]) -> Union[np.ndarray, ComplexMatrix]:
    """Divide by a power of two close to the max-norm; exact in binary floating point"""
    if isinstance(X, ComplexMatrix):
        return X.scale(1.0 / power_of_two_scale(X.max_norm()))
    X = as_real_matrix(X)
    return X / power_of_two_scale(float(np.abs(X).max()))


def save_matrix_text(path: str, M: Union[np.ndarray, ComplexMatrix]) -> None:
    """Header 'rows cols real|complex', then one row per line"""
    if isinstance(M, ComplexMatrix):
        lines = [f"{M.rows} {M.cols} complex"]
        for re_row, im_row in zip(M.re, M.im):
            lines.append(" ".join(f"{float(a)!r},{float(b)!r}" for a, b in zip(re_row, im_row)))
    else:
        M = as_real_matrix(M)
        lines = [f"{M.shape[0]} {M.shape[1]} real"]
        for row in M:
            lines.append(" ".join(repr(float(a)) for a in row))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def load_matrix_text(path: str) -> Union[np.ndarray, ComplexMatrix]:
    with open(path) as f:
        lines = [line.strip() for line in f if line.strip()]
    if not lines:
        raise ContractViolation(f"{path}: empty matrix file")
    try:
        rows_s, cols_s, kind = lines[0].split()
        rows, cols = int(rows_s), int(cols_s)
    except ValueError:
        raise ContractViolation(f"{path}: bad header '{lines[0]}'") from None
    body = lines[1:]
    if len(body) != rows:
        raise ContractViolation(f"{path}: expected {rows} rows, found {len(body)}")
    if kind == "real":
        M = np.array([[float(x) for x in line.split()] for line in body])
        if M.shape != (rows, cols):
            raise ContractViolation(f"{path}: expected shape {(rows, cols)}, found {M.shape}")
        return M
    if kind == "complex":
        pairs = [[tuple(float(p) for p in x.split(",")) for x in line.split()] for line in body]
        re = np.array([[a for a, _ in row] for row in pairs])
        im = np.array([[b for _, b in row] for row in pairs])
        if re.shape != (rows, cols):
            raise ContractViolation(f"{path}: expected shape {(rows, cols)}, found {re.shape}")
        return ComplexMatrix(re, im)
    raise ContractViolation(f"{path}: unknown matrix kind '{kind}'")

"""
Real and complex-element matrix multiplication.

multiply_conventional is the inner-product algorithm; multiply_recursive applies any
decomposition of the 2x2 matrix multiplication tensor recursively on 2x2 block partitions.
Complex-element matrices are carried as stacked (2, rows, cols) arrays so the block
linear combinations act on both parts with the same operations.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from src.log import get_logger
from src.settings import DEFAULT_CUTOFF

from src.Objects.BilinearDecomposition import BilinearDecomposition
from src.Objects.ComplexMatrix import ComplexMatrix, as_real_matrix
from src.Objects.Errors import ContractViolation

logger = get_logger("MatMul")

BLOCK_DIMS = (4, 4, 4)


class Padding(Enum):
    PAD_EVEN_PER_LEVEL = "pad_even_per_level"


class Kernel(Enum):
    # rank-1 updates, every entry accumulated strictly left to right
    ORDERED = "ordered"
    # numpy.matmul; summation order is up to the BLAS library
    BLAS = "blas"


@dataclass(frozen=True)
class RecursionPolicy:
    cutoff: int = DEFAULT_CUTOFF
    padding: Padding = Padding.PAD_EVEN_PER_LEVEL
    kernel: Kernel = Kernel.ORDERED

    def __post_init__(self):
        if int(self.cutoff) < 1:
            raise ContractViolation(f"cutoff must be >= 1, got {self.cutoff}")
        object.__setattr__(self, "cutoff", int(self.cutoff))
        if isinstance(self.padding, str):
            object.__setattr__(self, "padding", Padding(self.padding))
        if isinstance(self.kernel, str):
            object.__setattr__(self, "kernel", Kernel(self.kernel))


# ---------------------------------------------------------------------------
# Base kernels. Real operands are (r, c); complex-element operands are (2, r, c).
# ---------------------------------------------------------------------------


def _kernel_real(A: np.ndarray, B: np.ndarray, kernel: Kernel) -> np.ndarray:
    if kernel is Kernel.BLAS:
        return np.matmul(A, B)
    C = np.zeros((A.shape[0], B.shape[1]))
    for k in range(A.shape[1]):
        C += A[:, k : k + 1] * B[k : k + 1, :]
    return C


def _kernel_complex(X: np.ndarray, Y: np.ndarray, kernel: Kernel) -> np.ndarray:
    ar, ai = X[0], X[1]
    br, bi = Y[0], Y[1]
    if kernel is Kernel.BLAS:
        return np.stack([ar @ br - ai @ bi, ar @ bi + ai @ br])
    cr = np.zeros((ar.shape[0], br.shape[1]))
    ci = np.zeros_like(cr)
    for k in range(ar.shape[1]):
        # (a + bi)(c + di) = (ac - bd) + (ad + bc)i, four multiplies and two adds
        ar_k, ai_k = ar[:, k : k + 1], ai[:, k : k + 1]
        br_k, bi_k = br[k : k + 1, :], bi[k : k + 1, :]
        cr += ar_k * br_k - ai_k * bi_k
        ci += ar_k * bi_k + ai_k * br_k
    return np.stack([cr, ci])


def _base(X: np.ndarray, Y: np.ndarray, kernel: Kernel) -> np.ndarray:
    if X.ndim == 3:
        return _kernel_complex(X, Y, kernel)
    return _kernel_real(X, Y, kernel)


# ---------------------------------------------------------------------------
# Recursion
# ---------------------------------------------------------------------------


def _pad_even(X: np.ndarray) -> np.ndarray:
    rows, cols = X.shape[-2:]
    pad_r, pad_c = rows % 2, cols % 2
    if not (pad_r or pad_c):
        return X
    widths = [(0, 0)] * (X.ndim - 2) + [(0, pad_r), (0, pad_c)]
    return np.pad(X, widths)


def _blocks(X: np.ndarray):
    """Row-major 2x2 block partition (X11, X12, X21, X22)"""
    h, w = X.shape[-2] // 2, X.shape[-1] // 2
    return (
        X[..., :h, :w],
        X[..., :h, w:],
        X[..., h:, :w],
        X[..., h:, w:],
    )


def _combine(coeffs: np.ndarray, blocks) -> Optional[np.ndarray]:
    """sum_j coeffs[j] * blocks[j], formed left to right over the nonzero coefficients"""
    acc = None
    for c, blk in zip(coeffs, blocks):
        if c == 0.0:
            continue
        if c == 1.0:
            term = blk
        elif c == -1.0:
            term = -blk
        else:
            term = c * blk
        acc = term.copy() if acc is None else acc + term
    return acc


def _recurse(X: np.ndarray, Y: np.ndarray, D: BilinearDecomposition, policy: RecursionPolicy, depth: int) -> np.ndarray:
    rows, inner = X.shape[-2:]
    cols = Y.shape[-1]
    if max(rows, inner, cols) <= policy.cutoff:
        return _base(X, Y, policy.kernel)

    Xp, Yp = _pad_even(X), _pad_even(Y)
    X_blocks, Y_blocks = _blocks(Xp), _blocks(Yp)
    U, V, W = D.float_terms

    products = []
    for i in range(D.rank):
        S = _combine(U[i], X_blocks)
        T = _combine(V[i], Y_blocks)
        products.append(_recurse(S, T, D, policy, depth + 1))

    out_blocks = []
    for l in range(4):
        Z = _combine(W[:, l], products)
        if Z is None:
            Z = np.zeros_like(products[0])
        out_blocks.append(Z)
    top = np.concatenate(out_blocks[:2], axis=-1)
    bottom = np.concatenate(out_blocks[2:], axis=-1)
    Z = np.concatenate([top, bottom], axis=-2)
    return Z[..., :rows, :cols]


def _check_block_decomposition(D: BilinearDecomposition) -> None:
    if D.dims != BLOCK_DIMS:
        raise ContractViolation(
            f"{D.name} has dims {D.dims}; recursive multiplication needs a 2x2 block decomposition {BLOCK_DIMS}"
        )


def _check_inner(a_shape, b_shape) -> None:
    if a_shape[-1] != b_shape[-2]:
        raise ContractViolation(f"inner dimensions differ: {tuple(a_shape[-2:])} x {tuple(b_shape[-2:])}")


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def multiply_conventional(A, B, kernel: Kernel = Kernel.ORDERED) -> np.ndarray:
    A = as_real_matrix(A, "A")
    B = as_real_matrix(B, "B")
    _check_inner(A.shape, B.shape)
    return _kernel_real(A, B, Kernel(kernel))


def multiply_recursive(A, B, D: BilinearDecomposition, policy: RecursionPolicy = RecursionPolicy()) -> np.ndarray:
    A = as_real_matrix(A, "A")
    B = as_real_matrix(B, "B")
    _check_inner(A.shape, B.shape)
    _check_block_decomposition(D)
    logger.debug(f"{D.name} {A.shape} x {B.shape} cutoff={policy.cutoff} kernel={policy.kernel.value}")
    return _recurse(A, B, D, policy, 0)


def multiply_complex_elements(
    X: ComplexMatrix,
    Y: ComplexMatrix,
    D: Optional[BilinearDecomposition] = None,
    policy: RecursionPolicy = RecursionPolicy(),
) -> ComplexMatrix:
    """Complex-element product; D=None runs the conventional algorithm"""
    _check_inner(X.shape, Y.shape)
    Xs, Ys = X.stacked(), Y.stacked()
    if D is None:
        return ComplexMatrix.from_stacked(_kernel_complex(Xs, Ys, policy.kernel))
    _check_block_decomposition(D)
    logger.debug(f"{D.name} complex {X.shape} x {Y.shape} cutoff={policy.cutoff}")
    return ComplexMatrix.from_stacked(_recurse(Xs, Ys, D, policy, 0))


def recursion_levels(n: int, cutoff: int) -> int:
    """Number of block levels multiply_recursive uses on an n x n product"""
    levels = 0
    while n > cutoff:
        n = (n + 1) // 2
        levels += 1
    return levels

import numpy as np
import pytest

from src.Objects.ComplexMatrix import ComplexMatrix, complex_relu, complex_relu_scalar
from src.Objects.Errors import ContractViolation
from src.Services.ComplexMatMul import (
    BackendKind,
    CmmAlgorithm,
    CmmScheme,
    RealBackend,
    blas_algorithm,
    cmm,
    cmm_exact,
    parse_scheme,
    product_count,
)
from src.Services.MatMul import RecursionPolicy

SCHEMES = ["regular", "gauss", "new"]


def _int_complex(rng, rows, cols):
    return ComplexMatrix(
        rng.integers(-5, 6, size=(rows, cols)).astype(np.float64),
        rng.integers(-5, 6, size=(rows, cols)).astype(np.float64),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(99)


@pytest.mark.parametrize("scheme", ["regular", "gauss"])
def test_integer_schemes_are_exact(rng, scheme):
    X, Y = _int_complex(rng, 6, 4), _int_complex(rng, 4, 5)
    Z = cmm(X, Y, scheme)
    np.testing.assert_array_equal(Z.to_complex(), X.to_complex() @ Y.to_complex())


@pytest.mark.parametrize("scheme", SCHEMES)
def test_schemes_close_on_random(rng, scheme):
    X = ComplexMatrix(rng.uniform(-1, 1, (16, 16)), rng.uniform(-1, 1, (16, 16)))
    Y = ComplexMatrix(rng.uniform(-1, 1, (16, 16)), rng.uniform(-1, 1, (16, 16)))
    Z = cmm(X, Y, scheme)
    np.testing.assert_allclose(Z.to_complex(), X.to_complex() @ Y.to_complex(), atol=1e-13)


@pytest.mark.parametrize("scheme", SCHEMES)
def test_exact_mode_reproduces_the_product(rng, scheme):
    X, Y = _int_complex(rng, 3, 3), _int_complex(rng, 3, 3)
    real, imag = cmm_exact(X, Y, scheme)
    expected = X.to_complex() @ Y.to_complex()
    for i in range(3):
        for j in range(3):
            assert real[i, j] == int(expected[i, j].real)
            assert imag[i, j] == int(expected[i, j].imag)
            assert real[i, j].is_rational() and imag[i, j].is_rational()


@pytest.mark.parametrize("scheme, count", [("regular", 4), ("gauss", 3), ("new", 3)])
def test_real_product_count(rng, scheme, count):
    X, Y = _int_complex(rng, 4, 4), _int_complex(rng, 4, 4)
    calls = []

    def counting(A, B):
        calls.append((A.shape, B.shape))
        return A @ B

    cmm(X, Y, scheme, matmul=counting)
    assert len(calls) == count == product_count(scheme)


def test_new_scheme_real_part_association():
    # 1 x 1 case: (a + bi)(c + di) with the real part ((P1 + P2) - (8/3) BD) / 2
    a, b, c, d = 0.3, -0.7, 0.9, 0.1
    s = 1.0 / np.sqrt(3.0)
    P1 = (a + b * s) * (c + d * s)
    P2 = (a - b * s) * (c - d * s)
    P3 = b * d
    X = ComplexMatrix(np.array([[a]]), np.array([[b]]))
    Y = ComplexMatrix(np.array([[c]]), np.array([[d]]))
    Z = cmm(X, Y, "new")
    assert Z.re[0, 0] == ((P1 + P2) - P3 * (8.0 / 3.0)) * 0.5
    assert Z.im[0, 0] == (P1 - P2) * (np.sqrt(3.0) / 2.0)


@pytest.mark.parametrize("scheme", ["regular", "new"])
def test_conjugation_symmetry(rng, scheme):
    X = ComplexMatrix(rng.uniform(-1, 1, (8, 8)), rng.uniform(-1, 1, (8, 8)))
    Y = ComplexMatrix(rng.uniform(-1, 1, (8, 8)), rng.uniform(-1, 1, (8, 8)))
    assert cmm(X.conj(), Y.conj(), scheme).bitwise_equal(cmm(X, Y, scheme).conj())


def test_gauss_real_part_is_the_regular_real_part(rng):
    X = ComplexMatrix(rng.uniform(-1, 1, (16, 16)), rng.uniform(-1, 1, (16, 16)))
    Y = ComplexMatrix(rng.uniform(-1, 1, (16, 16)), rng.uniform(-1, 1, (16, 16)))
    for regular, gauss in (("regular", "gauss"), (blas_algorithm("regular"), blas_algorithm("gauss"))):
        np.testing.assert_array_equal(cmm(X, Y, gauss).re, cmm(X, Y, regular).re)


def test_new_scheme_squares_one_plus_i():
    X = ComplexMatrix(np.array([[1.0]]), np.array([[1.0]]))
    Z = cmm(X, X, "new")
    assert abs(Z.re[0, 0]) <= 4 * 2.0 ** -53
    assert abs(Z.im[0, 0] - 2.0) <= 4 * 2.0 ** -53


def test_identity_times_y_is_y(rng):
    Y = ComplexMatrix(rng.uniform(-1, 1, (8, 8)), rng.uniform(-1, 1, (8, 8)))
    assert cmm(ComplexMatrix.identity(8), Y, "regular").bitwise_equal(Y)


def test_recursive_backend(rng):
    X, Y = _int_complex(rng, 8, 8), _int_complex(rng, 8, 8)
    algo = CmmAlgorithm("gauss", RealBackend(BackendKind.STRASSEN, RecursionPolicy(cutoff=2)))
    np.testing.assert_array_equal(cmm(X, Y, algo).to_complex(), X.to_complex() @ Y.to_complex())


def test_blas_algorithm(rng):
    X = ComplexMatrix(rng.uniform(-1, 1, (8, 8)), rng.uniform(-1, 1, (8, 8)))
    Z = cmm(X, X, blas_algorithm("new"))
    np.testing.assert_allclose(Z.to_complex(), X.to_complex() @ X.to_complex(), atol=1e-13)


def test_unknown_scheme():
    with pytest.raises(ContractViolation, match="unknown complex multiplication"):
        parse_scheme("karatsuba")
    assert parse_scheme(" NEW ") is CmmScheme.NEW


def test_shape_mismatch():
    with pytest.raises(ContractViolation):
        cmm(ComplexMatrix.identity(3), ComplexMatrix.identity(4), "gauss")


def test_complex_matrix_parts_must_agree():
    with pytest.raises(ContractViolation):
        ComplexMatrix(np.zeros((2, 2)), np.zeros((2, 3)))


def test_complex_relu():
    z = ComplexMatrix(np.array([[1.5, -2.0], [-0.0, 0.0]]), np.array([[-1.0, 3.0], [2.0, -4.0]]))
    r = complex_relu(z)
    np.testing.assert_array_equal(r.re, [[1.5, 0.0], [0.0, 0.0]])
    np.testing.assert_array_equal(r.im, [[0.0, 3.0], [2.0, 0.0]])
    assert not np.signbit(r.re).any()
    assert complex_relu_scalar(complex(-1.0, 2.0)) == complex(0.0, 2.0)


def test_complex_matrix_roundtrip():
    z = np.array([[1 + 2j, -3j], [0.5, 4 - 1j]])
    X = ComplexMatrix.from_complex(z)
    np.testing.assert_array_equal(X.to_complex(), z)
    assert X.max_norm() == 4.0
    assert X.conj().bitwise_equal(ComplexMatrix.from_complex(z.conj()))

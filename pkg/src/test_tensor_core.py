"""
Exact coefficients, decompositions, evaluation and growth factors.
"""

import json
import math
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np
import pytest

from src.Objects.BilinearDecomposition import (
    BilinearDecomposition,
    NormSpec,
    Term,
    evaluate,
    evaluate_many,
    growth_factor,
    growth_factor_decimal,
    materialize_tensor,
    tensor_from_entries,
    verify_decomposition,
)
from src.Objects.Errors import ContractViolation, DecompositionFormatError
from src.Objects.ExactCoefficient import ExactCoefficient
from src.Services import Catalog

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


# ===================================================================
# Q(sqrt 3)
# ===================================================================


def test_sqrt3_squares_to_three():
    r = ExactCoefficient.sqrt3()
    assert r * r == 3
    assert (r * r).is_rational()


def test_field_arithmetic():
    x = ExactCoefficient(1, 1)  # 1 + sqrt3
    y = ExactCoefficient(1, -1)  # 1 - sqrt3
    assert x * y == -2
    assert x + y == 2
    assert x - y == ExactCoefficient.sqrt3(2)
    assert (x / y) * y == x
    assert 1 - x == ExactCoefficient(0, -1)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ExactCoefficient(1) / ExactCoefficient(0)


def test_float_view_is_correctly_rounded():
    assert ExactCoefficient.sqrt3(Fraction(1, 2)).float_view == SQRT3 / 2.0
    assert ExactCoefficient(Fraction(2, 3)).float_view == 2.0 / 3.0
    assert ExactCoefficient(Fraction(1, 10)).float_view == 0.1


def test_to_decimal_precision():
    d = ExactCoefficient.sqrt3().to_decimal(50)
    assert str(d).startswith("1.7320508075688772935274463415058723669428052538")


def test_bool_is_not_a_coefficient():
    with pytest.raises(ContractViolation):
        ExactCoefficient.of(True)


# ===================================================================
# Decomposition construction
# ===================================================================


def _tiny():
    # (x . e1)(y . e1) e1 on R^1 x R^1 -> R^1
    return BilinearDecomposition("scalar", (1, 1, 1), (Term((1,), (1,), (1,)),))


def test_term_lengths_are_checked():
    with pytest.raises(ContractViolation, match="length"):
        BilinearDecomposition("bad", (2, 2, 2), (Term((1, 0, 0), (1, 0), (1, 0)),))


def test_zero_triple_rejected():
    with pytest.raises(ContractViolation, match="zero triple"):
        BilinearDecomposition("bad", (2, 2, 2), (Term((0, 0), (1, 0), (1, 0)),))


def test_empty_decomposition_rejected():
    with pytest.raises(ContractViolation):
        BilinearDecomposition("bad", (2, 2, 2), ())


def test_dims_must_be_positive():
    with pytest.raises(ContractViolation):
        BilinearDecomposition("bad", (0, 1, 1), (Term((), (1,), (1,)),))


def test_rank_is_term_count():
    assert _tiny().rank == 1
    assert Catalog.strassen_2x2().rank == 7


# ===================================================================
# JSON format
# ===================================================================


def test_json_roundtrip_keeps_exact_coefficients(tmp_path):
    D = Catalog.complex_new()
    path = tmp_path / "new.json"
    D.save(str(path))
    loaded = BilinearDecomposition.load(str(path))
    assert loaded.dims == D.dims
    assert [t for t in loaded.terms] == [t for t in D.terms]
    assert verify_decomposition(loaded, Catalog.complex_mult_tensor())


def test_decimal_text_parses_as_exact_rational():
    raw = {"name": "tenth", "dims": [1, 1, 1], "terms": [{"u": [0.1], "v": [1], "w": [10]}]}
    D = BilinearDecomposition.from_json(json.dumps(raw))
    assert D.terms[0].u[0] == Fraction(1, 10)
    assert D.terms[0].u[0] * D.terms[0].w[0] == 1


def test_malformed_json():
    with pytest.raises(DecompositionFormatError):
        BilinearDecomposition.from_json("{")
    with pytest.raises(DecompositionFormatError):
        BilinearDecomposition.from_json('{"name": "x"}')


def test_format_error_is_a_contract_violation():
    with pytest.raises(ContractViolation):
        BilinearDecomposition.from_json('{"name": "x", "dims": [1, 1, 1], "terms": [{"u": [1]}]}')


# ===================================================================
# Evaluation
# ===================================================================


def test_evaluate_conventional_matches_matmul():
    D = Catalog.conventional_mm(2, 3, 2)
    A = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    B = np.array([[7.0, 8.0], [9.0, 10.0], [11.0, 12.0]])
    np.testing.assert_array_equal(evaluate(D, A.ravel(), B.ravel()), (A @ B).ravel())


def test_evaluate_strassen_on_integers_is_exact():
    A = np.array([[1.0, -2.0], [3.0, 4.0]])
    B = np.array([[5.0, 6.0], [-7.0, 8.0]])
    out = evaluate(Catalog.strassen_2x2(), A.ravel(), B.ravel())
    np.testing.assert_array_equal(out, (A @ B).ravel())


def test_evaluate_complex_schemes():
    # (1 + 2i)(3 - i) = 5 + 5i
    for D in (Catalog.complex_regular(), Catalog.complex_gauss()):
        np.testing.assert_array_equal(evaluate(D, [1.0, 2.0], [3.0, -1.0]), [5.0, 5.0])
    np.testing.assert_allclose(evaluate(Catalog.complex_new(), [1.0, 2.0], [3.0, -1.0]), [5.0, 5.0], rtol=1e-14)


def test_evaluate_length_mismatch():
    with pytest.raises(ContractViolation):
        evaluate(Catalog.complex_gauss(), [1.0, 2.0, 3.0], [1.0, 0.0])


def test_evaluate_many_matches_evaluate_bitwise():
    rng = np.random.default_rng(7)
    us = rng.standard_normal((50, 2))
    vs = rng.standard_normal((50, 2))
    for name in ("complex_regular", "complex_gauss", "complex_new"):
        D = Catalog.get_builtin(name).decomposition
        batch = evaluate_many(D, us, vs)
        for row in range(us.shape[0]):
            np.testing.assert_array_equal(batch[row], evaluate(D, us[row], vs[row]))


def test_evaluate_many_batch_mismatch():
    with pytest.raises(ContractViolation):
        evaluate_many(Catalog.complex_gauss(), np.ones((3, 2)), np.ones((4, 2)))


# ===================================================================
# Growth factor
# ===================================================================


@pytest.mark.parametrize(
    "name, expected",
    [
        ("strassen_2x2", 12 + 2 * SQRT2),
        ("winograd_2x2", 7 + 4 * SQRT2 + 3 * SQRT3),
        ("conventional_2x2", 8.0),
        ("complex_regular", 4.0),
        ("complex_gauss", 2 * (1 + SQRT2)),
        ("complex_new", 4.0),
    ],
)
def test_growth_factor(name, expected):
    D = Catalog.get_builtin(name).decomposition
    assert growth_factor(D) == pytest.approx(expected, rel=1e-14)


def test_growth_factor_decimal_agrees():
    D = Catalog.winograd_2x2()
    with localcontext() as ctx:
        ctx.prec = 60
        exact = Decimal(7) + 4 * Decimal(2).sqrt() + 3 * Decimal(3).sqrt()
    assert abs(growth_factor_decimal(D, 40) - exact) < Decimal("1e-30")
    assert float(growth_factor_decimal(D)) == pytest.approx(growth_factor(D), rel=1e-15)


def test_growth_factor_norm_spec():
    assert growth_factor(_tiny(), NormSpec.EUCLIDEAN) == 1.0


# ===================================================================
# Tensors
# ===================================================================


def test_materialize_strassen_is_matmul_tensor():
    assert materialize_tensor(Catalog.strassen_2x2()) == Catalog.matmul_tensor(2, 2, 2)


def test_verify_rejects_a_wrong_decomposition():
    D = Catalog.complex_gauss()
    t = D.terms[0]
    broken = D.with_terms((Term(t.u, t.v, (0, 2)),) + D.terms[1:], name="broken")
    assert not verify_decomposition(broken, Catalog.complex_mult_tensor())


def test_verify_dims_mismatch():
    with pytest.raises(ContractViolation):
        verify_decomposition(Catalog.complex_gauss(), Catalog.matmul_tensor(2, 2, 2))


def test_tensor_from_entries_nonzero():
    T = tensor_from_entries((2, 2, 2), {(0, 0, 0): 1, (1, 1, 0): -1})
    assert T.nonzero() == {(0, 0, 0): ExactCoefficient(1), (1, 1, 0): ExactCoefficient(-1)}
    assert T.to_float_array()[1, 1, 0] == -1.0


# ===================================================================
# Invariants
# ===================================================================


@pytest.mark.parametrize("name", Catalog.BUILTIN_NAMES)
def test_growth_factor_ignores_term_order(name):
    D = Catalog.get_builtin(name).decomposition
    shuffled = D.with_terms(tuple(reversed(D.terms)))
    assert growth_factor(shuffled) == pytest.approx(growth_factor(D), rel=1e-14)
    assert materialize_tensor(shuffled) == materialize_tensor(D)


@pytest.mark.parametrize("name", Catalog.BUILTIN_NAMES)
def test_growth_factor_ignores_sign_pairs(name):
    entry = Catalog.get_builtin(name)
    D = entry.decomposition
    t = D.terms[0]
    flipped = D.with_terms((Term(tuple(-c for c in t.u), tuple(-c for c in t.v), t.w),) + D.terms[1:])
    assert growth_factor(flipped) == growth_factor(D)
    assert verify_decomposition(flipped, entry.reference())


@pytest.mark.parametrize("name", Catalog.BUILTIN_NAMES)
def test_evaluate_on_basis_pairs(name):
    entry = Catalog.get_builtin(name)
    D = entry.decomposition
    T = entry.reference().to_float_array()
    m, n, _ = D.dims
    for j in range(m):
        for k in range(n):
            out = evaluate(D, np.eye(m)[j], np.eye(n)[k])
            # unit inputs, so ulps are taken at scale 1
            tol = 4 * np.spacing(np.maximum(np.abs(T[j, k]), 1.0))
            assert np.all(np.abs(out - T[j, k]) <= tol)


def test_evaluate_is_bilinear():
    D = Catalog.strassen_2x2()
    x1, x2 = np.array([1.0, -2.0, 3.0, 0.0]), np.array([4.0, 1.0, -1.0, 2.0])
    y1, y2 = np.array([2.0, 5.0, -3.0, 1.0]), np.array([-1.0, 0.0, 2.0, 6.0])
    np.testing.assert_array_equal(evaluate(D, 2 * x1 + 3 * x2, y1), 2 * evaluate(D, x1, y1) + 3 * evaluate(D, x2, y1))
    np.testing.assert_array_equal(evaluate(D, x1, 2 * y1 - y2), 2 * evaluate(D, x1, y1) - evaluate(D, x1, y2))

"""
Experiment runners at toy sizes, plus the desk-scale reproductions (marked slow).
"""

import json

import numpy as np
import pandas as pd
import pytest

from src import settings
from src.Objects.ComplexMatrix import ComplexMatrix
from src.Objects.Errors import ContractViolation, OracleInfeasible
from src.Objects.ExactMatrix import ExactComplexMatrix, ExactMatrix
from src.Objects.ExperimentConfig import ExperimentConfig, ExperimentKind, ExperimentRecord, default_kappas
from src.Objects.ExperimentMetrics import ExperimentMetrics, ordering_fractions, ordering_holds
from src.Services import Experiments
from src.Services.ComplexMatMul import blas_algorithm


def _cfg(experiment, **kw):
    kw.setdefault("trials", 1)
    return ExperimentConfig(experiment=experiment, **kw)


# ===================================================================
# Configuration and records
# ===================================================================


def test_config_coerces_and_defaults():
    cfg = _cfg("cmm_accuracy", n=8, kappa_list=(16,))
    assert cfg.experiment is ExperimentKind.CMM_ACCURACY
    assert cfg.algos == ("regular", "gauss", "new")
    assert _cfg("fmm_accuracy", n=16).algos == ("conventional", "strassen", "winograd")
    assert cfg.to_dict()["experiment"] == "cmm_accuracy"


@pytest.mark.parametrize(
    "kwargs",
    [
        {"experiment": "cmm_accuracy", "n": 12},
        {"experiment": "cmm_accuracy", "n": 8, "algos": ("strassen",)},
        {"experiment": "cmm_accuracy", "n": 8, "kappa_list": (1,)},
        {"experiment": "cmm_accuracy", "n": 8, "timing_only": True},
        {"experiment": "fmm_accuracy", "n": 8, "dist": "cauchy"},
        {"experiment": "cmm_accuracy", "n": 8, "trials": 0},
        {"experiment": "cmm_accuracy", "n": 8, "backend": "karatsuba"},
        {"experiment": "nonsense"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ContractViolation):
        ExperimentConfig(**kwargs)


def test_record_validation():
    with pytest.raises(ContractViolation):
        ExperimentRecord("cmm_accuracy", "new", 8, 16, 0, -1.0, 0.1)
    rec = ExperimentRecord("cmm_accuracy", "new", 8, 16, 0, 1e-16, 0.1, bound=1e-15)
    assert rec.within_bound
    assert list(rec.to_row()) == settings.CSV_COLUMNS


def test_oracle_cap():
    cfg = _cfg("cmm_accuracy", n=256, kappa_list=(16,))
    with pytest.raises(OracleInfeasible):
        Experiments.run_experiment(cfg)


# ===================================================================
# Runners
# ===================================================================


def test_fmm_accuracy_small():
    cfg = _cfg("fmm_accuracy", n=16, cutoff=2)
    records = Experiments.run_experiment(cfg)
    assert [r.algorithm for r in records] == ["conventional", "strassen", "winograd"]
    conventional = records[0]
    assert conventional.bound is not None
    assert conventional.rel_error <= conventional.bound
    assert all(r.rel_error > 0 for r in records)


def test_fmm_complex_inputs():
    records = Experiments.run_experiment(_cfg("fmm_accuracy", n=8, cutoff=2, dist="complex", algos=("strassen",)))
    assert len(records) == 1
    assert records[0].rel_error < 1e-13


def test_cmm_accuracy_small():
    cfg = _cfg("cmm_accuracy", n=8, kappa_list=(16, 2 ** 10), trials=2)
    records = Experiments.run_experiment(cfg)
    assert len(records) == 2 * 2 * 3
    for rec in records:
        assert not rec.flagged
        assert rec.rel_error < 1e-13
        assert rec.within_bound


def test_inexact_conditioned_inputs_are_flagged():
    cfg = _cfg("cmm_accuracy", n=8, kappa_list=(2 ** 50,), algos=("new",))
    (rec,) = Experiments.run_experiment(cfg)
    assert rec.flagged
    assert rec.kappa == 2 ** 50


def test_runs_are_reproducible():
    cfg = _cfg("cmm_accuracy", n=8, kappa_list=(2 ** 12,), trials=2)
    first = [r.rel_error for r in Experiments.run_experiment(cfg)]
    second = [r.rel_error for r in Experiments.run_experiment(cfg)]
    assert first == second


def test_cmm_speed_records_time_only():
    records = Experiments.run_experiment(_cfg("cmm_speed", n=16))
    assert {r.algorithm for r in records} == {"regular", "gauss", "new"}
    assert all(r.rel_error is None and r.wall_time_s >= 0 for r in records)


def test_horner_identity():
    coeffs = [0.5, 0.25, 0.125]
    I = ComplexMatrix.identity(4)
    P = Experiments.horner(I, coeffs, blas_algorithm("gauss"))
    np.testing.assert_array_equal(P.re, 0.875 * np.eye(4))
    exact = Experiments.horner_exact(ExactComplexMatrix.from_complex_matrix(I), coeffs)
    assert exact.re == ExactMatrix.identity(4, 0.875)


def test_horner_multiplies_pure_powers(monkeypatch):
    X = ComplexMatrix.from_complex(np.array([[0.5, 0.25 + 1j], [0.125, 2.0]]))
    algo = blas_algorithm("regular")
    real_cmm = Experiments.cmm
    calls = []

    def recording_cmm(A, B, algorithm):
        calls.append((A, B))
        return real_cmm(A, B, algorithm)

    monkeypatch.setattr(Experiments, "cmm", recording_cmm)
    Experiments.horner(X, [0.1, 0.2, 0.3, 0.4, 0.5, 0.6], algo)
    assert len(calls) == 4
    power = X
    for left, right in calls:
        assert left.bitwise_equal(power)
        assert right.bitwise_equal(X)
        power = real_cmm(power, X, algo)


def test_horner_low_degrees():
    X = ComplexMatrix.from_complex(np.array([[1.0, 2j], [-1.0, 3.0]]))
    algo = blas_algorithm("new")
    np.testing.assert_array_equal(Experiments.horner(X, [0.5], algo).re, 0.5 * np.eye(2))
    P = Experiments.horner(X, [0.5, 0.25], algo)
    np.testing.assert_array_equal(P.re, 0.5 * np.eye(2) + 0.25 * X.re)
    np.testing.assert_array_equal(P.im, 0.25 * X.im)


def test_horner_matches_exact_on_integers():
    X = ComplexMatrix.from_complex(np.array([[1.0, 2 - 1j], [-3.0 + 1j, 2.0]]))
    coeffs = [0.5, 0.25, 0.125, 0.0625]
    P = Experiments.horner(X, coeffs, blas_algorithm("regular"))
    exact = Experiments.horner_exact(ExactComplexMatrix.from_complex_matrix(X), coeffs)
    assert ExactComplexMatrix.from_complex_matrix(P) == exact


def test_horner_coefficients():
    coeffs = Experiments.horner_coefficients(5, seed=1)
    assert len(coeffs) == 6
    assert all(0.0 < a < 1.0 for a in coeffs)
    assert coeffs == Experiments.horner_coefficients(5, seed=1)


def test_horner_coefficients_redraw_zero(monkeypatch):
    draws = iter([np.array([0.0, 0.5, 0.25]), np.array([0.75])])

    class FixedStream:
        def __init__(self, seed):
            pass

        def uniform01(self, count):
            return next(draws)[:count]

    monkeypatch.setattr(Experiments, "SplitMix64", FixedStream)
    assert Experiments.horner_coefficients(2, seed=0) == [0.5, 0.25, 0.75]


def test_horner_small():
    records = Experiments.run_experiment(_cfg("horner", n=4, degree=3, kappa_list=(16,)))
    assert len(records) == 3
    assert all(r.rel_error is not None and r.extras["degree"] == 3 for r in records)


def test_horner_timing_only():
    records = Experiments.run_experiment(_cfg("horner", n=4, kappa_list=(16,), timing_only=True))
    assert all(r.rel_error is None for r in records)


def test_unitary_small():
    records = Experiments.run_experiment(_cfg("unitary", n=8, kappa_list=(64,)))
    assert len(records) == 3
    for rec in records:
        assert rec.extras["kappa_U"] == pytest.approx(1.0, abs=1e-12)
        assert rec.within_bound


def test_unitary_identity_transform_is_exact():
    records = Experiments.run_experiment(
        _cfg("unitary", n=8, kappa_list=(64,), identity_transform=True, algos=("regular", "gauss"))
    )
    assert all(r.rel_error == 0.0 for r in records)


def test_cnn_small():
    records = Experiments.run_experiment(_cfg("cnn", n=4, depth=2, batch=3, kappa_list=(16,)))
    assert len(records) == 3
    assert all(r.extras["depth"] == 2 for r in records)


def test_relu_branch_guard():
    fl = [ComplexMatrix(np.array([[1e-20, -1.0]]), np.array([[0.0, 2.0]]))]
    agree = [ExactComplexMatrix(ExactMatrix.from_ints([[1, -1]]), ExactMatrix.from_ints([[0, 2]]))]
    differ = [ExactComplexMatrix(ExactMatrix.from_ints([[-1, -1]]), ExactMatrix.from_ints([[0, 2]]))]
    assert Experiments.relu_branches_agree(fl, agree)
    assert not Experiments.relu_branches_agree(fl, differ)


def test_forward_pass_matches_exact_on_integers():
    W = [ComplexMatrix(np.array([[1.0, -2.0], [3.0, 1.0]]), np.array([[0.0, 1.0], [-1.0, 2.0]]))] * 2
    x = ComplexMatrix(np.array([[1.0], [2.0]]), np.array([[-1.0], [1.0]]))
    out, pre = Experiments.forward(W, x, blas_algorithm("regular"))
    exact_out, exact_pre = Experiments.forward_exact([ExactComplexMatrix.from_complex_matrix(w) for w in W],
                                                     ExactComplexMatrix.from_complex_matrix(x))
    assert ExactComplexMatrix.from_complex_matrix(out) == exact_out
    assert Experiments.relu_branches_agree(pre, exact_pre)


def test_scalar_bounds_small():
    records = Experiments.run_experiment(_cfg("scalar_bounds", trials=500))
    assert [r.algorithm for r in records] == ["regular", "gauss", "new"]
    for rec in records:
        assert rec.extras["violations"] == 0
        assert rec.rel_error <= rec.bound


def test_gauss_asymmetry_small():
    records = Experiments.run_experiment(_cfg("gauss_asymmetry", n=8, algos=("gauss", "new")))
    assert [r.algorithm for r in records] == ["gauss_real", "gauss_imag", "new_real", "new_imag"]
    assert [r.part for r in records] == ["real", "imag", "real", "imag"]
    assert all(r.within_bound for r in records)


def test_run_sizes():
    records = Experiments.run_sizes(_cfg("cmm_speed", n=8, algos=("new",)), [8, 16])
    assert [r.n for r in records] == [8, 16]


# ===================================================================
# Metrics and result files
# ===================================================================


def _records(errors):
    return [
        ExperimentRecord("cmm_accuracy", algo, 8, 16, 0, err, 0.01)
        for algo, err in errors.items()
    ]


def test_ordering_holds():
    assert ordering_holds({"regular": 1.0, "new": 1.0, "gauss": 2.0}, ("regular", "new", "gauss"), (False, True))
    assert not ordering_holds({"regular": 1.0, "new": 2.0, "gauss": 2.0}, ("regular", "new", "gauss"), (False, True))
    assert ordering_holds({"regular": 1.0}, ("regular", "new"), (False,)) is None


def test_ordering_fractions():
    metrics = ExperimentMetrics()
    metrics.extend(_records({"regular": 1e-16, "new": 2e-16, "gauss": 5e-16}))
    frac = ordering_fractions(metrics.frame())
    assert frac.iloc[0]["fraction"] == 1.0


def test_csv_is_append_only(tmp_path):
    path = tmp_path / "out.csv"
    for _ in range(2):
        metrics = ExperimentMetrics()
        metrics.extend(_records({"regular": 1e-16, "new": 2e-16}))
        metrics.save(str(path), "csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(settings.CSV_COLUMNS)
    assert len(lines) == 5
    df = pd.read_csv(path)
    assert list(df["kappa"]) == [16, 16, 16, 16]


def test_csv_keeps_large_kappa_integral(tmp_path):
    path = tmp_path / "k.csv"
    metrics = ExperimentMetrics()
    metrics.record(ExperimentRecord("cmm_accuracy", "new", 8, 2 ** 53, 0, 1e-16, 0.01))
    metrics.record(ExperimentRecord("cmm_speed", "new", 8, None, 0, None, 0.01))
    metrics.save(str(path), "csv")
    rows = path.read_text().splitlines()
    assert rows[1].split(",")[3] == str(2 ** 53)
    assert rows[2].split(",")[3] == ""


def test_json_output(tmp_path):
    path = tmp_path / "out.json"
    cfg = _cfg("cmm_accuracy", n=8, kappa_list=(16,))
    metrics = ExperimentMetrics(cfg.to_dict())
    metrics.extend(_records({"regular": 1e-16, "new": 2e-16, "gauss": 4e-16}))
    metrics.save(str(path), "json")
    payload = json.loads(path.read_text())
    assert set(payload) == {"config", "records", "summary"}
    assert payload["config"]["n"] == 8
    assert payload["records"][0]["flagged"] is False
    assert payload["summary"]["records"] == 3


def test_print_metrics(capsys):
    metrics = ExperimentMetrics()
    metrics.extend(_records({"regular": 1e-16, "new": 2e-16, "gauss": 4e-16}))
    metrics.print_metrics("toy")
    out = capsys.readouterr().out
    assert "EXPERIMENT SUMMARY [toy]" in out
    assert "2^4" in out
    assert "1/1 points" in out


# ===================================================================
# Desk-scale reproductions
# ===================================================================


def _mean_errors(records):
    df = pd.DataFrame([r.to_row() for r in records])
    return df.groupby("algorithm")["rel_error"].mean()


@pytest.mark.slow
def test_winograd_less_accurate_than_strassen():
    for n in (32, 64):
        cfg = _cfg("fmm_accuracy", n=n, cutoff=settings.ACCURACY_CUTOFF, trials=5)
        means = _mean_errors(Experiments.run_experiment(cfg))
        assert means["conventional"] < means["strassen"] < means["winograd"]


@pytest.mark.slow
def test_cmm_accuracy_ordering():
    cfg = _cfg("cmm_accuracy", n=64, kappa_list=default_kappas(), trials=10)
    metrics = ExperimentMetrics()
    metrics.extend(Experiments.run_experiment(cfg))
    frac = ordering_fractions(metrics.frame())
    assert frac.iloc[0]["points"] == 10
    assert frac.iloc[0]["fraction"] >= 0.8
    means = _mean_errors(metrics.records)
    assert means["new"] / means["gauss"] < 0.7


@pytest.mark.slow
def test_gauss_imaginary_part_less_accurate():
    cfg = _cfg("gauss_asymmetry", n=64, trials=20, algos=("gauss",))
    means = _mean_errors(Experiments.run_experiment(cfg))
    assert 1.5 <= means["gauss_imag"] / means["gauss_real"] <= 5.0


@pytest.mark.slow
def test_scalar_bound_sweep():
    records = Experiments.run_experiment(_cfg("scalar_bounds", trials=100_000))
    assert all(r.extras["violations"] == 0 for r in records)


@pytest.mark.slow
@pytest.mark.parametrize(
    "experiment, n, extra",
    [
        ("horner", 32, {"degree": 5}),
        ("unitary", 32, {}),
        ("cnn", 64, {"depth": 6}),
    ],
)
def test_application_ordering(experiment, n, extra):
    kappas = (2 ** 36, 2 ** 40, 2 ** 44, 2 ** 48, 2 ** 53)
    cfg = _cfg(experiment, n=n, kappa_list=kappas, trials=5, **extra)
    metrics = ExperimentMetrics()
    metrics.extend(Experiments.run_experiment(cfg))
    frac = ordering_fractions(metrics.frame())
    assert frac.iloc[0]["points"] == len(kappas)
    assert frac.iloc[0]["fraction"] >= 0.8


@pytest.mark.slow
def test_three_product_schemes_are_faster():
    cfg = _cfg("cmm_speed", n=1024, trials=3)
    times = pd.DataFrame([r.to_row() for r in Experiments.run_experiment(cfg)]).groupby("algorithm")["wall_time_s"].min()
    assert times["new"] < times["regular"]
    assert times["gauss"] < times["regular"]

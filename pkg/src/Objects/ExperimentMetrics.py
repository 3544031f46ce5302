import json
import os
import time
from typing import Dict, Iterable, List, Optional, Sequence

import pandas as pd

from src.settings import CSV_COLUMNS

from .ExperimentConfig import FMM_ALGOS, ExperimentRecord

_CMM_ORDERED = ("cmm_accuracy", "horner", "unitary", "cnn")


def records_frame(records: Iterable[ExperimentRecord]) -> pd.DataFrame:
    rows = [r.to_row() for r in records]
    df = pd.DataFrame(rows, columns=CSV_COLUMNS)
    # nullable ints keep kappa = 2^53 exact and integral in the CSV
    return df.astype({"n": "int64", "seed": "int64", "kappa": "Int64"})


def ordering_holds(means: Dict[str, float], order: Sequence[str], strict: Sequence[bool]) -> Optional[bool]:
    """
    means[order[0]] (<= or <) means[order[1]] (<= or <) ...; strict[i] picks < for step i.
    None when an algorithm of the order is missing.
    """
    if any(a not in means or pd.isna(means[a]) for a in order):
        return None
    for (lo, hi), is_strict in zip(zip(order, order[1:]), strict):
        if is_strict and not means[lo] < means[hi]:
            return False
        if not is_strict and not means[lo] <= means[hi]:
            return False
    return True


def expected_order(experiment: str):
    """(algorithm order, strictness per step), or None when the experiment has no ordering"""
    if experiment == "fmm_accuracy":
        return FMM_ALGOS, (True, True)
    if experiment in _CMM_ORDERED:
        return ("regular", "new", "gauss"), (False, True)
    return None


def ordering_fractions(df: pd.DataFrame) -> pd.DataFrame:
    """Per (experiment, n): fraction of kappa points where the mean errors are ordered"""
    rows = []
    data = df.dropna(subset=["rel_error"])
    if data.empty:
        return pd.DataFrame(columns=["experiment", "n", "points", "ordered", "fraction"])
    data = data.assign(kappa=data["kappa"].fillna(0))
    means = data.groupby(["experiment", "n", "kappa", "algorithm"])["rel_error"].mean()
    for (experiment, n), group in means.groupby(level=["experiment", "n"]):
        expected = expected_order(experiment)
        if expected is None:
            continue
        order, strict = expected
        points, ordered = 0, 0
        for _, per_kappa in group.groupby(level="kappa"):
            by_algo = {key[-1]: value for key, value in per_kappa.items()}
            verdict = ordering_holds(by_algo, order, strict)
            if verdict is None:
                continue
            points += 1
            ordered += int(verdict)
        if points:
            rows.append({
                "experiment": experiment,
                "n": n,
                "points": points,
                "ordered": ordered,
                "fraction": ordered / points,
            })
    return pd.DataFrame(rows, columns=["experiment", "n", "points", "ordered", "fraction"])


class ExperimentMetrics:
    def __init__(self, config: Optional[Dict] = None):
        # Timing
        self.start_time = time.time()

        self.config = config or {}
        self.records: List[ExperimentRecord] = []

    def record(self, rec: ExperimentRecord):
        """Record one (trial, algorithm) measurement"""
        self.records.append(rec)

    def extend(self, records: Iterable[ExperimentRecord]):
        for rec in records:
            self.record(rec)

    @property
    def flagged_count(self) -> int:
        return sum(1 for r in self.records if r.flagged)

    @property
    def bound_violations(self) -> List[ExperimentRecord]:
        return [r for r in self.records if r.within_bound is False]

    def frame(self) -> pd.DataFrame:
        return records_frame(self.records)

    def get_metrics_report(self, label: str = "") -> Dict:
        """Run summary as a dictionary: per-group means, ordering checks, counters"""
        duration = time.time() - self.start_time
        df = self.frame()

        groups = []
        if not df.empty:
            agg = (
                df.assign(kappa=df["kappa"].fillna(0))
                .groupby(["experiment", "algorithm", "n", "kappa"], sort=True)
                .agg(
                    trials=("seed", "count"),
                    mean_rel_error=("rel_error", "mean"),
                    max_rel_error=("rel_error", "max"),
                    mean_wall_time_s=("wall_time_s", "mean"),
                )
                .reset_index()
            )
            groups = agg.astype(object).where(agg.notna(), None).to_dict(orient="records")

        ordering = ordering_fractions(df).to_dict(orient="records") if not df.empty else []

        return {
            "label": label,
            "duration": duration,
            "records": len(self.records),
            "flagged": self.flagged_count,
            "bound_violations": len(self.bound_violations),
            "groups": groups,
            "ordering": ordering,
        }

    def print_metrics(self, label, loaded_metrics=None):
        """Print a fixed-width summary table"""
        metrics = loaded_metrics if loaded_metrics else self.get_metrics_report(label)

        print(f"\n=== EXPERIMENT SUMMARY [{label}] ===")
        print(f"Duration:                     {metrics['duration']:.2f}s")
        print(f"Records:                      {metrics['records']}")
        print(f"Flagged trials:               {metrics['flagged']}")
        print(f"Bound violations:             {metrics['bound_violations']}")

        if metrics["groups"]:
            print(f"\n{'algorithm':<16}{'n':>6}{'kappa':>10}{'trials':>8}{'mean rel err':>16}{'mean time (s)':>16}")
            for g in metrics["groups"]:
                kappa = f"2^{int(g['kappa']).bit_length() - 1}" if g["kappa"] else "-"
                err = f"{g['mean_rel_error']:.3e}" if pd.notna(g["mean_rel_error"]) else "-"
                print(
                    f"{g['algorithm']:<16}{int(g['n']):>6}{kappa:>10}{int(g['trials']):>8}"
                    f"{err:>16}{g['mean_wall_time_s']:>16.4f}"
                )

        for o in metrics["ordering"]:
            print(
                f"Ordering {o['experiment']} n={int(o['n'])}: "
                f"{o['ordered']}/{o['points']} points ({100.0 * o['fraction']:.0f}%)"
            )
        print("=" * 60 + "\n")

    def save(self, path: str, fmt: str = "csv"):
        """
        CSV: append-only, header only for a new file, fixed column order.
        JSON: {"config", "records", "summary"}, overwritten.
        """
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        if fmt == "csv":
            new_file = not os.path.exists(path) or os.path.getsize(path) == 0
            self.frame().to_csv(path, mode="a", header=new_file, index=False)
            return
        payload = {
            "config": self.config,
            "records": [r.to_dict() for r in self.records],
            "summary": self.get_metrics_report(self.config.get("experiment", "")),
        }
        with open(path, "w") as f:
            json.dump(payload, f, indent=2, default=_json_default)


def _json_default(value):
    # numpy scalars from pandas aggregations
    if hasattr(value, "item"):
        return value.item()
    return str(value)

# summarize_results.py
"""
Summarises experiment CSV files: mean error and wall time per
(experiment, algorithm, n, kappa), plus how often the expected algorithm
ordering holds across the kappa sweep.

Input:
  results/*.csv (or the files given on the command line)

Output:
  <out>/summary.csv
"""

import glob
import os
import sys
from typing import List, Optional, Sequence

import pandas as pd

from src.Objects.ExperimentMetrics import ordering_fractions
from src.settings import CSV_COLUMNS, RESULTS_DIR


def load_results(paths: Sequence[str]) -> pd.DataFrame:
    frames = []
    for f in paths:
        try:
            df = pd.read_csv(f)
        except Exception as e:
            print(f"[WARN] Skipping results file {f}: {e}")
            continue
        missing = [c for c in CSV_COLUMNS if c not in df.columns]
        if missing:
            print(f"[WARN] Skipping results file {f}: missing columns {missing}")
            continue
        frames.append(df[CSV_COLUMNS])
    if not frames:
        return pd.DataFrame(columns=CSV_COLUMNS)
    return pd.concat(frames, ignore_index=True)


def summarize(df: pd.DataFrame) -> pd.DataFrame:
    """Per-group means; kappa-less rows (speed, scalar sweeps) group under kappa 0"""
    if df.empty:
        return pd.DataFrame(
            columns=["experiment", "algorithm", "n", "kappa", "trials", "mean_rel_error", "mean_wall_time_s"]
        )
    return (
        df.assign(kappa=df["kappa"].fillna(0).astype("int64"))
        .groupby(["experiment", "algorithm", "n", "kappa"], sort=True)
        .agg(
            trials=("seed", "count"),
            mean_rel_error=("rel_error", "mean"),
            mean_wall_time_s=("wall_time_s", "mean"),
        )
        .reset_index()
    )


def print_summary(summary: pd.DataFrame, ordering: pd.DataFrame) -> None:
    print("\n=== Results Summary (Average) ===")
    print(f"{'experiment':<18}{'algorithm':<14}{'n':>6}{'kappa':>10}{'trials':>8}{'rel err':>14}{'time (s)':>12}")
    for row in summary.itertuples(index=False):
        kappa = f"2^{int(row.kappa).bit_length() - 1}" if row.kappa else "-"
        err = f"{row.mean_rel_error:.3e}" if pd.notna(row.mean_rel_error) else "-"
        print(
            f"{row.experiment:<18}{row.algorithm:<14}{int(row.n):>6}{kappa:>10}"
            f"{int(row.trials):>8}{err:>14}{row.mean_wall_time_s:>12.4f}"
        )
    if not ordering.empty:
        print("\n=== Ordering ===")
        for row in ordering.itertuples(index=False):
            print(f"{row.experiment:<18} n={int(row.n):<6} {row.ordered}/{row.points} kappa points ({100.0 * row.fraction:.0f}%)")


def main(paths: Optional[List[str]] = None, out_dir: Optional[str] = None) -> int:
    paths = paths or sorted(glob.glob(os.path.join(RESULTS_DIR, "*.csv")))
    out_dir = out_dir or RESULTS_DIR
    # never summarise our own output
    paths = [p for p in paths if os.path.basename(p) != "summary.csv"]
    if not paths:
        print(f"[WARN] No result files found in {RESULTS_DIR}/")
        return 1

    df = load_results(paths)
    summary = summarize(df)
    ordering = ordering_fractions(df)
    print_summary(summary, ordering)

    os.makedirs(out_dir, exist_ok=True)
    out = os.path.join(out_dir, "summary.csv")
    summary.to_csv(out, index=False)
    print(f"Exported summary to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))

"""Export stage: write sweep rows (and optionally every trial) as CSV with a fixed schema."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Any, Dict, Iterable, List

from src.onebit.experiments.sweep import SweepResult, SweepRow, TrialRecord

SWEEP_FIELDS = [
    "m",
    "variant",
    "param_name",
    "param_value",
    "mean_mse",
    "sem_mse",
    "mean_consistency",
    "mean_support_recall",
    "mean_iters",
    "degenerate_count",
]

TRIAL_FIELDS = [
    "m",
    "variant",
    "param_name",
    "param_value",
    "trial_index",
    "mse",
    "consistency",
    "support_recall",
    "iterations",
    "degenerate",
]


def format_real(value: float) -> str:
    """Fixed 15-significant-digit rendering so reruns are byte-identical."""
    return format(float(value), "#.15g")


def sweep_row(row: SweepRow) -> Dict[str, Any]:
    return {
        "m": row.m,
        "variant": row.variant,
        "param_name": row.param_name,
        "param_value": format_real(row.param_value),
        "mean_mse": format_real(row.mean_mse),
        "sem_mse": format_real(row.sem_mse),
        "mean_consistency": format_real(row.mean_consistency),
        "mean_support_recall": format_real(row.mean_support_recall),
        "mean_iters": format_real(row.mean_iters),
        "degenerate_count": row.degenerate_count,
    }


def trial_row(record: TrialRecord) -> Dict[str, Any]:
    metrics = record.metrics
    return {
        "m": record.m,
        "variant": record.variant,
        "param_name": record.param_name,
        "param_value": format_real(record.param_value),
        "trial_index": record.trial_index,
        "mse": format_real(metrics.mse),
        "consistency": format_real(metrics.consistency),
        "support_recall": format_real(metrics.support_recall),
        "iterations": metrics.iterations,
        "degenerate": "true" if metrics.degenerate else "false",
    }


def write_csv(rows: Iterable[Dict[str, Any]], fieldnames: List[str], output_path: Path) -> int:
    """Write dict rows under a header; return the number of data rows."""
    count = 0
    try:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with output_path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
                count += 1
    except OSError as exc:
        raise OSError(f"Failed to write CSV file {output_path}: {exc}") from exc
    return count


def emit_csv(result: SweepResult, path: Path) -> int:
    """One line per sweep row, ordered by m then parameter value."""
    ordered = sorted(result.rows, key=lambda r: (r.m, r.param_value))
    return write_csv((sweep_row(r) for r in ordered), SWEEP_FIELDS, Path(path))


def emit_trials_csv(result: SweepResult, path: Path) -> int:
    """Per-trial audit dump behind the averaged rows."""
    return write_csv((trial_row(r) for r in result.trials), TRIAL_FIELDS, Path(path))

"""Experiment stage: seeded Monte-Carlo trials and their aggregation into sweep rows."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from src.onebit import __version__
from src.onebit.errors import InvalidParameterError, TrialError
from src.onebit.evaluate.metrics import TrialMetrics, score_trial
from src.onebit.experiments.sweep_config import SweepConfig, VariantSpec
from src.onebit.model.signal_model import (
    MeasurementEnsemble,
    SparseSignal,
    generate_signal,
    make_ensemble,
    make_support_estimate,
)
from src.onebit.recover.biht import (
    RecoveryConfig,
    RecoveryResult,
    biht,
    biht_fourset,
    biht_oracle,
    biht_psw,
    biht_urw,
)
from utils.seeding import SIGNAL_STREAM, SUPPORT_STREAM, substream


@dataclass(frozen=True)
class SweepRow:
    """Aggregated metrics of one (m, variant, parameter value) cell."""

    m: int
    variant: str
    param_name: str
    param_value: float
    mean_mse: float
    sem_mse: float
    mean_consistency: float
    mean_support_recall: float
    mean_iters: float
    degenerate_count: int


@dataclass(frozen=True)
class TrialRecord:
    m: int
    variant: str
    param_name: str
    param_value: float
    trial_index: int
    metrics: TrialMetrics


@dataclass
class SweepResult:
    rows: List[SweepRow]
    trials: List[TrialRecord] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)

    def row(self, m: int, variant: str, param_value: float | None = None) -> SweepRow:
        """Look up a single row; param_value may be omitted for single-valued variants."""
        matches = [
            r for r in self.rows
            if r.m == m and r.variant == variant and (param_value is None or r.param_value == param_value)
        ]
        if len(matches) != 1:
            raise KeyError(f"Expected one row for m={m}, variant={variant}, value={param_value}; found {len(matches)}")
        return matches[0]


def draw_instance(cfg: SweepConfig, m: int, trial_index: int) -> Tuple[SparseSignal, MeasurementEnsemble]:
    """Signal and measurements for one trial; shared by every variant of the sweep."""
    rng = substream(cfg.master_seed, (m, trial_index, SIGNAL_STREAM))
    signal = generate_signal(cfg.n, cfg.k, rng)
    return signal, make_ensemble(m, signal, rng)


def recover(
    cfg: SweepConfig,
    variant: VariantSpec,
    value: float,
    signal: SparseSignal,
    ensemble: MeasurementEnsemble,
    trial_index: int,
) -> RecoveryResult:
    """Run the variant's algorithm on one instance."""
    params = variant.settings(value)
    rcfg: RecoveryConfig = cfg.recovery_config()
    matrix, y = ensemble.matrix, ensemble.signs

    if variant.algorithm == "biht":
        return biht(matrix, y, cfg.k, rcfg)
    if variant.algorithm == "biht_urw":
        true_support = signal.support if params["oracle_weights"] else None
        return biht_urw(matrix, y, cfg.k, params["lambda"], params["n_rw"], rcfg, true_support=true_support)

    estimate = make_support_estimate(
        signal.support,
        params["rho"],
        params["false_positives"],
        cfg.n,
        substream(cfg.master_seed, (ensemble.m, trial_index, SUPPORT_STREAM)),
    )
    if variant.algorithm == "biht_oracle":
        return biht_oracle(matrix, y, estimate, params["c"], rcfg)
    if variant.algorithm == "biht_fourset":
        return biht_fourset(matrix, y, cfg.k, estimate, params["weight_rho"], rcfg)
    return biht_psw(matrix, y, cfg.k, estimate, params["weight_rho"], rcfg)


def run_trial(
    cfg: SweepConfig,
    m: int,
    trial_index: int,
    variant_index: int = 0,
    value_index: int = 0,
) -> TrialMetrics:
    """Draw the trial's instance from its substream, recover it, and score the estimate."""
    if m not in cfg.m_grid:
        raise InvalidParameterError(f"m={m} is not in the sweep grid {list(cfg.m_grid)}")
    if not 0 <= trial_index < cfg.trials:
        raise InvalidParameterError(f"trial_index={trial_index} outside [0, {cfg.trials})")
    variant = cfg.variants[variant_index]
    value = variant.values[value_index]
    try:
        signal, ensemble = draw_instance(cfg, m, trial_index)
        result = recover(cfg, variant, value, signal, ensemble, trial_index)
        return score_trial(signal, ensemble, result)
    except Exception as exc:
        raise TrialError(
            f"Trial failed: {exc}",
            {
                "master_seed": cfg.master_seed,
                "m": m,
                "variant": variant.name,
                "param_value": value,
                "trial_index": trial_index,
            },
        ) from exc


def standard_error(values: Sequence[float]) -> float:
    """Sample standard deviation over sqrt(count); 0 for a single value."""
    if len(values) < 2:
        return 0.0
    return float(np.std(np.asarray(values, dtype=np.float64), ddof=1) / math.sqrt(len(values)))


def aggregate(m: int, variant: VariantSpec, value: float, metrics: Sequence[TrialMetrics]) -> SweepRow:
    mses = [t.mse for t in metrics]
    return SweepRow(
        m=m,
        variant=variant.name,
        param_name=variant.sweep,
        param_value=float(value),
        mean_mse=float(np.mean(mses)),
        sem_mse=standard_error(mses),
        mean_consistency=float(np.mean([t.consistency for t in metrics])),
        mean_support_recall=float(np.mean([t.support_recall for t in metrics])),
        mean_iters=float(np.mean([t.iterations for t in metrics])),
        degenerate_count=sum(1 for t in metrics if t.degenerate),
    )


def run_sweep(cfg: SweepConfig, workers: int = 1) -> SweepResult:
    """Run trials x |m_grid| x |parameter grid| trials and average them per cell.

    Trials are keyed by index, not by execution order, so any worker count
    yields the same result.
    """
    if isinstance(workers, bool) or int(workers) != workers or workers < 1:
        raise InvalidParameterError(f"workers must be a positive integer, got {workers!r}")
    cells = [
        (m, vi, pi)
        for m in cfg.m_grid
        for vi, variant in enumerate(cfg.variants)
        for pi in range(len(variant.values))
    ]
    tasks = [(m, t, vi, pi) for (m, vi, pi) in cells for t in range(cfg.trials)]

    if workers == 1:
        outcomes = [run_trial(cfg, *task) for task in tasks]
    else:
        outcomes = Parallel(n_jobs=int(workers))(delayed(run_trial)(cfg, *task) for task in tasks)

    rows: List[SweepRow] = []
    records: List[TrialRecord] = []
    for cell_index, (m, vi, pi) in enumerate(cells):
        variant = cfg.variants[vi]
        value = variant.values[pi]
        cell_metrics = outcomes[cell_index * cfg.trials:(cell_index + 1) * cfg.trials]
        rows.append(aggregate(m, variant, value, cell_metrics))
        records.extend(
            TrialRecord(m, variant.name, variant.sweep, float(value), t, metric)
            for t, metric in enumerate(cell_metrics)
        )

    variant_order = {v.name: i for i, v in enumerate(cfg.variants)}
    rows.sort(key=lambda r: (r.m, r.param_value, variant_order[r.variant]))
    records.sort(key=lambda r: (r.m, r.param_value, variant_order[r.variant], r.trial_index))
    provenance = {
        "master_seed": cfg.master_seed,
        "library_version": __version__,
        "config": cfg.to_dict(),
    }
    return SweepResult(rows=rows, trials=records, provenance=provenance)

"""Acceptance suite: figure-level trends at desk scale plus exact property checks."""
from __future__ import annotations

import itertools
import math
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.onebit.experiments.figures import load_figure
from src.onebit.experiments.sweep import SweepResult, run_sweep
from src.onebit.experiments.sweep_config import SweepConfig, VariantSpec
from src.onebit.export.build_csv import emit_csv
from src.onebit.model.signal_model import generate_signal, make_ensemble, make_support_estimate
from src.onebit.recover.biht import (
    RecoveryConfig,
    RecoveryResult,
    biht,
    biht_fourset,
    biht_oracle,
    biht_psw,
    biht_step,
    biht_urw,
)
from src.onebit.recover.thresholding import prune
from utils.seeding import substream

FULL_GRID = (50, 100, 150, 200, 250, 300, 350, 400, 450, 500)
QUICK_GRID = (100, 300, 500)

# small problems for the exact property checks
SMALL_N = 64
SMALL_K = 4
SMALL_M = 48
SMALL_RECOVERY = RecoveryConfig(tau=0.01, k=SMALL_K, max_iters=200, tol=1e-10)


@dataclass(frozen=True)
class CriterionResult:
    key: str
    description: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class AcceptanceSettings:
    trials: int
    m_grid: Tuple[int, ...]
    master_seed: int = 2024
    workers: int = 1
    identity_instances: int = 100
    structure_runs: int = 500
    prune_instances: int = 10_000

    @classmethod
    def build(cls, quick: bool, master_seed: int = 2024, workers: int = 1) -> "AcceptanceSettings":
        if quick:
            return cls(trials=20, m_grid=QUICK_GRID, master_seed=master_seed, workers=workers)
        return cls(trials=100, m_grid=FULL_GRID, master_seed=master_seed, workers=workers)


def _figure_sweep(name: str, settings: AcceptanceSettings, m_grid: Optional[Sequence[int]] = None) -> SweepResult:
    cfg = replace(
        load_figure(name),
        m_grid=tuple(m_grid or settings.m_grid),
        trials=settings.trials,
        master_seed=settings.master_seed,
    )
    return run_sweep(cfg, workers=settings.workers)


def _failures(checks: Dict[int, bool]) -> List[int]:
    return [m for m, ok in sorted(checks.items()) if not ok]


def _verdict(key: str, description: str, failed: Sequence, detail: str) -> CriterionResult:
    if failed:
        return CriterionResult(key, description, False, f"failed at {list(failed)}; {detail}")
    return CriterionResult(key, description, True, detail)


def check_oracle(settings: AcceptanceSettings) -> List[CriterionResult]:
    result = _figure_sweep("fig1", settings)
    dominance: Dict[int, bool] = {}
    soft_gap: Dict[int, float] = {}
    for m in settings.m_grid:
        base = result.row(m, "biht").mean_mse
        hard = result.row(m, "oracle", 0.0).mean_mse
        soft = result.row(m, "oracle", 0.5).mean_mse
        dominance[m] = hard <= base
        soft_gap[m] = abs(soft - hard)
    worst_gap = max(soft_gap.values())
    return [
        _verdict("1", "oracle hard thresholding never worse than BIHT", _failures(dominance), "mean MSE compared per m"),
        _verdict(
            "2",
            "soft (c=0.5) matches hard (c=0) thresholding",
            [m for m, gap in sorted(soft_gap.items()) if gap > 0.05],
            f"largest |difference| {worst_gap:.4f} (limit 0.05)",
        ),
    ]


def check_fourset(settings: AcceptanceSettings) -> List[CriterionResult]:
    result = _figure_sweep("fig2b", settings, m_grid=(200,))
    base = result.row(200, "biht").mean_mse
    good = result.row(200, "fourset", 0.9).mean_mse
    bad = result.row(200, "fourset", 0.1).mean_mse
    passed = good < base < bad
    detail = f"m=200: rho=0.9 {good:.4f}, biht {base:.4f}, rho=0.1 {bad:.4f}"
    return [CriterionResult("3", "four-set with false positives helps only when mostly correct", passed, detail)]


def check_psw(settings: AcceptanceSettings) -> List[CriterionResult]:
    result = _figure_sweep("fig3a", settings)
    checks = {
        m: all(result.row(m, "psw", rho).mean_mse <= result.row(m, "biht").mean_mse + 0.05 for rho in (0.3, 0.6, 0.9))
        for m in settings.m_grid
    }
    return [_verdict("4", "supervised weighting never hurts", _failures(checks), "rho in {0.3, 0.6, 0.9}, slack 0.05")]


def check_wrong_rho(settings: AcceptanceSettings) -> List[CriterionResult]:
    result = _figure_sweep("fig4", settings)
    checks = {
        m: result.row(m, "psw", 0.1).mean_mse > result.row(m, "psw", 0.9).mean_mse
        for m in settings.m_grid
        if m >= 150
    }
    return [_verdict("5", "weighting with a wrong rho costs accuracy", _failures(checks), "true rho 0.9, m >= 150")]


def check_urw(settings: AcceptanceSettings) -> List[CriterionResult]:
    outcomes: List[CriterionResult] = []
    for name, k in (("fig5a", 8), ("fig5b", 20)):
        result = _figure_sweep(name, settings)
        near_baseline: Dict[int, bool] = {}
        oracle_better: Dict[int, bool] = {}
        for m in settings.m_grid:
            base = result.row(m, "biht").mean_mse
            near_baseline[m] = all(
                abs(result.row(m, "urw", float(n_rw)).mean_mse - base) <= 0.2 * base for n_rw in (1, 2, 3)
            )
            if m >= 300:
                oracle_better[m] = result.row(m, "urw_oracle").mean_mse < 0.8 * base
        outcomes.append(
            _verdict(f"6/k={k}", "re-weighting tracks BIHT", _failures(near_baseline), "lambda=0.5, n_rw in {1,2,3}, within 20%")
        )
        outcomes.append(
            _verdict(f"6/k={k}/oracle", "true-support weights beat BIHT", _failures(oracle_better), "below 0.8 x baseline for m >= 300")
        )
    return outcomes


def _small_instance(master_seed: int, index: int):
    rng = substream(master_seed, (SMALL_M, index, 0))
    signal = generate_signal(SMALL_N, SMALL_K, rng)
    return signal, make_ensemble(SMALL_M, signal, rng)


def check_reductions(settings: AcceptanceSettings) -> List[CriterionResult]:
    mismatches: Dict[str, int] = {"psw(rho=0)": 0, "urw(lambda=0)": 0, "psw(rho=1)": 0}
    for index in range(settings.identity_instances):
        signal, ensemble = _small_instance(settings.master_seed, index)
        matrix, y = ensemble.matrix, ensemble.signs
        estimate = make_support_estimate(
            signal.support, 0.5, bool(index % 2), SMALL_N, substream(settings.master_seed, (SMALL_M, index, 1))
        )
        baseline = biht(matrix, y, SMALL_K, SMALL_RECOVERY).estimate
        if not np.array_equal(biht_psw(matrix, y, SMALL_K, estimate, 0.0, SMALL_RECOVERY).estimate, baseline):
            mismatches["psw(rho=0)"] += 1
        if not np.array_equal(biht_urw(matrix, y, SMALL_K, 0.0, 2, SMALL_RECOVERY).estimate, baseline):
            mismatches["urw(lambda=0)"] += 1
        oracle = biht_oracle(matrix, y, signal.support, 0.0, SMALL_RECOVERY).estimate
        if not np.array_equal(biht_psw(matrix, y, SMALL_K, signal.support, 1.0, SMALL_RECOVERY).estimate, oracle):
            mismatches["psw(rho=1)"] += 1
    failed = [name for name, count in mismatches.items() if count]
    return [_verdict("7", "reduction identities hold bitwise", failed, f"{settings.identity_instances} instances, mismatches {mismatches}")]


def exhaustive_prune(z: np.ndarray, k: int) -> np.ndarray:
    """Reference prune: the lexicographically first subset of maximal retained energy."""
    best: Tuple[int, ...] = ()
    best_energy = -1.0
    for subset in itertools.combinations(range(z.shape[0]), k):
        energy = math.fsum(float(z[i]) ** 2 for i in subset)
        if energy > best_energy:
            best, best_energy = subset, energy
    out = np.zeros_like(z)
    out[list(best)] = z[list(best)]
    return out


def prune_corpus(master_seed: int, count: int):
    """Random vectors of length <= 10; odd entries use small integers so ties are common."""
    for index in range(count):
        rng = substream(master_seed, (10, index, 2))
        n = int(rng.integers(1, 11))
        k = int(rng.integers(0, n + 1))
        if index % 2:
            z = rng.integers(-3, 4, size=n).astype(np.float64)
        else:
            z = rng.standard_normal(n)
        yield z, k


def check_prune(settings: AcceptanceSettings) -> List[CriterionResult]:
    failures = [
        index
        for index, (z, k) in enumerate(prune_corpus(settings.master_seed, settings.prune_instances))
        if not np.array_equal(prune(z, k), exhaustive_prune(z, k))
    ]
    return [_verdict("8", "prune matches exhaustive subset search", failures[:10], f"{settings.prune_instances} vectors")]


def _structure_violations(matrix, y, result: RecoveryResult, max_nonzeros: int) -> List[str]:
    problems = []
    norm = float(np.linalg.norm(result.estimate))
    if result.degenerate:
        if result.converged:
            problems.append("degenerate run flagged converged")
    elif abs(norm - 1.0) > 1e-12:
        problems.append(f"norm {norm!r}")
    if np.count_nonzero(result.estimate) > max_nonzeros:
        problems.append(f"{np.count_nonzero(result.estimate)} nonzeros > {max_nonzeros}")
    if result.consistent and not np.array_equal(biht_step(result.estimate, matrix, y, SMALL_RECOVERY.tau), result.estimate):
        problems.append("consistent estimate is not a fixed point")
    return problems


def check_structure(settings: AcceptanceSettings) -> List[CriterionResult]:
    violations: Dict[str, int] = {"biht": 0, "oracle": 0, "fourset": 0, "psw": 0, "urw": 0}
    for index in range(settings.structure_runs):
        signal, ensemble = _small_instance(settings.master_seed + 1, index)
        matrix, y = ensemble.matrix, ensemble.signs
        rho = (0.25, 0.5, 0.75, 1.0)[index % 4]
        estimate = make_support_estimate(
            signal.support, rho, bool(index % 2), SMALL_N, substream(settings.master_seed + 1, (SMALL_M, index, 1))
        )
        runs = {
            "biht": (biht(matrix, y, SMALL_K, SMALL_RECOVERY), SMALL_K),
            "oracle": (biht_oracle(matrix, y, signal.support, (0.0, 0.5)[index % 2], SMALL_RECOVERY), SMALL_N),
            "fourset": (biht_fourset(matrix, y, SMALL_K, estimate, rho, SMALL_RECOVERY), len(estimate) + SMALL_K),
            "psw": (biht_psw(matrix, y, SMALL_K, estimate, rho, SMALL_RECOVERY), SMALL_K),
            "urw": (biht_urw(matrix, y, SMALL_K, 0.5, 1 + index % 3, SMALL_RECOVERY), SMALL_K),
        }
        for name, (result, max_nonzeros) in runs.items():
            if _structure_violations(matrix, y, result, max_nonzeros):
                violations[name] += 1
    failed = [name for name, count in violations.items() if count]
    return [_verdict("9", "structural invariants of every algorithm", failed, f"{settings.structure_runs} runs each, violations {violations}")]


def check_determinism(settings: AcceptanceSettings) -> List[CriterionResult]:
    cfg = SweepConfig(
        name="determinism",
        n=SMALL_N,
        k=SMALL_K,
        m_grid=(32, 64),
        trials=4,
        tau=SMALL_RECOVERY.tau,
        max_iters=100,
        master_seed=settings.master_seed,
        variants=(
            VariantSpec(name="biht", algorithm="biht"),
            VariantSpec(name="psw", algorithm="biht_psw", sweep="rho", values=(0.5, 0.9)),
        ),
    )
    with tempfile.TemporaryDirectory() as tmp:
        paths = [Path(tmp) / f"run{i}.csv" for i in range(3)]
        for path, workers in zip(paths, (1, 1, max(2, settings.workers))):
            emit_csv(run_sweep(cfg, workers=workers), path)
        contents = [p.read_bytes() for p in paths]
    failed = [f"run{i}" for i, data in enumerate(contents) if data != contents[0]]
    return [_verdict("10", "sweeps are byte-identical across reruns and worker counts", failed, "1, 1 and 2+ workers")]


CHECKS: List[Callable[[AcceptanceSettings], List[CriterionResult]]] = [
    check_oracle,
    check_fourset,
    check_psw,
    check_wrong_rho,
    check_urw,
    check_reductions,
    check_prune,
    check_structure,
    check_determinism,
]


def run_acceptance(
    settings: AcceptanceSettings,
    on_result: Optional[Callable[[CriterionResult], None]] = None,
) -> List[CriterionResult]:
    """Run every criterion in order; on_result sees each verdict as soon as it is known."""
    results: List[CriterionResult] = []
    for check in CHECKS:
        for outcome in check(settings):
            results.append(outcome)
            if on_result is not None:
                on_result(outcome)
    return results

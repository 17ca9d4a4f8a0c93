"""Recovery stage: binary iterative hard thresholding and its partial-support variants.

Every algorithm here shares one iteration driver: a gradient step toward sign
consistency followed by a variant-specific thresholding rule. Iterates start at
zero, halt when the unnormalized iterate moves less than ``tol`` (or stops
moving), and are normalized only on return.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.onebit.errors import InvalidParameterError
from src.onebit.model.signal_model import SupportEstimate, sign_map
from src.onebit.recover.thresholding import build_weights, prune, top_k_indices

Threshold = Callable[[np.ndarray], np.ndarray]
EstimateLike = Union[SupportEstimate, Sequence[int]]


@dataclass(frozen=True)
class RecoveryConfig:
    """Step size, sparsity target and halting rule shared by all recovery variants."""

    tau: float = 0.001
    k: int = 8
    max_iters: int = 1000
    tol: float = 1e-10
    halt_on_consistency: bool = False
    record_history: bool = False

    def __post_init__(self) -> None:
        if not float(self.tau) > 0.0:
            raise InvalidParameterError(f"tau must be positive, got {self.tau!r}")
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise InvalidParameterError(f"k must be a positive integer, got {self.k!r}")
        if isinstance(self.max_iters, bool) or int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidParameterError(f"max_iters must be >= 1, got {self.max_iters!r}")
        if not float(self.tol) >= 0.0:
            raise InvalidParameterError(f"tol must be >= 0, got {self.tol!r}")


@dataclass(frozen=True)
class RecoveryResult:
    """Normalized estimate (or the zero vector for a degenerate run) plus run diagnostics."""

    estimate: np.ndarray
    iterations: int
    converged: bool
    consistent: bool
    history: Tuple[float, ...] = ()

    @property
    def degenerate(self) -> bool:
        return not bool(np.any(self.estimate))

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.estimate))


def _check_problem(matrix: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    matrix = np.asarray(matrix, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if matrix.ndim != 2:
        raise InvalidParameterError(f"Sensing matrix must be 2-D, got shape {matrix.shape}")
    if y.ndim != 1 or y.shape[0] != matrix.shape[0]:
        raise InvalidParameterError(f"Measurements of shape {y.shape} do not match matrix rows {matrix.shape[0]}")
    if not np.all(np.abs(y) == 1.0):
        raise InvalidParameterError("Measurements must be in {-1, +1}")
    return matrix, y


def _check_k(k: int, n: int) -> int:
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= n:
        raise InvalidParameterError(f"Sparsity k must satisfy 1 <= k <= n={n}, got {k!r}")
    return int(k)


def _check_unit_interval(name: str, value: float) -> float:
    if not 0.0 <= float(value) <= 1.0:
        raise InvalidParameterError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def _estimate_indices(estimate: EstimateLike, n: int) -> Tuple[int, ...]:
    indices = estimate.indices if isinstance(estimate, SupportEstimate) else tuple(int(i) for i in estimate)
    if any(i < 0 or i >= n for i in indices) or len(set(indices)) != len(indices):
        raise InvalidParameterError(f"Support estimate must hold distinct indices in [0, {n})")
    return tuple(indices)


def _membership(indices: Sequence[int], n: int) -> np.ndarray:
    member = np.zeros(n, dtype=bool)
    member[list(indices)] = True
    return member


def _resolve(k: Optional[int], cfg: Optional[RecoveryConfig], n: int) -> Tuple[int, RecoveryConfig]:
    cfg = cfg if cfg is not None else RecoveryConfig()
    return _check_k(cfg.k if k is None else k, n), cfg


def biht_step(x_cur: np.ndarray, matrix: np.ndarray, y: np.ndarray, tau: float) -> np.ndarray:
    """Gradient step Gamma = x + (tau/2) * Phi^T (y - sign(Phi x))."""
    matrix, y = _check_problem(matrix, y)
    x_cur = np.asarray(x_cur, dtype=np.float64)
    if x_cur.shape != (matrix.shape[1],):
        raise InvalidParameterError(f"Iterate of shape {x_cur.shape} does not match matrix columns {matrix.shape[1]}")
    return _gradient_step(x_cur, matrix, y, tau)


def _gradient_step(x_cur: np.ndarray, matrix: np.ndarray, y: np.ndarray, tau: float) -> np.ndarray:
    residual = y - sign_map(matrix @ x_cur)
    return x_cur + (tau / 2.0) * (matrix.T @ residual)


def _finish(
    matrix: np.ndarray,
    y: np.ndarray,
    x: np.ndarray,
    iterations: int,
    converged: bool,
    history: List[float],
) -> RecoveryResult:
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        estimate = np.zeros_like(x)
        converged = False
    else:
        estimate = x / norm
    consistent = bool(np.array_equal(sign_map(matrix @ estimate), y))
    return RecoveryResult(
        estimate=estimate,
        iterations=iterations,
        converged=converged,
        consistent=consistent,
        history=tuple(history),
    )


def _iterate(matrix: np.ndarray, y: np.ndarray, cfg: RecoveryConfig, threshold: Threshold) -> RecoveryResult:
    x = np.zeros(matrix.shape[1])
    history: List[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        gamma = _gradient_step(x, matrix, y, cfg.tau)
        x_new = threshold(gamma)
        change = float(np.linalg.norm(x_new - x))
        x = x_new
        if cfg.record_history:
            history.append(change)
        # a fixed point also halts when tol == 0
        if change < cfg.tol or change == 0.0:
            converged = True
            break
        if cfg.halt_on_consistency and np.array_equal(sign_map(matrix @ x), y):
            converged = True
            break
    return _finish(matrix, y, x, iterations, converged, history)


def biht(matrix: np.ndarray, y: np.ndarray, k: Optional[int] = None, cfg: Optional[RecoveryConfig] = None) -> RecoveryResult:
    """Plain BIHT: keep the k largest entries of every gradient step."""
    matrix, y = _check_problem(matrix, y)
    k, cfg = _resolve(k, cfg, matrix.shape[1])
    return _iterate(matrix, y, cfg, lambda gamma: prune(gamma, k))


def biht_oracle(
    matrix: np.ndarray,
    y: np.ndarray,
    estimate: EstimateLike,
    c: float = 0.0,
    cfg: Optional[RecoveryConfig] = None,
) -> RecoveryResult:
    """Keep Gamma on the support estimate and scale it by c elsewhere (c = 0 is hard thresholding)."""
    matrix, y = _check_problem(matrix, y)
    cfg = cfg if cfg is not None else RecoveryConfig()
    n = matrix.shape[1]
    indices = _estimate_indices(estimate, n)
    if not indices:
        raise InvalidParameterError("Oracle thresholding needs a nonempty support estimate")
    if not 0.0 <= float(c) < 1.0:
        raise InvalidParameterError(f"Soft constant c must lie in [0, 1), got {c!r}")
    member = _membership(indices, n)
    c = float(c)

    def threshold(gamma: np.ndarray) -> np.ndarray:
        return np.where(member, gamma, c * gamma if c else 0.0)

    return _iterate(matrix, y, cfg, threshold)


def fourset_weights(gamma: np.ndarray, member: np.ndarray, rho: float, k: int) -> np.ndarray:
    """Per-entry weights 1 on the estimate, 1 - rho on the remaining top-k of Gamma, 0 elsewhere."""
    top = np.zeros(gamma.shape[0], dtype=bool)
    top[top_k_indices(gamma, k)] = True
    return np.where(member, 1.0, np.where(top, 1.0 - rho, 0.0))


def biht_fourset(
    matrix: np.ndarray,
    y: np.ndarray,
    k: Optional[int],
    estimate: EstimateLike,
    rho: float,
    cfg: Optional[RecoveryConfig] = None,
) -> RecoveryResult:
    """Four-set soft thresholding against the support estimate and the top-k of each gradient step."""
    matrix, y = _check_problem(matrix, y)
    n = matrix.shape[1]
    k, cfg = _resolve(k, cfg, n)
    rho = _check_unit_interval("rho", rho)
    member = _membership(_estimate_indices(estimate, n), n)

    def threshold(gamma: np.ndarray) -> np.ndarray:
        weights = fourset_weights(gamma, member, rho, k)
        return np.where(weights > 0.0, gamma * weights, 0.0)

    return _iterate(matrix, y, cfg, threshold)


def psw_threshold(gamma: np.ndarray, w: np.ndarray, k: int) -> np.ndarray:
    """Keep the unweighted Gamma on the k largest |Gamma_i * w_i|, zero elsewhere."""
    keep = top_k_indices(gamma * w, k)
    x = np.zeros_like(gamma)
    x[keep] = gamma[keep]
    return x


def biht_psw(
    matrix: np.ndarray,
    y: np.ndarray,
    k: Optional[int],
    estimate: EstimateLike,
    rho: float,
    cfg: Optional[RecoveryConfig] = None,
) -> RecoveryResult:
    """Supervised weighting: select the k largest |Gamma_i * w_i| and keep the unweighted Gamma there."""
    matrix, y = _check_problem(matrix, y)
    n = matrix.shape[1]
    k, cfg = _resolve(k, cfg, n)
    rho = _check_unit_interval("rho", rho)
    w = build_weights(_estimate_indices(estimate, n), rho, n).weights

    def threshold(gamma: np.ndarray) -> np.ndarray:
        return psw_threshold(gamma, w, k)

    return _iterate(matrix, y, cfg, threshold)


def biht_urw(
    matrix: np.ndarray,
    y: np.ndarray,
    k: Optional[int],
    lam: float,
    n_rw: int,
    cfg: Optional[RecoveryConfig] = None,
    *,
    true_support: Optional[Sequence[int]] = None,
) -> RecoveryResult:
    """Unsupervised re-weighting: bootstrap a support from BIHT, then run n_rw weighted passes.

    With ``true_support`` the first pass is weighted by the real support instead of
    a BIHT estimate (benchmark mode); later passes re-estimate as usual. The returned
    result is the final pass, so ``iterations`` counts that pass only.
    """
    matrix, y = _check_problem(matrix, y)
    n = matrix.shape[1]
    k, cfg = _resolve(k, cfg, n)
    lam = _check_unit_interval("lambda", lam)
    if isinstance(n_rw, bool) or int(n_rw) != n_rw or n_rw < 1:
        raise InvalidParameterError(f"Re-weighting count n_rw must be >= 1, got {n_rw!r}")

    if true_support is None:
        result = biht(matrix, y, k, cfg)
        if result.degenerate:
            return result
        support = result.support
    else:
        support = _estimate_indices(true_support, n)

    for _ in range(int(n_rw)):
        result = biht_psw(matrix, y, k, support, lam, cfg)
        if result.degenerate:
            return result
        support = result.support
    return result


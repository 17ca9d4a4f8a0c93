"""Model stage: sparse ground-truth signals, Gaussian sensing matrices, sign measurements, support estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from src.onebit.errors import InvalidParameterError

NORM_TOLERANCE = 1e-12
# Slack so that products like (1 - 0.3) * 5 still count as an exact half.
_HALF_SLACK = 1e-9


def round_half_up(value: float) -> int:
    """Round a non-negative count half away from zero."""
    if value < 0:
        raise InvalidParameterError(f"Cannot round negative count {value}")
    return int(math.floor(value + 0.5 + _HALF_SLACK))


def sign_map(values: np.ndarray) -> np.ndarray:
    """Elementwise sign with sign(0) = +1, returned as float64 in {-1, +1}."""
    return np.where(np.asarray(values) >= 0, 1.0, -1.0)


@dataclass(frozen=True)
class SparseSignal:
    """Unit-norm k-sparse ground truth together with its support."""

    values: np.ndarray
    support: Tuple[int, ...]
    k: int

    @property
    def n(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class MeasurementEnsemble:
    """Sensing matrix with the one-bit measurements it produced."""

    matrix: np.ndarray
    signs: np.ndarray

    @property
    def m(self) -> int:
        return int(self.matrix.shape[0])


@dataclass(frozen=True)
class SupportEstimate:
    """A-priori support guess with its declared accuracy."""

    indices: Tuple[int, ...]
    rho: float
    has_false_positives: bool

    def __len__(self) -> int:
        return len(self.indices)


def _check_dimension(name: str, value: int) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise InvalidParameterError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def _check_rho(rho: float, name: str = "rho") -> float:
    if not 0.0 <= float(rho) <= 1.0:
        raise InvalidParameterError(f"{name} must lie in [0, 1], got {rho!r}")
    return float(rho)


def generate_signal(n: int, k: int, rng: np.random.Generator) -> SparseSignal:
    """Draw a uniform random k-subset support with standard normal magnitudes, normalized to unit norm."""
    n = _check_dimension("n", n)
    if isinstance(k, bool) or int(k) != k or not 0 < k <= n:
        raise InvalidParameterError(f"Sparsity k must satisfy 0 < k <= n={n}, got {k!r}")
    k = int(k)

    support = np.sort(rng.choice(n, size=k, replace=False))
    magnitudes = rng.standard_normal(k)
    zero_draws = magnitudes == 0.0
    while np.any(zero_draws):
        magnitudes[zero_draws] = rng.standard_normal(int(zero_draws.sum()))
        zero_draws = magnitudes == 0.0

    values = np.zeros(n, dtype=np.float64)
    values[support] = magnitudes
    values /= np.linalg.norm(values)
    return SparseSignal(values=values, support=tuple(int(i) for i in support), k=k)


def generate_matrix(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """m x n matrix with i.i.d. standard normal entries drawn from rng."""
    m = _check_dimension("m", m)
    n = _check_dimension("n", n)
    return rng.standard_normal((m, n))


def measure(matrix: np.ndarray, x: Union[SparseSignal, np.ndarray]) -> np.ndarray:
    """One-bit measurements y_i = sign(<x, phi_i>) with sign(0) = +1."""
    vector = x.values if isinstance(x, SparseSignal) else np.asarray(x, dtype=np.float64)
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or vector.ndim != 1 or matrix.shape[1] != vector.shape[0]:
        raise InvalidParameterError(
            f"Matrix shape {matrix.shape} does not match signal length {vector.shape}"
        )
    return sign_map(matrix @ vector)


def make_ensemble(m: int, signal: SparseSignal, rng: np.random.Generator) -> MeasurementEnsemble:
    """Draw a Gaussian matrix for the signal and take its sign measurements."""
    matrix = generate_matrix(m, signal.n, rng)
    return MeasurementEnsemble(matrix=matrix, signs=measure(matrix, signal))


def _draw_without_replacement(pool: Sequence[int], count: int, rng: np.random.Generator) -> Iterable[int]:
    if count == 0:
        return ()
    return (int(i) for i in rng.choice(np.asarray(pool, dtype=np.int64), size=count, replace=False))


def make_support_estimate(
    true_support: Sequence[int],
    rho: float,
    with_false_positives: bool,
    n: int,
    rng: np.random.Generator,
) -> SupportEstimate:
    """Keep round(rho*k) true indices and, optionally, add round((1-rho)*k) indices from outside the support."""
    rho = _check_rho(rho)
    n = _check_dimension("n", n)
    support = sorted(int(i) for i in true_support)
    k = len(support)
    if k == 0 or k > n:
        raise InvalidParameterError(f"True support size must satisfy 0 < k <= n={n}, got {k}")
    if len(set(support)) != k or support[0] < 0 or support[-1] >= n:
        raise InvalidParameterError(f"True support must hold distinct indices in [0, {n}), got {support}")

    n_correct = round_half_up(rho * k)
    n_false = round_half_up((1.0 - rho) * k) if with_false_positives else 0
    complement = sorted(set(range(n)) - set(support))
    if n_false > len(complement):
        raise InvalidParameterError(
            f"Cannot draw {n_false} false positives from {len(complement)} off-support indices (n={n}, k={k})"
        )

    chosen = set(_draw_without_replacement(support, n_correct, rng))
    chosen.update(_draw_without_replacement(complement, n_false, rng))
    return SupportEstimate(
        indices=tuple(sorted(chosen)),
        rho=rho,
        has_false_positives=bool(with_false_positives),
    )

"""Hard-thresholding primitives: top-k selection, prune, and support-estimate weights."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from src.onebit.errors import InvalidParameterError


@dataclass(frozen=True)
class WeightVector:
    """Per-coordinate selection weights in [0, 1]."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 1:
            raise InvalidParameterError(f"Weights must be a vector, got shape {weights.shape}")
        if np.any(weights < 0.0) or np.any(weights > 1.0):
            raise InvalidParameterError("Every weight must lie in [0, 1]")
        object.__setattr__(self, "weights", weights)


def top_k_indices(z: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest |z_i|; equal magnitudes go to the lowest index."""
    z = np.asarray(z)
    if z.ndim != 1:
        raise InvalidParameterError(f"Expected a vector, got shape {z.shape}")
    if isinstance(k, bool) or int(k) != k or not 0 <= k <= z.shape[0]:
        raise InvalidParameterError(f"k must satisfy 0 <= k <= {z.shape[0]}, got {k!r}")
    # stable sort keeps index order among ties
    order = np.argsort(-np.abs(z), kind="stable")
    return order[: int(k)]


def prune(z: np.ndarray, k: int) -> np.ndarray:
    """Copy of z with all but the k largest-magnitude entries set to zero."""
    z = np.asarray(z, dtype=np.float64)
    keep = top_k_indices(z, k)
    pruned = np.zeros_like(z)
    pruned[keep] = z[keep]
    return pruned


def build_weights(estimate: Iterable[int], rho: float, n: int) -> WeightVector:
    """w_i = 1 on the support estimate and 1 - rho elsewhere."""
    if not 0.0 <= float(rho) <= 1.0:
        raise InvalidParameterError(f"rho must lie in [0, 1], got {rho!r}")
    indices = [int(i) for i in estimate]
    if any(i < 0 or i >= n for i in indices):
        raise InvalidParameterError(f"Support estimate indices must lie in [0, {n})")
    weights = np.full(n, 1.0 - float(rho))
    weights[indices] = 1.0
    return WeightVector(weights)

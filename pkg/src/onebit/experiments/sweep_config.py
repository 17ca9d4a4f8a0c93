"""Sweep configuration: the experimental protocol and the algorithm variants it compares."""
from __future__ import annotations

import numbers
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

import yaml

from src.onebit.errors import InvalidParameterError
from src.onebit.model.signal_model import round_half_up
from src.onebit.recover.biht import RecoveryConfig

ALGORITHMS = ("biht", "biht_oracle", "biht_fourset", "biht_psw", "biht_urw")

# parameters each algorithm may sweep over
SWEEPABLE: Dict[str, Tuple[str, ...]] = {
    "biht": ("none",),
    "biht_oracle": ("none", "c"),
    "biht_fourset": ("none", "rho", "weight_rho"),
    "biht_psw": ("none", "rho", "weight_rho"),
    "biht_urw": ("none", "lambda", "n_rw"),
}

ESTIMATE_ALGORITHMS = ("biht_oracle", "biht_fourset", "biht_psw")

_VARIANT_KEYS = {
    "name", "algorithm", "sweep", "values", "rho", "weight_rho",
    "false_positives", "c", "lambda", "n_rw", "oracle_weights",
}
_SWEEP_KEYS = {
    "name", "n", "k", "m_grid", "trials", "tau", "tol", "max_iters",
    "master_seed", "variants", "variant",
}


def _real(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidParameterError(f"{name} must be a number, got {value!r}")
    return float(value)


def _flag(name: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise InvalidParameterError(f"{name} must be true or false, got {value!r}")
    return value


def _unit(name: str, value: Any) -> float:
    number = _real(name, value)
    if not 0.0 <= number <= 1.0:
        raise InvalidParameterError(f"{name} must lie in [0, 1], got {value!r}")
    return number


def _positive_int(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value or value < 1:
        raise InvalidParameterError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class VariantSpec:
    """One algorithm, its fixed parameters, and the grid of the parameter it sweeps."""

    name: str
    algorithm: str
    sweep: str = "none"
    values: Tuple[float, ...] = (0.0,)
    rho: float = 1.0
    weight_rho: Optional[float] = None
    false_positives: bool = False
    c: float = 0.0
    lam: float = 0.5
    n_rw: int = 1
    oracle_weights: bool = False

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise InvalidParameterError(f"Unknown algorithm {self.algorithm!r}; expected one of {', '.join(ALGORITHMS)}")
        if self.sweep not in SWEEPABLE[self.algorithm]:
            raise InvalidParameterError(
                f"Variant {self.name!r}: {self.algorithm} cannot sweep {self.sweep!r} "
                f"(allowed: {', '.join(SWEEPABLE[self.algorithm])})"
            )
        values = tuple(_real("values entry", v) for v in self.values)
        if not values:
            raise InvalidParameterError(f"Variant {self.name!r}: values must be nonempty")
        if self.sweep == "none" and len(values) != 1:
            raise InvalidParameterError(f"Variant {self.name!r}: a non-swept variant takes a single value")
        if len(set(values)) != len(values):
            raise InvalidParameterError(f"Variant {self.name!r}: duplicate parameter values {values}")
        object.__setattr__(self, "values", values)
        _unit("rho", self.rho)
        if self.weight_rho is not None:
            _unit("weight_rho", self.weight_rho)
        _unit("lambda", self.lam)
        object.__setattr__(self, "n_rw", _positive_int("n_rw", self.n_rw))
        if not 0.0 <= _real("c", self.c) < 1.0:
            raise InvalidParameterError(f"c must lie in [0, 1), got {self.c!r}")
        _flag("false_positives", self.false_positives)
        _flag("oracle_weights", self.oracle_weights)
        for value in values:
            self.settings(value)

    @property
    def needs_estimate(self) -> bool:
        return self.algorithm in ESTIMATE_ALGORITHMS

    def settings(self, value: float) -> Dict[str, Any]:
        """Fixed parameters with the swept one replaced by value."""
        resolved: Dict[str, Any] = {
            "rho": self.rho,
            "weight_rho": self.weight_rho,
            "false_positives": self.false_positives,
            "c": self.c,
            "lambda": self.lam,
            "n_rw": self.n_rw,
            "oracle_weights": self.oracle_weights,
        }
        if self.sweep == "n_rw":
            resolved["n_rw"] = _positive_int("n_rw", value)
        elif self.sweep == "c":
            if not 0.0 <= value < 1.0:
                raise InvalidParameterError(f"c must lie in [0, 1), got {value!r}")
            resolved["c"] = float(value)
        elif self.sweep != "none":
            resolved[self.sweep] = _unit(self.sweep, value)
        if resolved["weight_rho"] is None:
            resolved["weight_rho"] = resolved["rho"]
        return resolved

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "algorithm": self.algorithm,
            "sweep": self.sweep,
            "values": list(self.values),
            "rho": self.rho,
            "weight_rho": self.weight_rho,
            "false_positives": self.false_positives,
            "c": self.c,
            "lambda": self.lam,
            "n_rw": self.n_rw,
            "oracle_weights": self.oracle_weights,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "VariantSpec":
        if not isinstance(data, Mapping):
            raise InvalidParameterError(f"Variant entry must be a mapping, got {type(data).__name__}")
        unknown = set(data) - _VARIANT_KEYS
        if unknown:
            raise InvalidParameterError(f"Unknown variant field(s): {', '.join(sorted(unknown))}")
        if "algorithm" not in data:
            raise InvalidParameterError("Variant entry is missing 'algorithm'")
        algorithm = str(data["algorithm"])
        values = data.get("values", [0.0])
        if not isinstance(values, (list, tuple)):
            values = [values]
        weight_rho = data.get("weight_rho")
        return cls(
            name=str(data.get("name") or algorithm),
            algorithm=algorithm,
            sweep=str(data.get("sweep", "none")),
            values=tuple(values),
            rho=_real("rho", data.get("rho", 1.0)),
            weight_rho=None if weight_rho is None else _real("weight_rho", weight_rho),
            false_positives=_flag("false_positives", data.get("false_positives", False)),
            c=_real("c", data.get("c", 0.0)),
            lam=_real("lambda", data.get("lambda", 0.5)),
            n_rw=data.get("n_rw", 1),
            oracle_weights=_flag("oracle_weights", data.get("oracle_weights", False)),
        )


@dataclass(frozen=True)
class SweepConfig:
    """Monte-Carlo protocol: problem size, measurement grid, trial count, recovery settings, seed."""

    m_grid: Tuple[int, ...]
    variants: Tuple[VariantSpec, ...]
    n: int = 256
    k: int = 8
    trials: int = 100
    tau: float = 0.001
    tol: float = 1e-10
    max_iters: int = 1000
    master_seed: int = 0
    name: str = "sweep"

    def __post_init__(self) -> None:
        n = _positive_int("n", self.n)
        k = _positive_int("k", self.k)
        if k > n:
            raise InvalidParameterError(f"k={k} exceeds n={n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "trials", _positive_int("trials", self.trials))
        grid = tuple(_positive_int("m_grid entry", m) for m in self.m_grid)
        if not grid:
            raise InvalidParameterError("m_grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidParameterError(f"m_grid must be strictly increasing, got {list(grid)}")
        object.__setattr__(self, "m_grid", grid)
        seed = self.master_seed
        if isinstance(seed, bool) or not isinstance(seed, numbers.Real) or int(seed) != seed or seed < 0:
            raise InvalidParameterError(f"master_seed must be a non-negative integer, got {self.master_seed!r}")
        object.__setattr__(self, "master_seed", int(seed))
        variants = tuple(self.variants)
        if not variants:
            raise InvalidParameterError("At least one variant is required")
        names = [v.name for v in variants]
        if len(set(names)) != len(names):
            raise InvalidParameterError(f"Variant names must be unique, got {names}")
        object.__setattr__(self, "variants", variants)
        object.__setattr__(self, "tau", _real("tau", self.tau))
        object.__setattr__(self, "tol", _real("tol", self.tol))
        for variant in variants:
            if variant.needs_estimate and variant.false_positives:
                for value in variant.values:
                    rho = variant.settings(value)["rho"]
                    if k + round_half_up((1.0 - rho) * k) > n:
                        raise InvalidParameterError(
                            f"Variant {variant.name!r}: not enough off-support indices for false positives"
                        )
        # validates tau / tol / max_iters
        self.recovery_config()

    def recovery_config(self) -> RecoveryConfig:
        return RecoveryConfig(tau=self.tau, k=self.k, max_iters=self.max_iters, tol=self.tol)

    def with_overrides(self, master_seed: Optional[int] = None, trials: Optional[int] = None) -> "SweepConfig":
        """Copy with the CLI's --seed / --trials applied."""
        changes: Dict[str, Any] = {}
        if master_seed is not None:
            changes["master_seed"] = master_seed
        if trials is not None:
            changes["trials"] = trials
        return replace(self, **changes) if changes else self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "n": self.n,
            "k": self.k,
            "m_grid": list(self.m_grid),
            "trials": self.trials,
            "tau": self.tau,
            "tol": self.tol,
            "max_iters": self.max_iters,
            "master_seed": self.master_seed,
            "variants": [v.to_dict() for v in self.variants],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], name: str = "sweep") -> "SweepConfig":
        if not isinstance(data, Mapping):
            raise InvalidParameterError(f"Sweep config must be a mapping, got {type(data).__name__}")
        unknown = set(data) - _SWEEP_KEYS
        if unknown:
            raise InvalidParameterError(f"Unknown sweep field(s): {', '.join(sorted(unknown))}")
        if "m_grid" not in data:
            raise InvalidParameterError("Sweep config is missing 'm_grid'")
        raw_variants: Iterable[Any]
        if "variants" in data:
            raw_variants = data["variants"] or []
        elif "variant" in data:
            raw_variants = [data["variant"]]
        else:
            raise InvalidParameterError("Sweep config needs 'variants' (or a single 'variant')")
        m_grid = data["m_grid"]
        if not isinstance(m_grid, (list, tuple)):
            raise InvalidParameterError(f"m_grid must be a list, got {m_grid!r}")
        defaults = cls.__dataclass_fields__
        return cls(
            name=str(data.get("name", name)),
            n=data.get("n", defaults["n"].default),
            k=data.get("k", defaults["k"].default),
            m_grid=tuple(m_grid),
            trials=data.get("trials", defaults["trials"].default),
            tau=_real("tau", data.get("tau", defaults["tau"].default)),
            tol=_real("tol", data.get("tol", defaults["tol"].default)),
            max_iters=data.get("max_iters", defaults["max_iters"].default),
            master_seed=data.get("master_seed", defaults["master_seed"].default),
            variants=tuple(VariantSpec.from_dict(v) for v in raw_variants),
        )


def load_document(path: Path) -> Any:
    """Read a YAML or JSON document; raise with the path on any read/parse failure."""
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        with path.open("r", encoding="utf-8") as f:
            return yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as exc:
        raise InvalidParameterError(f"Failed to read config file {path}: {exc}") from exc


def load_sweep_config(path: Path) -> SweepConfig:
    """Parse a sweep config file into a validated SweepConfig."""
    document = load_document(path)
    try:
        return SweepConfig.from_dict(document or {}, name=path.stem)
    except InvalidParameterError as exc:
        raise InvalidParameterError(f"{path}: {exc}") from exc


def dump_provenance(provenance: Mapping[str, Any], path: Path) -> None:
    """Write sweep provenance as YAML."""
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with path.open("w", encoding="utf-8") as f:
            yaml.safe_dump(dict(provenance), f, sort_keys=False)
    except OSError as exc:
        raise OSError(f"Failed to write provenance file {path}: {exc}") from exc


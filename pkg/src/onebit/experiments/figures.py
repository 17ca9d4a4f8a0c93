"""Bundled figure sweeps read from config/figures.yaml."""
from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List

from src.onebit.errors import InvalidParameterError
from src.onebit.experiments.sweep_config import SweepConfig, load_document

FIGURE_NAMES = ["fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig5a", "fig5b"]


def get_project_root() -> Path:
    """Return repository root inferred from this file's location."""
    return Path(__file__).resolve().parents[3]


def default_figures_path() -> Path:
    return get_project_root() / "config" / "figures.yaml"


def load_figures(path: Path | None = None) -> Dict[str, SweepConfig]:
    """Parse every figure entry, merging the shared defaults into each."""
    path = path or default_figures_path()
    document = load_document(path) or {}
    defaults: Dict[str, Any] = dict(document.get("defaults") or {})
    entries = document.get("figures") or {}
    if not entries:
        raise InvalidParameterError(f"No figures found in {path}")

    figures: Dict[str, SweepConfig] = {}
    for name, entry in entries.items():
        merged = {**defaults, **(entry or {}), "name": name}
        try:
            figures[name] = SweepConfig.from_dict(merged, name=name)
        except InvalidParameterError as exc:
            raise InvalidParameterError(f"{path} [{name}]: {exc}") from exc
    return figures


def load_figure(name: str, path: Path | None = None) -> SweepConfig:
    figures = load_figures(path)
    if name not in figures:
        raise InvalidParameterError(f"Unknown figure {name!r}; available: {', '.join(sorted(figures))}")
    return figures[name]


def resolve_names(name: str) -> List[str]:
    """Expand 'all' to every bundled figure name."""
    if name == "all":
        return list(FIGURE_NAMES)
    if name not in FIGURE_NAMES:
        raise InvalidParameterError(f"Unknown figure {name!r}; expected one of {', '.join(FIGURE_NAMES)} or all")
    return [name]

"""Export stage: mean MSE versus m as a standalone SVG line plot, one line per variant setting."""
from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from src.onebit.errors import InvalidParameterError  # noqa: E402
from src.onebit.experiments.sweep import SweepResult, SweepRow  # noqa: E402

MARKERS = ["o", "s", "^", "D", "v", "P", "X", "*"]
COLORS = ["#000000", "#1f77b4", "#d62728", "#2ca02c", "#00bcd4", "#9467bd", "#ff7f0e", "#8c564b"]

# fixed salt and no date keep the SVG byte-identical across runs
PLOT_PARAMS = {
    "svg.hashsalt": "onebit-sweep",
    "svg.fonttype": "none",
    "font.family": "sans-serif",
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 5,
    "figure.figsize": (6.0, 4.0),
}


def series_label(row: SweepRow) -> str:
    if row.param_name == "none":
        return row.variant
    return f"{row.variant} {row.param_name}={row.param_value:g}"


def group_series(rows: List[SweepRow]) -> List[Tuple[str, List[SweepRow]]]:
    """Rows grouped per (variant, parameter value), in first-seen order, each sorted by m."""
    grouped: Dict[Tuple[str, float], List[SweepRow]] = {}
    for row in rows:
        grouped.setdefault((row.variant, row.param_value), []).append(row)
    return [(series_label(members[0]), sorted(members, key=lambda r: r.m)) for members in grouped.values()]


def emit_plot(result: SweepResult, path: Path, title: str | None = None) -> int:
    """Render the sweep to SVG; return the number of plotted lines."""
    if not result.rows:
        raise InvalidParameterError("Cannot plot an empty sweep result")
    path = Path(path)
    series = group_series(result.rows)
    if title is None:
        title = str(result.provenance.get("config", {}).get("name", "sweep"))

    with plt.rc_context(PLOT_PARAMS):
        fig, ax = plt.subplots()
        try:
            for idx, (label, members) in enumerate(series):
                (line,) = ax.plot(
                    [r.m for r in members],
                    [r.mean_mse for r in members],
                    marker=MARKERS[idx % len(MARKERS)],
                    color=COLORS[idx % len(COLORS)],
                    label=label,
                )
                line.set_gid(f"series-{idx}")
            ax.set_xlabel("m (measurements)")
            ax.set_ylabel("mean MSE")
            ax.set_title(title)
            ax.grid(True, linewidth=0.25)
            legend = ax.legend(loc="upper right")
            legend.set_gid("legend")
            path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OSError(f"Failed to write plot file {path}: {exc}") from exc
        finally:
            plt.close(fig)
    return len(series)

"""Control script for one-bit recovery experiments: single runs, sweeps, bundled figures, acceptance."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from src.onebit import __version__
from src.onebit.errors import InvalidParameterError, TrialError
from src.onebit.experiments.acceptance import AcceptanceSettings, CriterionResult, run_acceptance
from src.onebit.experiments.figures import load_figure, resolve_names
from src.onebit.experiments.sweep import SweepResult, run_trial, run_sweep
from src.onebit.experiments.sweep_config import SweepConfig, dump_provenance, load_sweep_config
from src.onebit.export.build_csv import emit_csv, emit_trials_csv
from src.onebit.export.plot_svg import emit_plot

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_VERIFY = 3

DEFAULT_FIGURE_DIR = Path("data/figures")


class UsageError(Exception):
    pass


class StrictParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so cli_main owns the exit code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(message)


class Reporter:
    """Stage banners on stdout; silenced by --quiet."""

    def __init__(self, quiet: bool = False):
        self.quiet = quiet

    def __call__(self, message: str = "") -> None:
        if not self.quiet:
            print(message)


def run_step(label: str, func: Callable[[], object], say: Reporter):
    """Announce one stage, run it and report completion; exceptions propagate to cli_main."""
    say(f"=== Running {label} ===")
    outcome = func()
    say(f"{label} completed successfully.\n")
    return outcome


def non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> StrictParser:
    parser = StrictParser(prog="run_experiments.py", description="One-bit compressive sensing with partial support information.")
    parser.add_argument("--quiet", action="store_true", help="Suppress per-stage progress output.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=StrictParser)

    rec = sub.add_parser("recover", help="Recover one instance with every variant of a config and print its metrics.")
    rec.add_argument("--config", type=Path, required=True, help="Sweep config (JSON or YAML).")
    rec.add_argument("--m", type=positive_int, help="Measurement count (default: first m of the grid).")
    rec.add_argument("--trial", type=non_negative_int, default=0, help="Trial index selecting the substream.")
    rec.add_argument("--seed", type=non_negative_int, help="Override the config master seed.")

    sw = sub.add_parser("sweep", help="Run a sweep config and write its CSV (and optionally an SVG plot).")
    sw.add_argument("--config", type=Path, required=True)
    sw.add_argument("--out", type=Path, required=True, help="Sweep CSV output path.")
    sw.add_argument("--plot", type=Path, help="Optional SVG output path.")
    sw.add_argument("--seed", type=non_negative_int)
    sw.add_argument("--trials", type=positive_int)
    sw.add_argument("--workers", type=positive_int, default=1)
    sw.add_argument("--trials-out", type=Path, help="Optional per-trial CSV output path.")
    sw.add_argument("--provenance-out", type=Path, help="Optional YAML provenance output path.")

    fig = sub.add_parser("figures", help="Run bundled figure configs, writing <name>.csv and <name>.svg.")
    fig.add_argument("--name", required=True, choices=resolve_names("all") + ["all"])
    fig.add_argument("--trials", type=positive_int)
    fig.add_argument("--seed", type=non_negative_int)
    fig.add_argument("--workers", type=positive_int, default=1)
    fig.add_argument("--out-dir", type=Path, default=DEFAULT_FIGURE_DIR)

    ver = sub.add_parser("verify", help="Run the acceptance suite and report pass/fail per criterion.")
    ver.add_argument("--quick", action="store_true", help="Reduced trial counts and m grid.")
    ver.add_argument("--workers", type=positive_int, default=1)
    ver.add_argument("--seed", type=non_negative_int, default=2024)
    return parser


def summarize(result: SweepResult) -> str:
    degenerate = sum(r.degenerate_count for r in result.rows)
    return f"{len(result.rows)} rows, {len(result.trials)} trials, {degenerate} degenerate"


def execute_sweep(cfg: SweepConfig, workers: int, csv_path: Path, plot_path: Optional[Path], say: Reporter) -> SweepResult:
    result = run_step(f"sweep {cfg.name}", lambda: run_sweep(cfg, workers=workers), say)
    emit_csv(result, csv_path)
    message = f"Sweep complete: {summarize(result)}, wrote {csv_path}"
    if plot_path is not None:
        lines = emit_plot(result, plot_path, title=cfg.name)
        message += f" and {plot_path} ({lines} lines)"
    print(message)
    return result


def cmd_recover(args: argparse.Namespace, say: Reporter) -> int:
    cfg = load_sweep_config(args.config).with_overrides(master_seed=args.seed, trials=max(args.trial + 1, 1))
    m = args.m if args.m is not None else cfg.m_grid[0]
    if m not in cfg.m_grid:
        cfg = replace(cfg, m_grid=(m,))
    say(f"=== Running recover {cfg.name} (n={cfg.n}, k={cfg.k}, m={m}, trial={args.trial}, seed={cfg.master_seed}) ===")
    for vi, variant in enumerate(cfg.variants):
        for pi, value in enumerate(variant.values):
            metrics = run_trial(cfg, m, args.trial, vi, pi)
            setting = "" if variant.sweep == "none" else f" {variant.sweep}={value:g}"
            print(
                f"{variant.name}{setting}: mse={metrics.mse:.6g} consistency={metrics.consistency:.4f} "
                f"support_recall={metrics.support_recall:.4f} iterations={metrics.iterations} "
                f"degenerate={metrics.degenerate}"
            )
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, say: Reporter) -> int:
    cfg = load_sweep_config(args.config).with_overrides(master_seed=args.seed, trials=args.trials)
    result = execute_sweep(cfg, args.workers, args.out, args.plot, say)
    if args.trials_out is not None:
        count = emit_trials_csv(result, args.trials_out)
        print(f"Wrote {count} trial rows to {args.trials_out}")
    if args.provenance_out is not None:
        dump_provenance(result.provenance, args.provenance_out)
        print(f"Wrote provenance to {args.provenance_out}")
    say(f"Provenance: master_seed={result.provenance['master_seed']} library_version={result.provenance['library_version']}")
    return EXIT_OK


def cmd_figures(args: argparse.Namespace, say: Reporter) -> int:
    for name in resolve_names(args.name):
        cfg = load_figure(name).with_overrides(master_seed=args.seed, trials=args.trials)
        execute_sweep(cfg, args.workers, args.out_dir / f"{name}.csv", args.out_dir / f"{name}.svg", say)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, say: Reporter) -> int:
    settings = AcceptanceSettings.build(args.quick, master_seed=args.seed, workers=args.workers)
    mode = "quick" if args.quick else "full"
    say(f"=== Running acceptance suite ({mode}: {settings.trials} trials, m in {list(settings.m_grid)}) ===")

    def report(outcome: CriterionResult) -> None:
        status = "PASS" if outcome.passed else "FAIL"
        print(f"[{status}] {outcome.key}: {outcome.description} ({outcome.detail})")

    results: List[CriterionResult] = run_acceptance(settings, on_result=report)
    failed = [r.key for r in results if not r.passed]
    if failed:
        print(f"Acceptance failed: {len(failed)} of {len(results)} criteria ({', '.join(failed)})")
        return EXIT_VERIFY
    print(f"Acceptance passed: {len(results)} criteria")
    return EXIT_OK


COMMANDS = {
    "recover": cmd_recover,
    "sweep": cmd_sweep,
    "figures": cmd_figures,
    "verify": cmd_verify,
}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, dispatch the subcommand and map failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except UsageError as exc:
        print(f"Usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help / --version
        return int(exc.code or 0)

    say = Reporter(quiet=args.quiet)
    try:
        return COMMANDS[args.command](args, say)
    except TrialError as exc:
        print(f"{args.command} failed.", file=sys.stderr)
        print(f"Error: {exc}", file=sys.stderr)
        if exc.__cause__ is not None:
            print(f"Cause: {type(exc.__cause__).__name__}: {exc.__cause__}", file=sys.stderr)
        return EXIT_RUNTIME
    except (InvalidParameterError, OSError, KeyError) as exc:
        print(f"{args.command} failed.", file=sys.stderr)
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()

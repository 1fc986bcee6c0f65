"""dpmbq CLI - estimates, baselines and the coverage / convergence / complexity studies."""

import errno
import json
import logging
from pathlib import Path
from typing import Annotated, Any

import numpy as np
import pandas as pd
import typer
from filelock import Timeout
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from quadrature.errors import InputFormatError, NumericalFailureError
from quadrature.models import SampleSet
from quadrature.sampler import HyperPriors, SamplerConfig, substream
from simulation.models import TaskSpec
from simulation.testbed import mc_t_interval, sample_task, task_truth

from .io import detect_format, file_sha256, load_samples, load_task, samples_to_csv
from .safety import ReportWriter
from .settings import artifact_version, load_settings
from .workflow import (
    estimate,
    estimate_report,
    kernel_mean_table,
    level_key,
    run_complexity,
    run_convergence,
    run_coverage,
)

# Exit codes
EXIT_SYSTEM_ERROR = 1
EXIT_INVALID_INPUT = 2
EXIT_NUMERICAL_FAILURE = 3

DEFAULT_LEVELS = "0.5,0.9"


def _create_console(stderr: bool = False) -> Console:
    """Create a Rich console instance for table output."""
    return Console(stderr=stderr)


# Error message templates
ERROR_LOCK_TIMEOUT = "Unable to acquire output lock: another run may be writing this file"
ERROR_PERMISSION_DENIED = "Permission denied accessing input or output files"
ERROR_INSUFFICIENT_DISK_SPACE = "Insufficient disk space for writing results"
ERROR_INPUT_INVALID = "Invalid input"
ERROR_NUMERICAL_FAILURE = "Numerical failure"


# Create the Typer app
app = typer.Typer(help="Bayesian quadrature for integrals against distributions known only through samples")


@app.callback()
def configure(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log debug details to stderr")] = False,
) -> None:
    """Configure logging for every command."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=_create_console(stderr=True), show_path=False)],
        force=True,
    )


def handle_run_error(operation: str, error: Exception) -> None:
    """
    Report a failed command on stderr and exit with the matching code.

    Args:
        operation: Description of the operation that failed
        error: The exception that was raised
    """
    if isinstance(error, typer.Exit):
        raise error

    # Handle JSON parsing errors (must be before ValueError since JSONDecodeError inherits from ValueError)
    if isinstance(error, json.JSONDecodeError):
        typer.echo(f"{ERROR_INPUT_INVALID}: {error.msg} (line {error.lineno}, column {error.colno})", err=True)
        code = EXIT_INVALID_INPUT
    elif isinstance(error, InputFormatError | ValueError):
        typer.echo(f"{ERROR_INPUT_INVALID}: {error}", err=True)
        code = EXIT_INVALID_INPUT
    elif isinstance(error, FileNotFoundError):
        typer.echo(f"Error {operation}: {error}", err=True)
        code = EXIT_INVALID_INPUT
    elif isinstance(error, NumericalFailureError):
        typer.echo(f"{ERROR_NUMERICAL_FAILURE} while {operation}: {error}", err=True)
        code = EXIT_NUMERICAL_FAILURE
    elif isinstance(error, Timeout):
        typer.echo(ERROR_LOCK_TIMEOUT, err=True)
        code = EXIT_SYSTEM_ERROR
    elif isinstance(error, PermissionError):
        typer.echo(ERROR_PERMISSION_DENIED, err=True)
        code = EXIT_SYSTEM_ERROR
    elif isinstance(error, OSError) and getattr(error, "errno", None) == errno.ENOSPC:
        typer.echo(ERROR_INSUFFICIENT_DISK_SPACE, err=True)
        code = EXIT_SYSTEM_ERROR
    else:
        typer.echo(f"Error {operation}: {error}", err=True)
        code = EXIT_SYSTEM_ERROR

    raise typer.Exit(code)


def parse_float_list(raw: str, name: str) -> list[float]:
    try:
        values = [float(item) for item in raw.split(",") if item.strip()]
    except ValueError:
        raise ValueError(f"{name} must be a comma-separated list of numbers, got {raw!r}")
    if not values:
        raise ValueError(f"{name} must not be empty")
    return values


def parse_int_list(raw: str, name: str) -> list[int]:
    try:
        values = [int(item) for item in raw.split(",") if item.strip()]
    except ValueError:
        raise ValueError(f"{name} must be a comma-separated list of integers, got {raw!r}")
    if not values:
        raise ValueError(f"{name} must not be empty")
    return values


def parse_levels(raw: str) -> list[float]:
    levels = parse_float_list(raw, "levels")
    for level in levels:
        if not 0 < level < 1:
            raise ValueError(f"levels must lie in (0, 1), got {level}")
    return levels


def parse_grid(raw: str) -> np.ndarray:
    """Parse `a:b:k` into k evenly spaced points from a to b."""
    parts = raw.split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"kernel-mean grid must look like a:b:k, got {raw!r}")
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi) or count < 2:
        raise ValueError(f"kernel-mean grid needs finite a < b and k >= 2, got {raw!r}")
    return np.linspace(lo, hi, count)


def build_priors(lengthscale: float | None, concentration: float | None) -> HyperPriors:
    return HyperPriors(fixed_lengthscale=lengthscale, fixed_concentration=concentration)


def build_config(
    draws: int, truncation: int, burn_in: int, between: int, seed: int, workers: int | None
) -> SamplerConfig:
    workers = load_settings().resolve_workers(workers)
    return SamplerConfig(
        outer_draws=draws,
        truncation=truncation,
        burn_in_sweeps=burn_in,
        between_sweeps=between,
        seed=seed,
        workers=workers,
    )


def build_meta(command: str, config: SamplerConfig | None = None, priors: HyperPriors | None = None, **extra: Any) -> dict[str, Any]:
    """Reproducibility metadata embedded in every report."""
    meta: dict[str, Any] = {"command": command, "version": artifact_version()}
    if config is not None:
        meta["seed"] = config.seed
        meta["config"] = config.model_dump(exclude={"workers"})
    if priors is not None:
        meta["priors"] = priors.model_dump()
    meta.update(extra)
    return meta


def to_json(document: dict[str, Any]) -> str:
    return json.dumps(document, indent=2) + "\n"


def emit(text: str, out: Path | None) -> None:
    """Write a result body to --out (atomically) or to stdout."""
    if out is None:
        typer.echo(text, nl=False)
    else:
        ReportWriter().write_text(out, text)
        typer.echo(f"Results written to {out}", err=True)


def emit_table(frame: pd.DataFrame, out: Path | None, meta: dict[str, Any], output_format: str) -> None:
    """Write a CSV table plus a `<out>.meta.json` sidecar, or show the table on stdout."""
    if out is not None:
        emit(frame.to_csv(index=False), out)
        ReportWriter().write_text(out.with_name(f"{out.name}.meta.json"), to_json(meta))
    elif output_format == "table":
        display_frame_table(frame)
    else:
        typer.echo(frame.to_csv(index=False), nl=False)


def display_frame_table(frame: pd.DataFrame) -> None:
    """
    Display a result table in a formatted Rich table.

    Args:
        frame: Result rows to display
    """
    console = _create_console()
    table = Table(show_header=True, header_style="bold magenta")
    for column in frame.columns:
        table.add_column(str(column))
    for row in frame.itertuples(index=False):
        table.add_row(*(f"{value:.4f}" if isinstance(value, float) else str(value) for value in row))
    console.print(table)


def display_estimate_table(report: dict[str, Any]) -> None:
    """
    Display the posterior summary of an estimate.

    Args:
        report: Estimate report body
    """
    console = _create_console(stderr=True)
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Quantity")
    table.add_column("Value")
    table.add_row("mean", f"{report['mean']:.6g}")
    table.add_row("sd", f"{report['sd']:.6g}")
    for level, (lo, hi) in report["intervals"].items():
        table.add_row(f"{level} interval", f"[{lo:.6g}, {hi:.6g}]")
    if "truth" in report:
        table.add_row("truth", f"{report['truth']:.6g}")
        table.add_row("wasserstein", f"{report['wasserstein']:.6g}")
    console.print(table)


# Shared option types
InputOption = Annotated[Path, typer.Option("--input", help="Sample file: CSV (x1..xd,f) or JSON {x, f}")]
TaskOption = Annotated[Path, typer.Option("--task", help="Task JSON: integrand polynomial and Gaussian-mixture distribution")]
SeedOption = Annotated[int, typer.Option("--seed", min=0, help="64-bit seed for all random streams")]
OutOption = Annotated[Path | None, typer.Option("--out", help="Output file (written atomically)")]
DrawsOption = Annotated[int, typer.Option("--draws", min=1, help="Posterior draws of the integral")]
TruncationOption = Annotated[int, typer.Option("--truncation", min=1, help="Stick-breaking truncation level")]
BurnInOption = Annotated[int, typer.Option("--burn-in", min=1, help="Gibbs sweeps before each draw")]
BetweenOption = Annotated[int, typer.Option("--between-sweeps", min=1, help="Gibbs sweeps between burn-in and the draw")]
WorkersOption = Annotated[int | None, typer.Option("--workers", min=1, help="Worker threads (capped by DPMBQ_THREADS)")]
LengthscaleOption = Annotated[float | None, typer.Option("--lengthscale", min=0.0, help="Fix the kernel lengthscale instead of drawing it")]
ConcentrationOption = Annotated[float | None, typer.Option("--concentration", min=0.0, help="Fix the DP concentration instead of drawing it")]
FormatOption = Annotated[str, typer.Option("--format", help="Output format: csv or table")]


@app.command("estimate")
def estimate_command(
    input_path: InputOption,
    input_format: Annotated[str | None, typer.Option("--input-format", "--format", help="Input format: csv or json")] = None,
    draws: DrawsOption = 500,
    seed: SeedOption = 0,
    levels: Annotated[str, typer.Option("--levels", help="Comma-separated credible levels")] = DEFAULT_LEVELS,
    standardize_f: Annotated[bool, typer.Option("--standardize-f", help="Center and scale f(X) before sampling")] = False,
    out: OutOption = None,
    task_path: Annotated[Path | None, typer.Option("--task", help="Known task, to report truth and distance")] = None,
    truncation: TruncationOption = 500,
    burn_in: BurnInOption = 100,
    between: BetweenOption = 1,
    workers: WorkersOption = None,
    lengthscale: LengthscaleOption = None,
    concentration: ConcentrationOption = None,
    table: Annotated[bool, typer.Option("--table", help="Also print a summary table to stderr")] = False,
    kernel_mean_grid: Annotated[
        str | None, typer.Option("--kernel-mean-grid", help="Grid a:b:k for kernel-mean realisations (d = 1)")
    ] = None,
    kernel_mean_out: Annotated[
        Path | None, typer.Option("--kernel-mean-out", help="CSV file for kernel-mean realisations")
    ] = None,
) -> None:
    """Estimate the posterior over the integral from a sample file.

    Usage: dpmbq estimate --input samples.csv --draws 500 --seed 7 --levels 0.5,0.9 --out report.json
    """
    try:
        level_values = parse_levels(levels)
        if (kernel_mean_grid is None) != (kernel_mean_out is None):
            raise ValueError("--kernel-mean-grid and --kernel-mean-out must be given together")
        grid = parse_grid(kernel_mean_grid) if kernel_mean_grid is not None else None
        fmt = detect_format(input_path, input_format)
        samples = load_samples(input_path, fmt)
        if grid is not None and samples.d != 1:
            raise ValueError(f"kernel-mean output needs one-dimensional samples, got d={samples.d}")
        task = load_task(task_path) if task_path is not None else None
        priors = build_priors(lengthscale, concentration)
        config = build_config(draws, truncation, burn_in, between, seed, workers)

        posterior = estimate(samples, priors, config, standardize_f=standardize_f)
        meta = build_meta(
            "estimate",
            config,
            priors,
            input_sha256=file_sha256(input_path),
            input_format=fmt,
            n=samples.n,
            d=samples.d,
            standardize_f=standardize_f,
            levels=[level_key(level) for level in level_values],
        )
        report = estimate_report(posterior, level_values, meta, task=task, samples=samples, priors=priors)
        emit(to_json(report), out)
        if grid is not None:
            emit_table(kernel_mean_table(samples, priors, config, grid), kernel_mean_out, meta, "csv")
        if table:
            display_estimate_table(report)

    except Exception as e:
        handle_run_error("estimating the integral", e)


@app.command("baseline")
def baseline_command(
    input_path: InputOption,
    level: Annotated[float, typer.Option("--level", help="Nominal confidence level")] = 0.5,
    input_format: Annotated[str | None, typer.Option("--input-format", "--format", help="Input format: csv or json")] = None,
    out: OutOption = None,
) -> None:
    """Monte Carlo estimate with a Student-t confidence interval.

    Usage: dpmbq baseline --input samples.csv --level 0.5
    """
    try:
        fmt = detect_format(input_path, input_format)
        samples = load_samples(input_path, fmt)
        lo, hi = mc_t_interval(samples.values, level)
        report = {
            "mean": float(samples.values.mean()),
            "interval": [lo, hi],
            "level": level,
            "meta": build_meta("baseline", input_sha256=file_sha256(input_path), input_format=fmt, n=samples.n),
        }
        emit(to_json(report), out)

    except Exception as e:
        handle_run_error("computing the baseline interval", e)


@app.command("coverage")
def coverage_command(
    task_path: TaskOption,
    trials: Annotated[int, typer.Option("--trials", min=1, help="Repetitions per sample size")] = 100,
    n: Annotated[str, typer.Option("--n", help="Comma-separated sample sizes")] = "10,20,50",
    level: Annotated[float, typer.Option("--level", help="Nominal interval level")] = 0.5,
    seed: SeedOption = 0,
    out: OutOption = None,
    baseline_trials: Annotated[int, typer.Option("--baseline-trials", min=1, help="Repetitions for the t-interval")] = 1000,
    methods: Annotated[str, typer.Option("--methods", help="Comma-separated methods: dpmbq,t-interval")] = "dpmbq,t-interval",
    draws: DrawsOption = 500,
    truncation: TruncationOption = 500,
    burn_in: BurnInOption = 100,
    between: BetweenOption = 1,
    workers: WorkersOption = None,
    lengthscale: LengthscaleOption = None,
    concentration: ConcentrationOption = None,
    output_format: FormatOption = "csv",
) -> None:
    """Coverage frequency of DPMBQ credible intervals and the t-interval.

    Usage: dpmbq coverage --task task.json --trials 100 --n 10,20,50 --level 0.5 --seed 1 --out coverage.csv
    """
    try:
        task = load_task(task_path)
        ns = parse_int_list(n, "n")
        method_list = [item.strip() for item in methods.split(",") if item.strip()]
        priors = build_priors(lengthscale, concentration)
        config = build_config(draws, truncation, burn_in, between, seed, workers)

        frame = run_coverage(task, ns, trials, level, priors, config, baseline_trials=baseline_trials, methods=method_list)
        meta = build_meta(
            "coverage", config, priors, task=task.model_dump(), task_sha256=file_sha256(task_path), truth=task_truth(task), level=level
        )
        emit_table(frame, out, meta, output_format)

    except Exception as e:
        handle_run_error("running the coverage study", e)


@app.command("convergence")
def convergence_command(
    task_path: TaskOption,
    n_grid: Annotated[str, typer.Option("--n-grid", help="Comma-separated ascending sample sizes")] = "10,20,40,80,160",
    reps: Annotated[int, typer.Option("--reps", min=1, help="Repetitions per sample size")] = 20,
    seed: SeedOption = 0,
    out: OutOption = None,
    draws: DrawsOption = 500,
    truncation: TruncationOption = 500,
    burn_in: BurnInOption = 100,
    between: BetweenOption = 1,
    workers: WorkersOption = None,
    lengthscale: LengthscaleOption = None,
    concentration: ConcentrationOption = None,
    output_format: FormatOption = "csv",
) -> None:
    """Wasserstein distance to the truth as a function of n, with a fitted log-log slope.

    Usage: dpmbq convergence --task task.json --n-grid 10,20,40,80,160 --reps 20 --seed 1 --out convergence.csv
    """
    try:
        task = load_task(task_path)
        grid = parse_int_list(n_grid, "n-grid")
        priors = build_priors(lengthscale, concentration)
        config = build_config(draws, truncation, burn_in, between, seed, workers)

        frame, trend = run_convergence(task, grid, reps, priors, config)
        slope_lo, slope_hi = trend.slope_interval(0.95, points=len(frame))
        trend_block = {**trend.model_dump(), "slope_ci95": [slope_lo, slope_hi]}
        meta = build_meta(
            "convergence", config, priors, task=task.model_dump(), task_sha256=file_sha256(task_path), trend=trend_block
        )
        emit_table(frame, out, meta, output_format)
        typer.echo(
            f"slope {trend.slope:.4f} (95% CI [{slope_lo:.4f}, {slope_hi:.4f}]), intercept {trend.intercept:.4f}",
            err=True,
        )

    except Exception as e:
        handle_run_error("running the convergence study", e)


@app.command("complexity")
def complexity_command(
    parameter: Annotated[str, typer.Option("--parameter", help="m (mixture components) or q (polynomial degree)")],
    values: Annotated[str, typer.Option("--values", help="Comma-separated complexity values")],
    reps: Annotated[int, typer.Option("--reps", min=1, help="Repetitions per value")] = 20,
    n: Annotated[int, typer.Option("--n", min=1, help="Sample size")] = 20,
    seed: SeedOption = 0,
    out: OutOption = None,
    draws: DrawsOption = 500,
    truncation: TruncationOption = 500,
    burn_in: BurnInOption = 100,
    between: BetweenOption = 1,
    workers: WorkersOption = None,
    lengthscale: LengthscaleOption = None,
    concentration: ConcentrationOption = None,
    output_format: FormatOption = "csv",
) -> None:
    """Wasserstein distance against mixture size or polynomial degree on random tasks.

    Usage: dpmbq complexity --parameter q --values 1,2,4,8 --reps 20 --n 20 --seed 1 --out complexity.csv
    """
    try:
        value_list = parse_int_list(values, "values")
        priors = build_priors(lengthscale, concentration)
        config = build_config(draws, truncation, burn_in, between, seed, workers)

        frame, trend = run_complexity(parameter, value_list, reps, n, priors, config)
        meta = build_meta(
            "complexity", config, priors, parameter=parameter, n=n, trend=trend.model_dump() if trend else None
        )
        emit_table(frame, out, meta, output_format)

    except Exception as e:
        handle_run_error("running the complexity study", e)


@app.command("simulate")
def simulate_command(
    task_path: TaskOption,
    n: Annotated[int, typer.Option("--n", min=1, help="Number of samples")],
    seed: SeedOption = 0,
    out: OutOption = None,
) -> None:
    """Draw a sample file from a task, in the CSV format `estimate` reads.

    Usage: dpmbq simulate --task task.json --n 100 --seed 7 --out samples.csv
    """
    try:
        task: TaskSpec = load_task(task_path)
        samples: SampleSet = sample_task(task, n, substream(seed))
        emit(samples_to_csv(samples), out)

    except Exception as e:
        handle_run_error("simulating samples", e)


def main() -> None:
    """Main entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()

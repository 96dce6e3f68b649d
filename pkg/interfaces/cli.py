import json
import sys
import yaml
import typer
try:  # typer>=0.2x vendors click; catch the exceptions it actually raises
    from typer import _click as click
except ImportError:
    import click
import logging
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Optional, List

import pandas as pd
from jsonschema import ValidationError
from tqdm import tqdm

# --- Simulator imports ---
from broadcast_sim.broadcast_engine import outcome_columns, outcome_rows, run_broadcast
from broadcast_sim.continuum_model import continuum_growth
from broadcast_sim.experiment_harness import (
    DEFAULT_EXTENTS, REGIME_GRID, SWEEP_COLUMNS, SweepSpec, classify_regimes, estimate_broadcast_prob,
    run_regime_table, run_sweep,
)
from broadcast_sim.network_model import ModelParams, Window, sample, save_realization
from broadcast_sim.propagation import normalize
from broadcast_sim.theory_bounds import broadcast_lower_bound
# Storage imports
from broadcast_sim.storage.csv_handler import CSVStorage
# Utility imports
from broadcast_sim.utils.config_loader import ConfigLoader
from broadcast_sim.utils.errors import (
    InvalidParameterError, InvariantViolationError, QuadratureError,
)
from broadcast_sim.utils.logger import parse_log_level, set_run_context, setup_logging
from broadcast_sim.utils.seeding import SEED_ALGORITHM, derive_trial_seed

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_INTERNAL = 3

app = typer.Typer(help="Cooperative broadcast simulator and bound calculator")
config_loader_cli_instance = ConfigLoader()
logger_cli = logging.getLogger(__name__)


class Metric(str, Enum):
    full = "full"
    onesided = "onesided"


METRIC_NAMES = {Metric.full: 'full_coverage', Metric.onesided: 'one_sided_extent'}


@contextmanager
def _exit_codes(command: str, **context):
    """Stamp log lines with the run context and translate simulator exceptions into exit codes 1, 2 and 3."""
    set_run_context(command=command, **context)
    try:
        yield
    except typer.Exit:
        raise
    except (InvalidParameterError, ValidationError, yaml.YAMLError) as e:
        logger_cli.error(f"{command}: invalid input: {e}")
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_INVALID)
    except OSError as e:
        path = getattr(e, 'path', None) or getattr(e, 'filename', None)
        logger_cli.error(f"{command}: I/O error on {path}: {e}")
        typer.echo(f"I/O error ({path}): {e}", err=True)
        raise typer.Exit(EXIT_IO)
    except (InvariantViolationError, QuadratureError) as e:
        logger_cli.error(f"{command}: internal invariant violated: {e}")
        typer.echo(f"Internal error: {e}", err=True)
        raise typer.Exit(EXIT_INTERNAL)
    except Exception as e:
        logger_cli.exception(f"{command}: unexpected error: {e}")
        typer.echo(f"Unexpected error: {e}", err=True)
        raise typer.Exit(EXIT_INTERNAL)


@app.callback()
def configure(
    log_level: str = typer.Option("WARNING", "--log-level", help="Console log level (DEBUG, INFO, WARNING, ERROR)"),
):
    """Cooperative broadcast simulator and bound calculator."""
    try:
        level = parse_log_level(log_level)
    except InvalidParameterError as e:
        raise typer.BadParameter(str(e), param_hint="--log-level")
    setup_logging(log_filename='cli_broadcast.log', level=logging.INFO, console_level=level)


# --- simulate command ---
@app.command("simulate")
def simulate(
    dim: int = typer.Option(..., "--dim", min=1, max=2, help="Dimension (1 or 2)"),
    alpha: float = typer.Option(..., "--alpha", help="Path loss exponent"),
    lam: float = typer.Option(..., "--lambda", help="Node density"),
    extent: float = typer.Option(..., "--extent", help="Window half-width"),
    trials: int = typer.Option(1000, "--trials", min=1, help="Number of trials"),
    seed: int = typer.Option(0, "--seed", min=0, help="Master seed"),
    metric: Metric = typer.Option(Metric.full, "--metric", help="Success criterion"),
    p_t: float = typer.Option(1.0, "--p-t", help="Transmit power"),
    tau: float = typer.Option(1.0, "--tau", help="Decode threshold"),
    workers: int = typer.Option(1, "--workers", min=1, help="Worker processes"),
    save_realization_path: Optional[Path] = typer.Option(None, "--save-realization", help="Write the first trial's realization here"),
    save_outcome_path: Optional[Path] = typer.Option(None, "--save-outcome", help="Write the first trial's per-node decode rounds (CSV) here"),
):
    """Estimate the broadcast probability of one parameter cell."""
    with _exit_codes("simulate", seed=seed):
        params = ModelParams(alpha=alpha, lam=lam, p_t=p_t, tau=tau)
        window = Window(dim, extent)
        cell = estimate_broadcast_prob(params, window, trials, seed, METRIC_NAMES[metric], workers)
        if save_realization_path or save_outcome_path:
            first = sample(params, window, derive_trial_seed(seed, 0))
            if save_realization_path:
                path = save_realization(first, save_realization_path)
                typer.echo(f"Realization saved to: {path}", err=True)
            if save_outcome_path:
                outcome = run_broadcast(first, params)
                storage = CSVStorage({'output_dir': str(save_outcome_path.parent)})
                path = storage.save(outcome_rows(outcome, first), save_outcome_path.name,
                                    columns=outcome_columns(first.dimension))
                typer.echo(f"Outcome saved to: {path}", err=True)

        row = cell.row()
        row["seed_algorithm"] = SEED_ALGORITHM
        typer.echo(json.dumps(row))


# --- sweep command ---
@app.command("sweep")
def sweep(
    spec_file: Path = typer.Option(..., "--spec", help="Sweep spec file (YAML or JSON)"),
    output_dir: Optional[str] = typer.Option(None, "--output-dir", help="Overrides the spec's output_dir"),
    output_format: Optional[str] = typer.Option(None, "--format", "-f", help="Output format (csv, json)", case_sensitive=False),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Overrides the spec's worker count"),
):
    """Run a parameter sweep from a spec file and write the per-cell results."""
    with _exit_codes("sweep"):
        config = config_loader_cli_instance.load_config(str(spec_file))
        if output_format:
            config['output_format'] = output_format.lower()
            config_loader_cli_instance.validate_config(config)
        spec = SweepSpec.from_dict(config)
        set_run_context(command="sweep", spec=spec.name, seed=spec.master_seed)
        n_cells = len(spec.alpha_values) * len(spec.lambda_values) * len(spec.extents)
        typer.echo(f"Running sweep: {spec.name} ({n_cells} cells x {spec.trials} trials)", err=True)

        with tqdm(total=n_cells, desc=spec.name, unit="cell", file=sys.stderr) as bar:
            result = run_sweep(
                spec,
                output_dir=output_dir or config['output_dir'],
                output_format=config['output_format'],
                workers=workers or config['workers'],
                progress=lambda cell: bar.update(1),
            )

        typer.echo(pd.DataFrame([c.row() for c in result.cells], columns=SWEEP_COLUMNS).to_csv(index=False), nl=False)
        if len(spec.extents) >= 3:
            for row in classify_regimes(result, config['ratio_threshold'], config['persistence_floor']):
                typer.echo(f"# regime alpha={row.alpha:g} lambda={row.lam:g}: {row.label}", err=True)


# --- bounds command ---
@app.command("bounds")
def bounds(
    dim: int = typer.Option(..., "--dim", min=1, max=2, help="Dimension (1 or 2)"),
    alpha: float = typer.Option(..., "--alpha", help="Path loss exponent"),
    lam: float = typer.Option(..., "--lambda", help="Node density"),
    K: Optional[int] = typer.Option(None, "--K", min=1, help="Truncation level (default: tail correction >= 0.99)"),
    p_t: float = typer.Option(1.0, "--p-t", help="Transmit power"),
    tau: float = typer.Option(1.0, "--tau", help="Decode threshold"),
):
    """Print the lower bound on the broadcast probability as one JSON object."""
    with _exit_codes("bounds"):
        params = ModelParams(alpha=alpha, lam=lam, p_t=p_t, tau=tau)
        lam_normalized = normalize(params, dim)
        report = broadcast_lower_bound(dim, lam_normalized, alpha, K)
        for note in report.notes:
            typer.echo(f"# note: {note}", err=True)
        typer.echo(f"# bound on P({report.event})", err=True)
        typer.echo(json.dumps(report.to_dict()))


# --- continuum command ---
@app.command("continuum")
def continuum(
    dim: int = typer.Option(..., "--dim", min=1, max=2, help="Dimension (1 or 2)"),
    alpha: float = typer.Option(..., "--alpha", help="Path loss exponent"),
    rho: float = typer.Option(..., "--rho", help="Power density"),
    steps: int = typer.Option(20, "--steps", min=1, help="Frontier iterations"),
    tau: float = typer.Option(1.0, "--tau", help="Decode threshold"),
    initial_radius: float = typer.Option(1.0, "--initial-radius", help="Decoded radius before the first step"),
):
    """Iterate the continuum frontier and print step, R, increment as CSV."""
    with _exit_codes("continuum"):
        state = continuum_growth(dim, rho, tau, alpha, steps, initial_radius)
        df = pd.DataFrame(state.rows(), columns=['step', 'R', 'increment'], dtype=object)
        typer.echo(df.to_csv(index=False), nl=False)
        if state.stalled:
            typer.echo(f"# stalled after {state.steps} steps: the region cannot reach beyond R={state.final_radius!r}", err=True)
        if state.escaped:
            typer.echo(f"# escaped float range after {state.steps} steps: last finite R={state.final_radius!r}", err=True)


# --- table1 command (alias: regime-table) ---
@app.command("table1")
@app.command("regime-table", hidden=True)
def regime_table(
    trials: int = typer.Option(500, "--trials", min=1, help="Trials per cell"),
    seed: int = typer.Option(0, "--seed", min=0, help="Master seed"),
    workers: int = typer.Option(1, "--workers", min=1, help="Worker processes"),
    dims: Optional[List[int]] = typer.Option(None, "--dim", help="Restrict to one dimension (repeatable)"),
):
    """Run the built-in regime table and print observed vs expected regime labels."""
    with _exit_codes("table1", seed=seed):
        dimensions = tuple(dims) if dims else (1, 2)
        if any(d not in (1, 2) for d in dimensions):
            raise InvalidParameterError(f"--dim must be 1 or 2, got {list(dimensions)}")
        n_cells = sum(len(REGIME_GRID[d]) * len(DEFAULT_EXTENTS[d]) for d in dimensions)
        with tqdm(total=n_cells, desc="table1", unit="cell", file=sys.stderr) as bar:
            rows = run_regime_table(trials, seed, workers, dimensions, progress=lambda cell: bar.update(1))
        typer.echo("dim,alpha,lambda,expected,observed,p_hats")
        for row in rows:
            p_hats = " ".join(f"{p:.4f}" for p in row.regime.p_hats)
            typer.echo(f"{row.regime.dimension},{row.regime.alpha:g},{row.regime.lam:g},"
                       f"{row.expected},{row.regime.label},{p_hats}")
        mismatches = [row for row in rows if not row.matches]
        for row in mismatches:
            typer.echo(f"# alpha={row.regime.alpha:g} lambda={row.regime.lam:g} ({row.regime.dimension}-D): "
                       f"observed {row.regime.label}, expected {row.expected}", err=True)


@app.command("generate-spec")
def generate_spec_command(
    output_dir: Optional[str] = typer.Option(None, "--output-dir", help="Target directory (default: configs/generated_samples/)"),
    trials: int = typer.Option(1000, "--trials", min=1, help="Trials per cell in the generated specs"),
    seed: int = typer.Option(20240101, "--seed", min=0, help="Master seed in the generated specs"),
):
    """Generates sample regime-table sweep specs (1-D and 2-D)."""
    with _exit_codes("generate-spec"):
        generated_files: List[str] = config_loader_cli_instance.generate_sample_specs(output_dir, trials, seed)
        typer.echo("Sample sweep specs generated successfully:")
        for file_path in generated_files:
            typer.echo(f"- {file_path}")


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point returning the process exit code; usage errors map to 1."""
    try:
        result = app(args=argv, standalone_mode=False)
    except click.exceptions.ClickException as e:
        e.show()
        return EXIT_INVALID
    except click.exceptions.Abort:
        typer.echo("Aborted.", err=True)
        return EXIT_INVALID
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

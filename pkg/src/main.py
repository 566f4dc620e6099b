#!/usr/bin/env python3
"""
NH Persistent Current Simulator - Main Entry Point

Command-line interface for phase sweeps, the invariant suite and the list of
built-in presets. Run as ``python -m src.main``.
"""

import sys
from typing import Optional, Tuple

import click
from rich.console import Console
from rich.table import Table

from src.sweep.presets import get_preset, load_presets
from src.sweep.run_config import RunConfig, load_run_config
from src.sweep.runner import SweepRunner
from src.sweep.verification import Verifier, parse_tolerances
from src.sweep.writers import OutputWriter, resolve_output_dir
from src.utils.config_manager import ConfigManager
from src.utils.errors import ConfigValidationError, SimulationError, VerificationFailure
from src.utils.logger import configure_root_logger, get_pipeline_logger

console = Console()
logger = get_pipeline_logger("main")


class SimulationApp:
    """Wires configuration, run loading, sweeps and verification together."""

    def __init__(self, settings_path: Optional[str] = None):
        """Initialize the application with configuration."""
        self.config = ConfigManager(settings_path)
        logging_config = self.config.logging
        configure_root_logger(logging_config.level, logging_config.log_file, logging_config.use_rich)

    def load_run(self, config_path: Optional[str], preset: Optional[str]) -> RunConfig:
        """Run configuration from a file or a preset, exactly one of them."""
        if bool(config_path) == bool(preset):
            raise ConfigValidationError("give exactly one of --config or --preset", field="config")
        dim_cap = self.config.oracle.dim_cap
        if preset:
            return get_preset(preset, dim_cap=dim_cap)
        return load_run_config(config_path, dim_cap=dim_cap)

    def output_dir(self, run: RunConfig, override: Optional[str]) -> str:
        return resolve_output_dir(run.output_dir, override, self.config.sweep.output_dir, run.name)

    def run_sweep(self, run: RunConfig, output_dir: Optional[str], workers: Optional[int],
                  delta_phi: Optional[float]) -> None:
        """Compute and write one sweep."""
        destination = self.output_dir(run, output_dir)
        console.print(f"⚛️  [bold green]Starting sweep '{run.name}'[/bold green]")
        console.print(f"📐 [blue]{run.model.kind.value} model, {run.phi_grid.count} phase points, "
                      f"methods: {', '.join(m.value for m in run.methods)}[/blue]")

        runner = SweepRunner(self.config, max_workers=workers, delta_phi=delta_phi)
        result = runner.run(run, destination)

        if result.exceptional_points:
            console.print(f"🔀 [yellow]{len(result.exceptional_points)} exceptional point(s) located[/yellow]")
        if result.nudges:
            console.print(f"🩹 [yellow]{len(result.nudges)} grid point(s) nudged off an exceptional point[/yellow]")
        console.print(f"📤 [magenta]Wrote {', '.join(result.files)} to {destination}[/magenta]")
        console.print("✅ [bold green]Sweep completed successfully![/bold green]")

    def run_verify(self, run: RunConfig, tolerances: Tuple[str, ...], output_dir: Optional[str],
                   delta_phi: Optional[float]) -> None:
        """Run the invariant suite; raises VerificationFailure when a check fails."""
        overrides = parse_tolerances(tolerances)
        console.print(f"🔍 [blue]Verifying invariants for '{run.name}'...[/blue]")
        report = Verifier(self.config, tolerances=overrides, delta_phi=delta_phi).run(run)

        table = Table(title=f"Verification report: {run.name}")
        table.add_column("Check", style="cyan")
        table.add_column("Residual", justify="right")
        table.add_column("Threshold", justify="right")
        table.add_column("Result")
        table.add_column("Detail", style="dim")
        for check in report.checks:
            status = "[green]PASS[/green]" if check.passed else "[bold red]FAIL[/bold red]"
            table.add_row(check.name, f"{check.residual:.3e}", f"{check.threshold:.1e}", status, check.detail)
        console.print(table)

        destination = self.output_dir(run, output_dir)
        path = OutputWriter(destination).write_json("verify_report.json", report.to_dict())
        console.print(f"📄 [magenta]Report written to {path}[/magenta]")

        if not report.passed:
            names = ', '.join(check.name for check in report.failures)
            raise VerificationFailure(f"{len(report.failures)} check(s) failed: {names}")
        console.print("✅ [bold green]All checks passed![/bold green]")


def _exit_with(error: Exception) -> None:
    code = error.exit_code if isinstance(error, SimulationError) else 2
    logger.error(f"{type(error).__name__}: {error}")
    console.print(f"❌ [bold red]{error}[/bold red]")
    sys.exit(code)


@click.group()
@click.option('--settings', 'settings_path', type=click.Path(dir_okay=False),
              help='Path to the application settings file (default: config/config.yaml)')
@click.pass_context
def cli(ctx: click.Context, settings_path: Optional[str]):
    """
    NH Persistent Current Simulator

    Persistent currents and current susceptibilities of open tight-binding
    systems from the non-Hermitian effective Hamiltonian, checked against
    exact diagonalization.
    """
    ctx.obj = settings_path


def _app(ctx: click.Context) -> SimulationApp:
    try:
        return SimulationApp(ctx.obj)
    except Exception as e:
        _exit_with(e)


@cli.command()
@click.option('--config', 'config_path', help='Run configuration file (JSON or YAML)')
@click.option('--preset', help='Built-in run configuration, see preset-list')
@click.option('--output-dir', help='Directory receiving the result files')
@click.option('--workers', type=int, help='Worker-pool size (env: NH_CURRENT_WORKERS)')
@click.option('--delta-phi', type=float, help='Finite-difference step in phi')
@click.pass_context
def sweep(ctx: click.Context, config_path: Optional[str], preset: Optional[str], output_dir: Optional[str],
          workers: Optional[int], delta_phi: Optional[float]):
    """Evaluate the requested methods on the phase grid and write CSV outputs."""
    app = _app(ctx)
    try:
        run = app.load_run(config_path, preset)
        app.run_sweep(run, output_dir, workers, delta_phi)
    except Exception as e:
        _exit_with(e)


@cli.command()
@click.option('--config', 'config_path', help='Run configuration file (JSON or YAML)')
@click.option('--preset', help='Built-in run configuration, see preset-list')
@click.option('--tol', 'tolerances', multiple=True, help='Threshold override NAME=VALUE (repeatable)')
@click.option('--output-dir', help='Directory receiving verify_report.json')
@click.option('--delta-phi', type=float, help='Finite-difference step in phi')
@click.pass_context
def verify(ctx: click.Context, config_path: Optional[str], preset: Optional[str], tolerances: Tuple[str, ...],
           output_dir: Optional[str], delta_phi: Optional[float]):
    """Run the invariant suite and report measured residuals."""
    app = _app(ctx)
    try:
        run = app.load_run(config_path, preset)
        app.run_verify(run, tolerances, output_dir, delta_phi)
    except Exception as e:
        _exit_with(e)


@cli.command('preset-list')
def preset_list():
    """List the built-in presets."""
    try:
        presets = load_presets()
    except Exception as e:
        _exit_with(e)

    table = Table(title="Presets")
    table.add_column("Name", style="cyan")
    table.add_column("Model")
    table.add_column("Methods")
    table.add_column("Description", style="dim")
    for name, document in presets.items():
        table.add_row(name, document.get('model', {}).get('kind', '?'),
                      ', '.join(document.get('methods', [])), document.get('description', ''))
    console.print(table)


if __name__ == "__main__":
    cli()

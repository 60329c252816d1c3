"""Main CLI application."""

import logging
from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from ..analyzer.experiment_runner import SuiteResult, run_experiment, run_oracle, run_suite
from ..config import ExperimentConfig, load_config
from ..errors import CesaroLabError, ConfigError
from ..models import RunReport

app = typer.Typer(
    name="cesaro-lab",
    help="Finite-limit sets of Cesàro-convergent subsequences on atomic probability spaces",
    no_args_is_help=True,
)
console = Console()

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_CONFIG = 2

STATUS_STYLE = {"pass": "green", "fail": "red", "inconclusive": "yellow", "error": "red"}


def _configure_logging(verbose: bool) -> None:
    logger = logging.getLogger("cesaro_lab")
    logger.handlers.clear()
    logger.addHandler(RichHandler(console=console, show_path=False, rich_tracebacks=True))
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logger.propagate = False


def _parse_eps_grid(value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise ConfigError("tolerances.eps_grid", f"cannot parse --eps-grid {value!r}") from None


def _load(
    config_path: Path,
    kind: str,
    seed: Optional[int],
    mode: Optional[str],
    eps_grid: Optional[str],
    out: Optional[Path],
) -> ExperimentConfig:
    """Load a config and apply CLI overrides; any problem exits with code 2."""
    try:
        config = load_config(config_path)
        if config.kind != kind and kind != "oracle":
            raise ConfigError("kind", f"expected a {kind} experiment, got {config.kind}")
        return config.with_overrides(
            seed=seed,
            mode=mode,
            eps_grid=_parse_eps_grid(eps_grid),
            output=str(out) if out else None,
        )
    except (CesaroLabError, OSError) as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(EXIT_CONFIG)


def _run_with_progress(config: ExperimentConfig, jobs: int) -> RunReport:
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
    ) as progress:
        task = progress.add_task(f"Running {config.name}...", total=None)
        try:
            report = run_experiment(config, jobs=jobs)
        except OSError as e:
            console.print(f"[red]Error: {e}[/red]")
            raise typer.Exit(EXIT_CONFIG)
        progress.update(task, description="Complete!")
    return report


def _print_report(report: RunReport) -> None:
    table = Table(title=f"{report.name} ({report.kind})")
    table.add_column("Check", style="cyan")
    table.add_column("Status")
    table.add_column("Provenance", style="magenta")
    table.add_column("Summary")
    for verdict in report.verdicts:
        status = verdict.status.value
        expected = report.expected.get(verdict.name, "pass")
        label = status if expected == "pass" else f"{status} (expected {expected})"
        style = "green" if report.verdict_ok(verdict) else STATUS_STYLE[status]
        table.add_row(
            verdict.name,
            f"[{style}]{label}[/{style}]",
            verdict.provenance.value,
            verdict.narrative,
        )
    console.print(table)

    if report.partition is not None:
        console.print(f"[blue]J_b:[/blue] {sorted(report.partition.bounded_atoms)}  "
                      f"[blue]J_u:[/blue] {sorted(report.partition.unbounded_atoms)}")
    if report.limit_profile is not None:
        console.print(f"[blue]Finite-limit set:[/blue] {sorted(report.limit_profile.finite_set)}")
    if report.error:
        console.print(f"[red]Run aborted: {report.error}[/red]")


def _finish(report: RunReport, config: ExperimentConfig) -> None:
    _print_report(report)
    if config.output:
        console.print(f"[green]✓[/green] Wrote report to {config.output}")
    if report.passed:
        console.print("\n[green]All verdicts pass.[/green]")
        raise typer.Exit(EXIT_OK)
    console.print("\n[red]Verification failed.[/red]")
    raise typer.Exit(EXIT_VERIFICATION)


@app.command()
def partition(
    config: Path = typer.Option(..., "--config", "-c", help="Experiment config (JSON)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory for reports"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the config seed (unsigned 64-bit)"),
    mode: Optional[str] = typer.Option(None, "--mode", help="exact or heuristic"),
    jobs: int = typer.Option(1, "--jobs", "-j", help="Worker threads for Monte Carlo sampling"),
    eps_grid: Optional[str] = typer.Option(None, "--eps-grid", help="Comma-separated epsilons, e.g. 0.5,0.1,0.01"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Partition, certificate, finite-limit set and the equivalence chains."""
    _configure_logging(verbose)
    experiment = _load(config, "partition", seed, mode, eps_grid, out)
    _finish(_run_with_progress(experiment, jobs), experiment)


@app.command()
def slln(
    config: Path = typer.Option(..., "--config", "-c", help="Experiment config (JSON)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory for reports"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the config seed (unsigned 64-bit)"),
    mode: Optional[str] = typer.Option(None, "--mode", help="exact or heuristic"),
    jobs: int = typer.Option(1, "--jobs", "-j", help="Worker threads for path generation and sampling"),
    eps_grid: Optional[str] = typer.Option(None, "--eps-grid", help="Comma-separated epsilons, e.g. 0.5,0.1,0.01"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Generate sample paths and check the SLLN regime equivalences."""
    _configure_logging(verbose)
    experiment = _load(config, "slln", seed, mode, eps_grid, out)
    _finish(_run_with_progress(experiment, jobs), experiment)


@app.command()
def suite(
    directory: Path = typer.Argument(..., help="Directory of experiment configs"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory (one folder per config)"),
    jobs: int = typer.Option(1, "--jobs", "-j", help="Configs run concurrently"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Run every config of a directory and aggregate the outcome."""
    _configure_logging(verbose)
    if not directory.is_dir():
        console.print(f"[red]Error: {directory} is not a directory[/red]")
        raise typer.Exit(EXIT_CONFIG)

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
    ) as progress:
        task = progress.add_task(f"Running suite {directory}...", total=None)
        result = run_suite(directory, jobs=jobs, output_dir=out)
        progress.update(task, description="Complete!")

    if not result.entries:
        console.print(f"[yellow]No configs found in {directory}[/yellow]")
        raise typer.Exit(EXIT_OK)
    _print_suite(result)
    if out is not None:
        console.print(f"[green]✓[/green] Wrote {out / 'suite.json'}")
    raise typer.Exit(result.exit_code)


def _print_suite(result: SuiteResult) -> None:
    table = Table(title=f"Suite - {result.directory}")
    table.add_column("Config", style="cyan")
    table.add_column("Name")
    table.add_column("Status")
    table.add_column("Detail")
    for entry in result.entries:
        style = STATUS_STYLE[entry.status]
        detail = entry.error or ""
        if entry.report is not None and not entry.report.passed and not detail:
            failed = [v.name for v in entry.report.verdicts if not entry.report.verdict_ok(v)]
            detail = ", ".join(failed)
        status = f"[{style}]{entry.status}[/{style}]"
        table.add_row(entry.config_file, entry.name or "-", status, detail)
    console.print(table)
    console.print(f"\n{result.passed}/{len(result.entries)} configs passed")


@app.command()
def oracle(
    config: Path = typer.Option(..., "--config", "-c", help="Partition experiment config (JSON)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the config seed (unsigned 64-bit)"),
    jobs: int = typer.Option(1, "--jobs", "-j", help="Worker threads for hull sampling"),
    eps_grid: Optional[str] = typer.Option(None, "--eps-grid", help="Comma-separated epsilons, e.g. 0.5,0.1,0.01"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """Run the brute-force boundedness oracle on a config's window."""
    _configure_logging(verbose)
    experiment = _load(config, "oracle", seed, None, eps_grid, None)
    try:
        decisions = run_oracle(experiment, jobs=jobs)
    except CesaroLabError as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(EXIT_CONFIG)

    table = Table(title=f"Oracle - {experiment.name}")
    table.add_column("Epsilon", style="cyan")
    table.add_column("Bounded")
    table.add_column("M", style="green")
    for decision in decisions:
        bounded = "[green]yes[/green]" if decision.bounded else "[red]no[/red]"
        level = f"{decision.bound:.6g}" if decision.bound is not None else "-"
        table.add_row(f"{decision.epsilon:g}", bounded, level)
    console.print(table)


if __name__ == "__main__":
    app()

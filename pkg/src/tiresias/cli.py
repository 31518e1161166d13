"""Command-line interface for the Tiresias laboratory.

This module provides Click-based commands that run the experiment stages,
emit plot-ready files from a run directory and show the effective
configuration.
"""

import json
from collections.abc import Callable
from functools import wraps
from pathlib import Path
from typing import Any

import click
import yaml
from pydantic import ValidationError
from xdg import BaseDirectory

from tiresias.config import (
    ExperimentConfig,
    apply_overrides,
    config_hash,
    load_config,
    load_config_from_yaml,
    merge_configs,
)
from tiresias.core import ExperimentRunner, RunStats
from tiresias.errors import TiresiasError
from tiresias.storage import ArtifactRepository, emit_plots, expected_artifacts
from tiresias.utils.logging import get_logger, setup_logging

logger = get_logger(__name__, component="CLI")


def get_runs_dir() -> Path:
    """Get the default directory holding run artifact trees.

    Returns:
        Path to the runs directory (default: ~/.local/share/tiresias/runs/)
    """
    return Path(BaseDirectory.xdg_data_home) / "tiresias" / "runs"


def resolve_run_dir(config: ExperimentConfig, out: str | None) -> Path:
    """Run directory from ``--out``, the config, or the config hash."""
    if out:
        return Path(out)
    if config.output.directory is not None:
        return config.output.directory
    return get_runs_dir() / config_hash(config)[:12]


def stage_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Options shared by every stage verb."""

    @click.option("--out", type=click.Path(file_okay=False), help="Run directory")
    @click.option("--seed", type=click.IntRange(0, 2**64 - 1), help="Seed override")
    @click.option(
        "--validate",
        is_flag=True,
        default=False,
        help="Enable ground-truth comparison stages",
    )
    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        return func(*args, **kwargs)

    return wrapper


def _print_stats(stats: RunStats, root: Path) -> None:
    click.echo(f"Run directory: {root}")
    click.echo(f"Config hash: {stats.config_hash[:12]}  seed: {stats.seed}")
    for result in stats.results:
        status = "ok" if result.succeeded else "failed"
        click.echo(f"  {result.stage:<12} {status:<7} {result.duration_seconds:8.2f}s")
    rows = stats.summary.rows
    if rows:
        click.echo()
        click.echo(f"{'stage':<12} {'metric':<28} {'value':>14}  verdict")
        click.echo("-" * 66)
        for row in rows:
            verdict = "-" if row.passed is None else ("pass" if row.passed else "FAIL")
            click.echo(f"{row.stage:<12} {row.metric:<28} {row.value:>14.6g}  {verdict}")
    click.echo()
    click.echo("All baselines pass." if stats.all_pass else "Some baselines failed.")


def _execute(
    ctx: click.Context, until: str | None, out: str | None, seed: int | None, validate: bool
) -> None:
    config = apply_overrides(ctx.obj["config"], seed=seed, validation=True if validate else None)
    root = resolve_run_dir(config, out)
    repository = ArtifactRepository(
        root,
        config_hash=config_hash(config),
        seed=config.seed,
        float_format=config.output.float_format,
    )
    runner = ExperimentRunner(config, repository)
    try:
        stats = runner.run(until=until)
    except TiresiasError as e:
        click.echo(f"Error in stage {runner.failed_stage or until}: {e}", err=True)
        click.echo(f"Partial artifacts kept in {root}", err=True)
        ctx.exit(1)
    _print_stats(stats, root)
    if not stats.all_pass:
        ctx.exit(1)


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"]),
    default="INFO",
    help="Set logging level",
)
@click.option(
    "--log-format",
    type=click.Choice(["json", "text"]),
    default="text",
    help="Set log output format",
)
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    help="Path to YAML experiment file",
)
@click.pass_context
def cli(ctx: click.Context, log_level: str, log_format: str, config: str | None) -> None:
    """Tiresias - heat-kernel inverse-problem laboratory.

    Build a space, observe its heat kernel on a window, recover the spectral
    data, continue it inside with Boundary Control, reconstruct the space and
    measure stability. Every stage writes artifacts to one run directory.
    """
    setup_logging(level=log_level, format_type=log_format)

    ctx.ensure_object(dict)
    ctx.obj["log_level"] = log_level
    ctx.obj["log_format"] = log_format
    ctx.obj["config_file"] = config

    try:
        env_config = load_config()
        yaml_config = load_config_from_yaml(Path(config)) if config else None
        ctx.obj["config"] = merge_configs(yaml_config, env_config)
    except (ValidationError, yaml.YAMLError) as e:
        logger.error("config_load_failed", error=str(e))
        click.echo(f"Error: invalid configuration: {e}", err=True)
        ctx.exit(1)


@cli.command()
@stage_options
@click.pass_context
def build(ctx: click.Context, out: str | None, seed: int | None, validate: bool) -> None:
    """Build the space and write its serialization."""
    _execute(ctx, "build", out, seed, validate)


@cli.command()
@stage_options
@click.pass_context
def observe(ctx: click.Context, out: str | None, seed: int | None, validate: bool) -> None:
    """Sample the heat kernel on the window."""
    _execute(ctx, "observe", out, seed, validate)


@cli.command()
@stage_options
@click.pass_context
def extract(ctx: click.Context, out: str | None, seed: int | None, validate: bool) -> None:
    """Recover eigenvalues, mass and eigenfunctions on the window."""
    _execute(ctx, "extract", out, seed, validate)


@cli.command()
@stage_options
@click.pass_context
def control(ctx: click.Context, out: str | None, seed: int | None, validate: bool) -> None:
    """Run Boundary Control: volumes, distance profiles, interior values."""
    _execute(ctx, "control", out, seed, validate)


@cli.command()
@stage_options
@click.pass_context
def reconstruct(ctx: click.Context, out: str | None, seed: int | None, validate: bool) -> None:
    """Reconstruct distances, dimension and density."""
    _execute(ctx, "reconstruct", out, seed, validate)


@cli.command()
@stage_options
@click.pass_context
def stability(ctx: click.Context, out: str | None, seed: int | None, validate: bool) -> None:
    """Measure rigidity, the perturbation ladder and finite propagation."""
    _execute(ctx, "stability", out, seed, validate)


@cli.command(name="run-all")
@stage_options
@click.pass_context
def run_all(ctx: click.Context, out: str | None, seed: int | None, validate: bool) -> None:
    """Run every enabled stage."""
    _execute(ctx, None, out, seed, validate)


@cli.command(name="emit-plots")
@click.option(
    "--out",
    type=click.Path(file_okay=False),
    required=True,
    help="Run directory to read",
)
@click.option("--strict", is_flag=True, help="Fail when any source artifact is missing")
@click.pass_context
def emit_plots_command(ctx: click.Context, out: str, strict: bool) -> None:
    """Derive plot-ready columnar files from a run directory."""
    repository = ArtifactRepository(Path(out))
    try:
        written = emit_plots(repository, strict=strict)
    except TiresiasError as e:
        click.echo(f"Error: {e}", err=True)
        click.echo(f"Expected artifacts: {', '.join(expected_artifacts())}", err=True)
        ctx.exit(1)
    for path in written:
        click.echo(str(path))


@cli.command(name="show-config")
@click.option(
    "--output",
    type=click.Choice(["json", "yaml"]),
    default="yaml",
    help="Output format",
)
@click.pass_context
def show_config(ctx: click.Context, output: str) -> None:
    """Show the effective configuration and its hash."""
    config: ExperimentConfig = ctx.obj["config"]
    payload = config.model_dump(mode="json")
    if output == "json":
        click.echo(json.dumps({"config_hash": config_hash(config), "config": payload}, indent=2))
    else:
        click.echo(f"# config_hash: {config_hash(config)}")
        click.echo(yaml.safe_dump(payload, sort_keys=True).rstrip())


# Main entry point
def main() -> None:
    """Entry point for the CLI."""
    cli(obj={})


if __name__ == "__main__":
    main()

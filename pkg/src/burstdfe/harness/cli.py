"""Command-line entry point: ``burstdfe {run,sweep,spectrum,validate,presets}``.

CONFIG is a TOML file path or the name of a bundled preset.
"""

import dataclasses
import logging
import sys

import click

from ..exceptions import ConfigurationError
from .config import SPECTRUM_STAGES, SweepConfig, load_config, preset_names, preset_text
from .emit import emit_results
from .runner import run_experiment

logger = logging.getLogger("burstdfe")


def _load(path, seeds, workers):
    try:
        cfg = load_config(path)
    except ConfigurationError as exc:
        raise click.ClickException(str(exc)) from exc
    changes = {}
    if seeds:
        changes["seeds"] = tuple(seeds)
    if workers:
        changes["workers"] = workers
    try:
        return dataclasses.replace(cfg, **changes) if changes else cfg
    except ConfigurationError as exc:
        raise click.ClickException(str(exc)) from exc


def _finish(table, out):
    written = emit_results(table, out)
    n_fail = len(table.failed)
    click.echo(f"{len(table.rows)} rows ({n_fail} failed) -> {written['results']}")
    for row in table.failed:
        click.echo(f"  run {row.run_index} seed {row.seed} {row.mode}: {row.error}", err=True)
    sys.exit(1 if n_fail else 0)


_seed_opt = click.option("--seed", "seeds", type=int, multiple=True,
                         help="Replace the configured seeds (repeatable).")
_out_opt = click.option("--out", type=click.Path(file_okay=False),
                        help="Output directory (defaults to the config's output).")
_workers_opt = click.option("--workers", type=int, default=None,
                            help="Worker processes (defaults to the config's workers).")


@click.group()
@click.option("-v", "--verbose", count=True, help="Increase log verbosity.")
def main(verbose):
    """Simulate an IM/DD link and evaluate DFE/WDFE + MLSE receivers."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("config")
@_seed_opt
@_out_opt
@_workers_opt
def run(config, seeds, out, workers):
    """Run the base configuration once per seed, ignoring any sweep."""
    cfg = _load(config, seeds, workers)
    cfg = dataclasses.replace(cfg, sweep=SweepConfig())
    _finish(run_experiment(cfg), out or cfg.output)


@main.command()
@click.argument("config")
@_seed_opt
@_out_opt
@_workers_opt
def sweep(config, seeds, out, workers):
    """Run every (sweep value x seed) point of the configuration."""
    cfg = _load(config, seeds, workers)
    if not cfg.sweep.axis:
        raise click.ClickException(f"{config} defines no [sweep] axis; use 'run' instead")
    _finish(run_experiment(cfg), out or cfg.output)


@main.command()
@click.argument("config")
@click.option("--stage", "stages", type=click.Choice(SPECTRUM_STAGES), multiple=True,
              help="Tap point to record (repeatable). Defaults to every available stage.")
@_seed_opt
@_out_opt
def spectrum(config, stages, seeds, out):
    """Record Welch spectra at receiver tap points for one frame."""
    cfg = _load(config, seeds, None)
    if not stages:
        stages = ["received"]
        if cfg.equalizer.pnle_taps:
            stages.append("pnle")
        stages += list(cfg.modes) + ["mlse"]
    try:
        spec = dataclasses.replace(cfg.spectrum, stages=tuple(stages))
        cfg = dataclasses.replace(cfg, seeds=cfg.seeds[:1], sweep=SweepConfig(), spectrum=spec)
    except ConfigurationError as exc:
        raise click.ClickException(str(exc)) from exc
    _finish(run_experiment(cfg), out or cfg.output)


@main.command()
@click.argument("config")
def validate(config):
    """Parse and validate a configuration without running it."""
    cfg = _load(config, (), None)
    axis = cfg.sweep.axis or "(none)"
    n = cfg.n_planned_runs
    click.echo(f"{cfg.name}: valid; sweep {axis}; modes {', '.join(cfg.modes)}; "
               f"{n} planned run{'' if n == 1 else 's'}")


@main.command()
@click.argument("name", required=False)
def presets(name):
    """List bundled presets, or print one."""
    if name is None:
        for n in preset_names():
            click.echo(n)
        return
    if name not in preset_names():
        raise click.ClickException(f"unknown preset {name!r}")
    click.echo(preset_text(name), nl=False)


if __name__ == "__main__":  # pragma: no cover
    main()

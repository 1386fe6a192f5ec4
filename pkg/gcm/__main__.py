import os
import sys
from typing import Callable, List, Optional

import click
from tabulate import tabulate

from gcm.config import ConfigError, get_config
from gcm.gstate import UnphysicalCovarianceError
from gcm.logger import get_logger, setup_logging
from gcm.optics import ScatterError
from gcm.scenario import (
    LITERAL_NC_PRESETS,
    PRESET_ALIASES,
    PRESETS,
    ScenarioConfig,
    ScenarioError,
    canonical_preset,
    load_scenario,
    preset,
)
from gcm.sweep import SweepError, run_evolve, run_nonmarkov, run_phase, run_sweep, write_manifest

logger = get_logger(__name__)

EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_UNPHYSICAL = 3


def _fail(code: int, message: str):
    logger.error(f"Error: {message}")
    click.echo(f"gcm: {message}", err=True)
    sys.exit(code)


def _guarded(action: Callable[[], None]):
    """Run a command body, mapping domain errors onto exit codes."""
    try:
        action()
    except UnphysicalCovarianceError as e:
        _fail(EXIT_UNPHYSICAL, f"unphysical covariance: {e}")
    except (ScenarioError, ConfigError, SweepError, ScatterError) as e:
        _fail(EXIT_INPUT_ERROR, str(e))


def _scenario(preset_name: Optional[str], config_path: Optional[str], literal_nc: bool) -> ScenarioConfig:
    if (preset_name is None) == (config_path is None):
        raise ScenarioError("preset", "give exactly one of --preset or --config")
    if literal_nc and (preset_name is None or canonical_preset(preset_name) not in LITERAL_NC_PRESETS):
        logger.warning(f"--paper-literal-nc only affects the {', '.join(LITERAL_NC_PRESETS)} preset; ignored")
    if preset_name is not None:
        return preset(preset_name, literal_nc=literal_nc)
    return load_scenario(config_path)


def _out_dir(out: Optional[str]) -> str:
    path = out or get_config().GCM_OUTPUT_DIR
    os.makedirs(path, exist_ok=True)
    return path


def _run_scenario_command(command: str, runner, preset_name, config_path, out, literal_nc=False):
    def action():
        cfg = _scenario(preset_name, config_path, literal_nc)
        out_dir = _out_dir(out)
        outputs: List[str] = runner(cfg, out_dir)
        write_manifest(out_dir, command, cfg, outputs)
        for path in outputs:
            click.echo(path)

    _guarded(action)


scenario_options = [
    click.option("--preset", "preset_name", type=str, default=None, help="Named preset (see `gcm presets`)"),
    click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="JSON scenario file"),
    click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory"),
]


def with_scenario_options(func):
    for option in reversed(scenario_options):
        func = option(func)
    return func


literal_nc_option = click.option(
    "--paper-literal-nc",
    "--literal-nc",
    "literal_nc",
    is_flag=True,
    help="Thermal C photon number sinh^2(xi_AB) for the fig4 (thermal-c) preset",
)


@click.group()
@click.option("--log-level", default=None, help="Override GCM_LOG_LEVEL")
def cli(log_level):
    """Gaussian collision-model simulator: information scrambling and channel non-Markovianity."""
    get_config()
    setup_logging(log_level.upper() if log_level else None)


@cli.command()
@with_scenario_options
@literal_nc_option
def evolve(preset_name, config_path, out, literal_nc):
    """BMI/TMI series for L = 1..L_max."""
    _run_scenario_command("evolve", run_evolve, preset_name, config_path, out, literal_nc)


@cli.command()
@with_scenario_options
def phase(preset_name, config_path, out):
    """Non-Markovianity D over a (theta_se, theta_ee) grid."""
    _run_scenario_command("phase", run_phase, preset_name, config_path, out)


@cli.command()
@with_scenario_options
def nonmarkov(preset_name, config_path, out):
    """Per-step Lambda spectra and cumulative D of the scenario's channel."""
    _run_scenario_command("nonmarkov", run_nonmarkov, preset_name, config_path, out)


@cli.command()
@with_scenario_options
@literal_nc_option
def sweep(preset_name, config_path, out, literal_nc):
    """One series per sweep point plus an index with min_I3."""
    _run_scenario_command("sweep", run_sweep, preset_name, config_path, out, literal_nc)


@cli.command()
@click.option("--quick", is_flag=True, help="Smaller grids and horizons")
def check(quick):
    """Run the invariant suite; exit 1 if anything fails."""
    from gcm.checks import appendix_table, closed_form_table, results_table, run_checks

    results = run_checks(quick=quick)
    click.echo(results_table(results))
    click.echo("")
    click.echo("Appendix comparator (vacuum-env):")
    click.echo(appendix_table())
    click.echo("")
    click.echo("Closed-form Lambda spectra at L = 5, theta_ee = 0.2 pi:")
    click.echo(closed_form_table())
    failed = [r.name for r in results if not r.passed]
    if failed:
        _fail(EXIT_CHECK_FAILED, f"{len(failed)} invariant(s) failed: {', '.join(failed)}")


@cli.command()
@click.argument("series_csv", nargs=-1, type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="SVG file to write")
@click.option("--column", "columns", multiple=True, default=("I3",), show_default=True)
@click.option("--x", "x_column", default="L", show_default=True)
def plot(series_csv, out, columns, x_column):
    """Render series CSVs as an SVG line chart."""
    from gcm.plot import plot_series

    _guarded(lambda: click.echo(plot_series(list(series_csv), out, columns, x_column)))


@cli.command()
def presets():
    """List the built-in scenarios."""
    aliases = {key: alias for alias, key in PRESET_ALIASES.items()}
    rows = [(name, aliases.get(name, ""), desc) for name, (desc, _) in PRESETS.items()]
    click.echo(tabulate(rows, headers=["preset", "alias", "description"]))


def main():
    cli(prog_name="gcm")


if __name__ == "__main__":
    main()

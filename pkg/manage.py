#!/usr/bin/env python
"""threewave command-line utility for experiment runs."""
import json
import logging
import logging.config
import sys
from pathlib import Path

import click

from api.schema import load_preset, run, run_preset
from apps.experiments.inputs import (
    ExperimentConfig,
    InitialCondition,
    SweepSpec,
    load_configs,
)
from apps.experiments.mutations import PRESETS
from core import settings
from core.exceptions import (
    ArtifactError,
    NumericalError,
    ThreeWaveError,
    UsageError,
)

logger = logging.getLogger("manage")

EXIT_CODES = ((UsageError, 2), (NumericalError, 3), (ArtifactError, 4))


def exit_code(error: ThreeWaveError) -> int:
    for family, code in EXIT_CODES:
        if isinstance(error, family):
            return code
    return 1


def execute(action):
    """Run ``action`` and turn a threewave error into its exit code, with the
    {message, code} record on stderr."""
    try:
        manifests = action()
    except ThreeWaveError as e:
        record = e.to_error()
        status = exit_code(e)
        logger.debug("exiting with status %d (%s)", status, record.code)
        click.echo(
            json.dumps({"message": record.message, "code": record.code}), err=True
        )
        sys.exit(status)
    for manifest in manifests:
        click.echo(
            json.dumps(
                {"manifest": manifest.path, "artifacts": len(manifest.artifacts)}
            )
        )


def quantum_options(f):
    options = [
        click.option("--s2", type=int, required=True),
        click.option("--s3", type=int, required=True),
        click.option("--m", type=int, default=None, help="Initial basis index."),
        click.option("--epsilon", type=float, default=None, help="Spread around m."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def grid_options(f):
    options = [
        click.option("--tau-max", type=float, default=1.0, show_default=True),
        click.option("--points", type=int, default=101, show_default=True),
        click.option(
            "--method",
            type=click.Choice(["exact-eigen", "rk4"]),
            default="exact-eigen",
            show_default=True,
        ),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def output_options(f):
    options = [
        click.option(
            "--out",
            type=click.Path(file_okay=False, path_type=Path),
            default=None,
            help="Output directory (THREEWAVE_OUTPUT_DIR by default).",
        ),
        click.option(
            "--format",
            "formats",
            type=click.Choice(["csv", "json", "svg"]),
            multiple=True,
            help="Artifact formats; repeat for several (csv and json by default).",
        ),
        click.option("--jobs", type=int, default=None, help="Sweep worker processes."),
        click.option("--label", default="", help="Run directory name."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def build_config(kind, formats, **fields) -> ExperimentConfig:
    m, epsilon = fields.pop("m", None), fields.pop("epsilon", None)
    return ExperimentConfig(
        kind=kind,
        initial=InitialCondition(m=m, epsilon=epsilon),
        formats=tuple(formats) or ("csv", "json"),
        **fields,
    )


def run_single(kind, out, jobs, formats, **fields):
    execute(lambda: [run(build_config(kind, formats, **fields), out, jobs)])


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="Overrides THREEWAVE_LOG_LEVEL.",
)
def cli(log_level):
    """Three-wave instability experiments."""
    logging.config.dictConfig(settings.LOGGING)
    if log_level:
        for name in ("apps", "core", "manage"):
            logging.getLogger(name).setLevel(log_level.upper())


@cli.command()
@quantum_options
@grid_options
@output_options
@click.option("--probabilities", is_flag=True, help="Write every p_i column.")
def evolve(out, jobs, formats, probabilities, **fields):
    """Expectations and variance over a time grid."""
    run_single(
        "evolve", out, jobs, formats, with_probabilities=probabilities, **fields
    )


@cli.command()
@quantum_options
@grid_options
@output_options
def cascade(out, jobs, formats, **fields):
    """Evolution with every basis-state probability recorded."""
    run_single("cascade", out, jobs, formats, **fields)


@cli.command("linear-compare")
@quantum_options
@grid_options
@output_options
def linear_compare(out, jobs, formats, **fields):
    """Exact <n1> against the linearized instability solution."""
    run_single("linear-compare", out, jobs, formats, **fields)


@cli.command()
@quantum_options
@output_options
@click.option("--lines", is_flag=True, help="Also write the <n3> spectral lines.")
def spectrum(out, jobs, formats, **fields):
    """Eigenvalues, eigen-weights, spacing diagnostic and frequency counts."""
    run_single("spectrum", out, jobs, formats, **fields)


@cli.command()
@quantum_options
@output_options
@click.option("--horizon", type=float, default=10.0, show_default=True)
@click.option("--threshold", type=float, default=0.99, show_default=True)
def recurrence(out, jobs, formats, **fields):
    """First return of the fidelity above the threshold."""
    run_single("recurrence", out, jobs, formats, **fields)


@cli.command()
@click.option(
    "--actions",
    type=float,
    nargs=3,
    required=True,
    help="Initial actions I1 I2 I3 (real positive amplitudes).",
)
@click.option("--tau-max", type=float, default=1.0, show_default=True)
@click.option("--points", type=int, default=101, show_default=True)
@click.option("--dt", type=float, default=None)
@output_options
def classical(actions, out, jobs, formats, **fields):
    """Classical amplitude equations from real positive amplitudes."""
    execute(
        lambda: [
            run(
                ExperimentConfig(
                    kind="classical",
                    initial=InitialCondition(actions=tuple(actions)),
                    formats=tuple(formats) or ("csv", "json"),
                    **fields,
                ),
                out,
                jobs,
            )
        ]
    )


@cli.command(name="sweep")
@click.option("--s2", type=int, multiple=True, required=True)
@click.option("--s3", type=int, multiple=True, help="Defaults to s3 = s2.")
@click.option("--m", type=int, multiple=True, default=(0,), show_default=True)
@click.option("--epsilon", type=float, multiple=True, default=(0.0,), show_default=True)
@click.option("--divergence", is_flag=True, help="Propagate to find divergence times.")
@click.option("--spectrum", is_flag=True, help="Add the spacing deviation column.")
@click.option("--tau-max", type=float, default=1.0, show_default=True)
@click.option("--points", type=int, default=101, show_default=True)
@output_options
def sweep_command(
    s2, s3, m, epsilon, divergence, spectrum, out, jobs, formats, **fields
):
    """Growth rates, C1 and optional diagnostics over a cartesian expansion."""

    def action():
        spec = SweepSpec(
            s2=tuple(s2),
            s3=tuple(s3),
            m=tuple(m),
            epsilon=tuple(epsilon),
            divergence=divergence,
            spectrum=spectrum,
        )
        cfg = ExperimentConfig(
            kind="sweep",
            sweep=spec,
            formats=tuple(formats) or ("csv", "json"),
            **fields,
        )
        return [run(cfg, out, jobs)]

    execute(action)


@cli.command()
@click.argument("name", type=click.Choice(PRESETS))
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--jobs", type=int, default=None)
def preset(name, out, jobs):
    """Reproduce one of the shipped figure presets."""
    execute(lambda: run_preset(name, out, jobs))


@cli.command(name="run")
@click.argument("config", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--jobs", type=int, default=None)
def run_command(config, out, jobs):
    """Run every experiment in a YAML config file."""
    execute(lambda: [run(cfg, out, jobs) for cfg in load_configs(config)])


@cli.command(name="show-preset")
@click.argument("name", type=click.Choice(PRESETS))
def show_preset(name):
    """Print a preset's configs as YAML."""
    for cfg in load_preset(name):
        click.echo("---")
        click.echo(cfg.to_yaml(), nl=False)


def main():
    cli(prog_name="manage.py")


if __name__ == "__main__":
    main()

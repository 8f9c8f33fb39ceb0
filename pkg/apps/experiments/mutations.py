# - Run - Execute one experiment config, write its artifacts and the manifest.
# - Run preset - Run every config of a shipped figure preset.
# - Sweep - Closed-form growth rates and C1 over a cartesian expansion, in a
#   worker pool, one row per configuration; failing rows are recorded, not raised.
# - Export sweep - Write a sweep report as CSV or JSON.

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from apps.classical.models import ClassicalState, ClassicalTrajectory
from apps.classical.mutations import export_linear_params, export_trajectory
from apps.classical.queries import (
    classical_growth_rate,
    classical_linear_params,
    integrate_amplitudes,
)
from apps.evolve.inputs import EvolutionConfig
from apps.evolve.mutations import export_summary, export_timeseries
from apps.evolve.queries import evolve_observables
from apps.fock.models import SubspaceSpec, WaveFunction
from apps.hamiltonian.queries import build
from apps.linear.models import SpreadSpec
from apps.linear.mutations import export_comparison, export_params
from apps.linear.queries import (
    compare_linear,
    divergence_time,
    quantum_linear_params,
    spread_state,
)
from apps.spectral.mutations import (
    export_diagnostics,
    export_fidelity,
    export_lines,
    export_recurrence,
    export_spectrum,
    export_weights,
)
from apps.spectral.queries import (
    count_distinct_frequencies,
    eigen_weights,
    eigensystem,
    recurrence_time,
    spacing_diagnostic,
    spectral_lines_n3,
)
from core import settings
from core.artifacts import ArtifactResponse, failed, write_csv, write_json
from core.exceptions import ArtifactError, ConfigError, ThreeWaveError

from . import plots
from .inputs import ExperimentConfig, Format, Kind, SweepSpec, load_configs
from .responses import SWEEP_COLUMNS, RunManifest, SweepReport

logger = logging.getLogger(__name__)

PRESETS = ("fig1", "fig2", "fig3", "fig4", "fig5")

# probability curves drawn in a cascade figure
CASCADE_CURVES = 6


def initial_state(cfg: ExperimentConfig) -> WaveFunction:
    spec = cfg.subspace()
    initial = cfg.initial
    if initial.amplitudes is not None:
        amplitudes = [complex(re, im) for re, im in initial.amplitudes]
        return WaveFunction.from_amplitudes(spec, amplitudes)
    m = initial.m if initial.m is not None else 0
    return spread_state(spec, SpreadSpec(m, initial.epsilon or 0.0))


def _grid(cfg: ExperimentConfig, with_probabilities: bool = False) -> EvolutionConfig:
    return EvolutionConfig.uniform(
        cfg.tau_max,
        cfg.points,
        method=cfg.method,
        dt=cfg.dt,
        with_probabilities=with_probabilities,
    )


def _plot(draw: Callable, *args, **kwargs) -> ArtifactResponse:
    try:
        return ArtifactResponse(success=True, artifact=draw(*args, **kwargs))
    except Exception as e:
        return failed(e)


def _run_evolve(cfg: ExperimentConfig, target: Path, jobs: int):
    probabilities = cfg.with_probabilities or cfg.kind is Kind.CASCADE
    H, psi0 = build(cfg.subspace()), initial_state(cfg)
    result = evolve_observables(H, psi0, _grid(cfg, probabilities))
    responses = []
    if cfg.wants(Format.CSV):
        responses.append(
            export_timeseries(result, target / "timeseries.csv", probabilities)
        )
    if cfg.wants(Format.JSON):
        responses.append(export_summary(result, target / "summary.json"))
    if cfg.wants(Format.SVG):
        series = {name: result.series(name) for name in ("en1", "en2", "en3")}
        responses.append(
            _plot(
                plots.line_plot,
                target / "expectations.svg",
                result.taus,
                series,
                "tau",
                "<n_j>",
                title=str(H.spec),
            )
        )
        responses.append(
            _plot(
                plots.line_plot,
                target / "variance.svg",
                result.taus,
                {"var_n1": result.series("variance_n1")},
                "tau",
                "variance of n1",
            )
        )
        if cfg.kind is Kind.CASCADE:
            p = result.probabilities
            curves = {f"p{i}": p[:, i] for i in range(min(H.d, CASCADE_CURVES))}
            responses.append(
                _plot(
                    plots.line_plot,
                    target / "probabilities.svg",
                    result.taus,
                    curves,
                    "tau",
                    "probability",
                )
            )
    return responses


def _run_classical(cfg: ExperimentConfig, target: Path, jobs: int):
    I1, I2, I3 = cfg.initial.actions
    state = ClassicalState.from_actions(I1, I2, I3)
    full = integrate_amplitudes(state, cfg.tau_max, cfg.dt)
    grid = np.linspace(0.0, cfg.tau_max, cfg.points)
    picks = np.minimum(np.searchsorted(full.times, grid - 1e-12), len(full) - 1)
    trajectory = ClassicalTrajectory(full.times[picks], full.amplitudes[picks])
    responses = []
    if cfg.wants(Format.CSV):
        responses.append(export_trajectory(trajectory, target / "trajectory.csv"))
    if cfg.wants(Format.JSON):
        params = classical_linear_params(I1, I2, I3)
        responses.append(export_linear_params(params, target / "linear.json"))
    if cfg.wants(Format.SVG):
        acts = trajectory.actions
        responses.append(
            _plot(
                plots.line_plot,
                target / "actions.svg",
                trajectory.times,
                {"I1": acts[:, 0], "I2": acts[:, 1], "I3": acts[:, 2]},
                "t",
                "action",
            )
        )
    return responses


def _run_linear_compare(cfg: ExperimentConfig, target: Path, jobs: int):
    H, psi0 = build(cfg.subspace()), initial_state(cfg)
    comparison = compare_linear(H, psi0, _grid(cfg))
    responses = []
    if cfg.wants(Format.CSV):
        responses.append(export_comparison(comparison, target / "compare.csv"))
    if cfg.wants(Format.JSON):
        responses.append(export_params(comparison.params, target / "params.json"))
    if cfg.wants(Format.SVG):
        responses.append(
            _plot(
                plots.line_plot,
                target / "compare.svg",
                comparison.taus,
                {"exact": comparison.n1_exact, "linear": comparison.n1_linear},
                "tau",
                "<n1>",
                title=str(H.spec),
            )
        )
    return responses


def _run_spectrum(cfg: ExperimentConfig, target: Path, jobs: int):
    H, psi0 = build(cfg.subspace()), initial_state(cfg)
    es = eigensystem(H)
    eps = eigen_weights(psi0, es)
    lines = spectral_lines_n3(psi0, es)
    responses = []
    if cfg.wants(Format.CSV):
        responses.append(export_spectrum(es, target / "spectrum.csv"))
        responses.append(export_weights(es, eps, target / "weights.csv"))
        if cfg.lines:
            responses.append(export_lines(lines, target / "lines.csv"))
    if cfg.wants(Format.JSON):
        if es.d >= 3:
            report = spacing_diagnostic(es)
            counts = count_distinct_frequencies(es, lines, spacing=report)
            responses.append(
                export_diagnostics(report, counts, target / "diagnostics.json")
            )
        else:
            logger.warning("no spacing diagnostic for %s (d < 3)", H.spec)
    if cfg.wants(Format.SVG):
        responses.append(
            _plot(
                plots.scatter_plot,
                target / "spectrum.svg",
                np.arange(es.d),
                es.lambdas,
                "k",
                "lambda_k",
                title=str(H.spec),
            )
        )
        responses.append(
            _plot(
                plots.scatter_plot,
                target / "weights.svg",
                es.lambdas,
                np.abs(eps) ** 2,
                "lambda_k",
                "|eps_k|^2",
            )
        )
    return responses


def _run_recurrence(cfg: ExperimentConfig, target: Path, jobs: int):
    H, psi0 = build(cfg.subspace()), initial_state(cfg)
    result = recurrence_time(H, psi0, cfg.horizon, cfg.threshold)
    responses = []
    if cfg.wants(Format.JSON):
        responses.append(export_recurrence(result, target / "recurrence.json"))
    if cfg.wants(Format.CSV):
        responses.append(export_fidelity(result, target / "fidelity.csv"))
    if cfg.wants(Format.SVG):
        responses.append(
            _plot(
                plots.line_plot,
                target / "fidelity.svg",
                result.taus,
                {"fidelity": result.trace},
                "tau",
                "|<psi(0)|psi(tau)>|^2",
                title=str(H.spec),
            )
        )
    return responses


def _run_sweep(cfg: ExperimentConfig, target: Path, jobs: int):
    report = sweep(cfg.sweep, cfg.label, jobs, cfg.tau_max, cfg.points)
    responses = []
    if cfg.wants(Format.CSV):
        responses.append(export_sweep(report, target / "sweep.csv"))
    if cfg.wants(Format.JSON):
        responses.append(export_sweep(report, target / "sweep.json", Format.JSON))
    return responses


RUNNERS: Dict[Kind, Callable] = {
    Kind.EVOLVE: _run_evolve,
    Kind.CASCADE: _run_evolve,
    Kind.CLASSICAL: _run_classical,
    Kind.LINEAR_COMPARE: _run_linear_compare,
    Kind.SPECTRUM: _run_spectrum,
    Kind.RECURRENCE: _run_recurrence,
    Kind.SWEEP: _run_sweep,
}


def run(
    config: ExperimentConfig, out_dir: Optional[Path] = None, jobs: Optional[int] = None
) -> RunManifest:
    started = time.perf_counter()
    target = Path(out_dir or settings.OUTPUT_DIR) / config.label
    jobs = settings.JOBS if jobs is None else jobs
    logger.info("running %s (%s) into %s", config.label, config.kind.value, target)
    try:
        responses = RUNNERS[config.kind](config, target, jobs)
    except ThreeWaveError as e:
        logger.error("%s failed: %s [%s]", config.label, e.message, e.code)
        raise

    failures = [r for r in responses if not r.success]
    if failures:
        first = failures[0]
        raise ArtifactError(f"{config.label}: {first.error.message}") from first.cause

    manifest = RunManifest(
        config=config.to_dict(),
        artifacts=[r.artifact for r in responses],
        version=settings.VERSION,
        duration_s=round(time.perf_counter() - started, 6),
        path=str(target / "manifest.json"),
    )
    write_json(target / "manifest.json", manifest.as_dict())
    logger.info("%s done in %.3f s", config.label, manifest.duration_s)
    return manifest


def load_preset(name: str) -> List[ExperimentConfig]:
    if name not in PRESETS:
        choices = ", ".join(PRESETS)
        raise ConfigError(f"preset: unknown preset {name!r} (one of {choices})")
    return load_configs(settings.PRESETS_DIR / f"{name}.yaml")


def run_preset(
    name: str, out_dir: Optional[Path] = None, jobs: Optional[int] = None
) -> List[RunManifest]:
    return [run(config, out_dir, jobs) for config in load_preset(name)]


def _sweep_row(task) -> dict:
    label, s2, s3, m, epsilon, spec_flags, tau_max, points = task
    with_divergence, with_spectrum = spec_flags
    row = dict.fromkeys(SWEEP_COLUMNS)
    row.update(label=label, s2=s2, s3=s3, m=m, epsilon=epsilon)
    try:
        spec = SubspaceSpec(s2, s3)
        H = build(spec)
        psi0 = spread_state(spec, SpreadSpec(m, epsilon))
        params = quantum_linear_params(H, psi0)
        n1i, n2i, n3i = params.n_init
        classical = classical_growth_rate(n1i, n2i, n3i)
        row.update(n1i=n1i, n2i=n2i, n3i=n3i, C1=params.C1)
        if params.growth.unstable:
            row["gammaQ"] = params.gammaQ
        if classical.unstable:
            row["gammaC"] = classical.rate
        if params.growth.unstable and classical.unstable:
            row["ratio_minus_one"] = params.gammaQ / classical.rate - 1.0
        if with_divergence and params.growth.unstable:
            grid = EvolutionConfig.uniform(tau_max, points)
            row["divergence_time"] = divergence_time(compare_linear(H, psi0, grid))
        if with_spectrum:
            row["spacing_deviation"] = spacing_diagnostic(eigensystem(H)).max_deviation
    except ThreeWaveError as e:
        logger.warning("sweep row %s failed: %s", (s2, s3, m, epsilon), e.message)
        row.update(error_code=e.code, error_message=e.message)
    except Exception as e:
        logger.exception("sweep row %s failed unexpectedly", (s2, s3, m, epsilon))
        row.update(error_code=ThreeWaveError.code, error_message=str(e))
    return row


def sweep(
    spec: SweepSpec,
    label: str = "sweep",
    jobs: int = 1,
    tau_max: float = 1.0,
    points: int = 101,
) -> SweepReport:
    """Rows come back in expansion order whatever the pool's completion order."""
    flags = (spec.divergence, spec.spectrum)
    tasks = [
        (label, s2, s3, m, epsilon, flags, tau_max, points)
        for s2, s3, m, epsilon in spec.expand()
    ]
    if not tasks:
        return SweepReport([])
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(task) for task in tasks]
    report = SweepReport(rows)
    logger.info("sweep %s: %d rows, %d failed", label, len(rows), len(report.failures))
    return report


def export_sweep(
    report: SweepReport, path: Path, fmt: Format = Format.CSV
) -> ArtifactResponse:
    try:
        if fmt is Format.JSON:
            artifact = write_json(path, {"columns": SWEEP_COLUMNS, "rows": report.rows})
        else:
            rows = ([row[c] for c in SWEEP_COLUMNS] for row in report.rows)
            artifact = write_csv(path, SWEEP_COLUMNS, rows)
        return ArtifactResponse(success=True, artifact=artifact)
    except Exception as e:
        return failed(e)

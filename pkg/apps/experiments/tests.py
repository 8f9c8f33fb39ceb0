import csv
import json
import logging.config
import math

import pytest

from core import settings
from core.exceptions import ArtifactError, ConfigError, NormalizationError

from . import mutations, plots
from .inputs import ExperimentConfig, Format, InitialCondition, Kind, SweepSpec
from .mutations import PRESETS, export_sweep, load_preset, run, sweep
from .responses import SWEEP_COLUMNS

ONSET_YAML = """
kind: linear-compare
label: small-onset
subspace: {s2: 103, s3: 110}
initial: {m: 3, epsilon: 0.1}
grid: {tau_max: 0.02, points: 3}
formats: [csv, json, svg]
"""

SMALL = {"s2": 2, "s3": 2}


def read_csv(path):
    with open(path) as handle:
        return list(csv.reader(handle))


class TestExperimentConfig:
    def test_parse(self):
        cfg = ExperimentConfig.from_yaml(ONSET_YAML)
        assert cfg.kind is Kind.LINEAR_COMPARE
        assert (cfg.s2, cfg.s3) == (103, 110)
        assert cfg.initial.m == 3 and cfg.initial.epsilon == 0.1
        assert cfg.formats == (Format.CSV, Format.JSON, Format.SVG)

    @pytest.mark.parametrize("name", PRESETS)
    def test_presets_round_trip(self, name):
        for cfg in load_preset(name):
            assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
            assert ExperimentConfig.from_yaml(cfg.to_yaml()) == cfg

    def test_round_trip_with_amplitudes_and_sweep(self):
        cfg = ExperimentConfig.from_dict(
            {
                "kind": "sweep",
                "sweep": {"s2": [10, 20], "epsilon": [0.0, 0.2], "spectrum": True},
            }
        )
        assert ExperimentConfig.from_yaml(cfg.to_yaml()) == cfg
        evolve = ExperimentConfig.from_dict(
            {
                "kind": "evolve",
                "subspace": {"s2": 1, "s3": 1},
                "initial": {"amplitudes": [[0.6, 0.0], [0.0, 0.8]]},
            }
        )
        assert ExperimentConfig.from_yaml(evolve.to_yaml()) == evolve

    @pytest.mark.parametrize(
        "raw,path",
        [
            ({"subspace": {"s2": 2, "s3": 2}}, "kind"),
            ({"kind": "evolve"}, "subspace"),
            ({"kind": "evolve", "subspace": {"s2": 5, "s3": 4}}, "subspace"),
            ({"kind": "warp", "subspace": {"s2": 2, "s3": 2}}, "kind"),
            (
                {"kind": "evolve", "subspace": SMALL, "initial": {"epsilon": 0.1}},
                "initial.epsilon",
            ),
            (
                {"kind": "evolve", "subspace": {"s2": 2, "s3": 2}, "initial": {"m": 3}},
                "initial.m",
            ),
            ({"kind": "classical"}, "initial.actions"),
            ({"kind": "sweep"}, "sweep"),
            (
                {"kind": "evolve", "subspace": {"s2": 2, "s3": 2}, "formats": ["png"]},
                "formats[0]",
            ),
            (
                {"kind": "evolve", "subspace": {"s2": 2, "s3": 2.5}},
                "subspace.s3",
            ),
            ({"kind": "evolve", "speed": 3}, "speed"),
            (
                {"kind": "evolve", "subspace": SMALL, "grid": {"points": 1}},
                "grid.points",
            ),
        ],
    )
    def test_errors_name_the_field(self, raw, path):
        with pytest.raises(ConfigError) as exc:
            ExperimentConfig.from_dict(raw)
        assert exc.value.message.startswith(path)
        assert exc.value.code == "VALIDATION_ERROR"

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            load_preset("fig9")

    def test_bad_yaml(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml("kind: [evolve")


class TestRun:
    def test_manifest(self, tmp_out):
        cfg = ExperimentConfig.from_yaml(ONSET_YAML)
        manifest = run(cfg, tmp_out)
        manifest.verify()
        names = sorted(a.path.rsplit("/", 1)[-1] for a in manifest.artifacts)
        assert names == ["compare.csv", "compare.svg", "params.json"]
        written = json.loads((tmp_out / "small-onset" / "manifest.json").read_text())
        assert set(written) == {"config", "artifacts", "version", "duration_s"}
        assert ExperimentConfig.from_dict(written["config"]) == cfg

        rows = read_csv(tmp_out / "small-onset" / "compare.csv")
        assert rows[0] == ["tau", "n1_exact", "n1_linear", "dn1_exact", "dn1_linear"]
        assert len(rows) == 4

    def test_reproducible(self, tmp_path):
        cfg = ExperimentConfig.from_yaml(ONSET_YAML)
        first = run(cfg, tmp_path / "a")
        second = run(cfg, tmp_path / "b")

        def checksums(manifest):
            return [a.sha256 for a in manifest.artifacts if not a.path.endswith(".svg")]

        assert checksums(first) == checksums(second)

    def test_verify_detects_changes(self, tmp_out):
        manifest = run(ExperimentConfig.from_yaml(ONSET_YAML), tmp_out)
        with open(manifest.artifacts[0].path, "a") as handle:
            handle.write("0\n")
        with pytest.raises(ArtifactError):
            manifest.verify()

    def test_cascade_writes_probabilities(self, tmp_out):
        cfg = ExperimentConfig(
            kind="cascade", s2=4, s3=4, tau_max=0.1, points=3, formats=("csv",)
        )
        run(cfg, tmp_out)
        rows = read_csv(tmp_out / "cascade" / "timeseries.csv")
        assert rows[0][-5:] == ["p0", "p1", "p2", "p3", "p4"]
        assert rows[1][:5] == ["0.0", "4.0", "0.0", "0.0", "0.0"]

    def test_classical(self, tmp_out):
        cfg = ExperimentConfig(
            kind="classical",
            initial=InitialCondition(actions=(100.0, 10.0, 3.0)),
            tau_max=0.05,
            points=6,
        )
        manifest = run(cfg, tmp_out)
        rows = read_csv(tmp_out / "classical" / "trajectory.csv")
        assert len(rows) == 7
        assert float(rows[1][0]) == 0.0
        assert float(rows[-1][0]) == pytest.approx(0.05)
        params = json.loads((tmp_out / "classical" / "linear.json").read_text())
        assert params["unstable"] is True
        assert len(manifest.artifacts) == 2

    def test_spectrum_and_recurrence(self, tmp_out):
        run(ExperimentConfig(kind="spectrum", s2=2, s3=2, lines=True), tmp_out)
        diag = json.loads((tmp_out / "spectrum" / "diagnostics.json").read_text())
        assert diag["linear_verdict"] is True
        assert diag["n_lattice_freqs"] == 3
        assert (tmp_out / "spectrum" / "lines.csv").is_file()

        cfg = ExperimentConfig(
            kind="recurrence", s2=2, s3=2, horizon=5.0, threshold=0.9
        )
        run(cfg, tmp_out)
        rec = json.loads((tmp_out / "recurrence" / "recurrence.json").read_text())
        assert rec["tau_rec"] == pytest.approx(2 * math.pi / math.sqrt(6), rel=1e-3)

    def test_tiny_spectrum_skips_diagnostics(self, tmp_out):
        manifest = run(
            ExperimentConfig(kind="spectrum", s2=1, s3=1, formats=("json",)), tmp_out
        )
        assert manifest.artifacts == []

    def test_numerical_errors_propagate(self, tmp_out):
        cfg = ExperimentConfig(
            kind="evolve",
            s2=1,
            s3=1,
            initial=InitialCondition(amplitudes=((1.0, 0.0), (1.0, 0.0))),
        )
        with pytest.raises(NormalizationError):
            run(cfg, tmp_out)

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        with pytest.raises(ArtifactError) as exc:
            run(ExperimentConfig.from_yaml(ONSET_YAML), blocker)
        assert exc.value.code == "IO_ERROR"
        assert isinstance(exc.value.__cause__, ArtifactError)
        assert isinstance(exc.value.__cause__.__cause__, OSError)

    def test_failed_figure_is_chained(self, tmp_out, monkeypatch):
        def broken(*args, **kwargs):
            raise ValueError("no axes left")

        monkeypatch.setattr(plots, "line_plot", broken)
        with pytest.raises(ArtifactError) as exc:
            run(ExperimentConfig.from_yaml(ONSET_YAML), tmp_out)
        assert exc.value.message == "small-onset: no axes left"
        assert isinstance(exc.value.__cause__, ValueError)
        assert not (tmp_out / "small-onset" / "manifest.json").exists()

    @pytest.mark.slow
    def test_linear_onset_preset(self, tmp_out):
        (manifest,) = [run(cfg, tmp_out) for cfg in load_preset("fig1")]
        manifest.verify()
        params = json.loads((tmp_out / "fig1" / "params.json").read_text())
        assert params["gammaQ_sq"] == pytest.approx(346, abs=0.5)
        assert params["C1"] == pytest.approx(
            -params["BQ"] / (2 * params["gammaQ_sq"]), rel=1e-12
        )
        assert params["C1"] == pytest.approx(-3.9594, abs=1e-4)


class TestSweep:
    def test_classical_limit(self):
        report = sweep(SweepSpec(s2=(100, 1000, 10000)))
        gaps = [abs(v) for v in report.column("ratio_minus_one")]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 3e-5
        assert report.column("n2i") == [0.0, 0.0, 0.0]

    def test_empty_expansion(self, tmp_out):
        report = sweep(SweepSpec())
        assert len(report) == 0
        assert export_sweep(report, tmp_out / "sweep.csv").success
        assert read_csv(tmp_out / "sweep.csv") == [SWEEP_COLUMNS]

    def test_failures_are_recorded_per_row(self):
        report = sweep(SweepSpec(s2=(5,), s3=(4, 6), m=(0, 9)))
        codes = report.column("error_code")
        assert codes == [
            "CONVENTION_VIOLATION",
            "CONVENTION_VIOLATION",
            None,
            "INDEX_OUT_OF_RANGE",
        ]
        assert report.rows[2]["gammaQ"] is not None
        assert len(report.failures) == 3

    def test_unexpected_row_error_does_not_stop_the_sweep(self, monkeypatch):
        growth_rate = mutations.classical_growth_rate

        def fragile(n1i, n2i, n3i):
            if n1i > 500:
                raise RuntimeError("overflow in growth rate")
            return growth_rate(n1i, n2i, n3i)

        monkeypatch.setattr(mutations, "classical_growth_rate", fragile)
        report = sweep(SweepSpec(s2=(100, 1000, 50)))
        assert report.column("error_code") == [None, "INTERNAL_ERROR", None]
        assert report.rows[1]["error_message"] == "overflow in growth rate"
        assert report.rows[2]["gammaC"] is not None

    def test_spacing_column(self):
        report = sweep(SweepSpec(s2=(100,), s3=(100, 1000), spectrum=True))
        unstable, stable = report.column("spacing_deviation")
        assert stable < 1e-3 < unstable
        # stable pump state: no growth rate
        assert report.rows[1]["gammaQ"] is None

    @pytest.mark.slow
    def test_pool_keeps_order(self):
        spec = SweepSpec(s2=(20, 40, 60, 80), epsilon=(0.0, 0.1))
        assert sweep(spec, jobs=2).rows == sweep(spec, jobs=1).rows

    @pytest.mark.slow
    def test_divergence_column(self):
        spec = SweepSpec(s2=(103,), s3=(110,), m=(3,), epsilon=(0.1,), divergence=True)
        report = sweep(spec, tau_max=0.14, points=141)
        onset = report.rows[0]["divergence_time"]
        assert 0.1 < onset <= 0.14

    def test_json_export(self, tmp_out):
        report = sweep(SweepSpec(s2=(10,)))
        assert export_sweep(report, tmp_out / "sweep.json", Format.JSON).success
        payload = json.loads((tmp_out / "sweep.json").read_text())
        assert payload["columns"] == SWEEP_COLUMNS
        assert payload["rows"][0]["s2"] == 10


class TestCommandLine:
    @pytest.fixture
    def invoke(self):
        from click.testing import CliRunner

        from manage import cli

        runner = CliRunner(mix_stderr=False)
        yield lambda *args: runner.invoke(cli, [str(a) for a in args])
        # handlers still point at the runner's closed stderr
        logging.config.dictConfig(settings.LOGGING)

    @staticmethod
    def error(result):
        return json.loads(result.stderr.strip().splitlines()[-1])

    def test_spectrum(self, invoke, tmp_out):
        result = invoke("spectrum", "--s2", 2, "--s3", 2, "--out", tmp_out)
        assert result.exit_code == 0, result.stderr
        line = json.loads(result.stdout)
        assert line["artifacts"] == 3
        assert (tmp_out / "spectrum" / "manifest.json").is_file()

    def test_sweep(self, invoke, tmp_out):
        args = ["sweep", "--s2", 10, "--s2", 20, "--out", tmp_out]
        result = invoke(*args, "--label", "grid")
        assert result.exit_code == 0, result.stderr
        rows = read_csv(tmp_out / "grid" / "sweep.csv")
        assert rows[0] == SWEEP_COLUMNS
        assert len(rows) == 3

    def test_usage_error(self, invoke, tmp_out):
        result = invoke("evolve", "--s2", 5, "--s3", 4, "--out", tmp_out)
        assert result.exit_code == 2
        error = self.error(result)
        assert error["code"] == "VALIDATION_ERROR"
        assert error["message"].startswith("subspace")

    def test_missing_option(self, invoke):
        assert invoke("evolve", "--s2", 5).exit_code == 2

    def test_numerical_error(self, invoke, tmp_path, tmp_out):
        config = tmp_path / "bad.yaml"
        config.write_text(
            "kind: evolve\n"
            "subspace: {s2: 1, s3: 1}\n"
            "initial: {amplitudes: [[1.0, 0.0], [1.0, 0.0]]}\n"
        )
        result = invoke("run", config, "--out", tmp_out)
        assert result.exit_code == 3
        assert self.error(result)["code"] == "NORMALIZATION_ERROR"

    def test_artifact_error(self, invoke, tmp_out):
        (tmp_out / "spectrum").write_text("")
        result = invoke("spectrum", "--s2", 2, "--s3", 2, "--out", tmp_out)
        assert result.exit_code == 4
        assert self.error(result)["code"] == "IO_ERROR"

    def test_show_preset(self, invoke):
        result = invoke("show-preset", "fig1")
        assert result.exit_code == 0
        assert "linear-compare" in result.stdout

import math

import numpy as np
import pytest

from sidebandsep import cli
from sidebandsep.config import (
    experiment_a_defaults,
    experiment_b_defaults,
    load_config,
    parse_config,
)
from sidebandsep.errors import ConfigError
from sidebandsep.experiments import Report, ReportRow, run_experiment_a, run_experiment_b, run_sweep
from sidebandsep.umzi import LOCK_MINUS

SCENARIO = """\
name: trial
analysis_frequency_hz: 10.25e6
source:
  type: squeezed
  v_plus_db: 4.0
  excess_phase_db: 3.0
umzi:
  lock: -pi/2
  eta_mm: 0.81
detection:
  direct: true
  joint: true
  bell:
    visibility: 0.9
oracle:
  samples: 20000
  seed: 7
"""


class TestParse:
    def test_values(self):
        cfg = parse_config(SCENARIO)
        assert cfg.analysis_frequency_hz == 10.25e6
        assert cfg.umzi.lock == LOCK_MINUS
        assert cfg.umzi.visibility == pytest.approx(0.9)
        v_plus, v_minus = cfg.source.variances()
        assert v_plus == pytest.approx(10**-0.4)
        assert v_minus == pytest.approx(10**0.4 * 10**0.3)
        assert cfg.oracle.samples == 20000
        assert cfg.detection.bell_visibility == 0.9

    @pytest.mark.parametrize("defaults", [experiment_a_defaults, experiment_b_defaults])
    def test_round_trip(self, defaults):
        cfg = defaults()
        assert parse_config(cfg.to_yaml()) == cfg

    def test_round_trip_with_oracle(self):
        cfg = parse_config(SCENARIO)
        assert parse_config(cfg.to_yaml()) == cfg

    def test_load(self, tmp_path):
        path = tmp_path / "s.yaml"
        path.write_text(SCENARIO)
        assert load_config(path).name == "trial"

    @pytest.mark.parametrize(
        "text, line",
        [
            (SCENARIO.replace("  v_plus_db: 4.0", "  v_plus_db: lots"), 5),
            (SCENARIO.replace("  eta_mm: 0.81", "  eta_mm: 1.5"), 9),
            (SCENARIO.replace("  joint: true", "  joint: true\n  spooky: 1"), 13),
            (SCENARIO.replace("  type: squeezed", "  type: laser"), 4),
            (SCENARIO.replace("  eta_mm: 0.81", "  eta_mm: 0.81\n  visibility: 0.9"), 9),
        ],
    )
    def test_errors_carry_line_numbers(self, text, line):
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.line == line
        assert str(info.value).startswith(f"line {line}:")

    def test_invalid_yaml(self):
        with pytest.raises(ConfigError):
            parse_config("a: [1, 2\nb: 3")

    def test_top_level_must_be_mapping(self):
        with pytest.raises(ConfigError):
            parse_config("- 1\n- 2\n")


class TestRunners:
    def test_experiment_b_rows(self):
        report = run_experiment_b(experiment_b_defaults())
        assert report.row("V_add+ closed form (ideal)").db == pytest.approx(-1.5549, abs=1e-3)
        assert report.verdicts["joint"].entangled
        assert report.verdicts["bell"].entangled
        assert report.row("A1 V+ (prompt frame)").linear == pytest.approx(report.row("V_out mode-mismatch closed form").linear, abs=1e-10)

    def test_experiment_a_rows_and_traces(self):
        report = run_experiment_a(experiment_a_defaults())
        assert report.row("A1 lower side-band power").linear == pytest.approx(0.01, abs=2e-4)
        assert set(report.traces) == {"homodyne", "spectrum_input", "spectrum_port1", "spectrum_port2"}

    def test_wrong_source_kind(self):
        with pytest.raises(ConfigError):
            run_experiment_a(experiment_b_defaults())
        with pytest.raises(ConfigError):
            run_experiment_b(experiment_a_defaults())

    def test_write(self, tmp_path):
        report = run_experiment_b(experiment_b_defaults().with_oracle(20_000, 1))
        paths = report.write(tmp_path)
        header = paths[0].read_text().splitlines()[0]
        assert header == "scenario,measurement,normalization,linear,dB,oracle_mean,oracle_se,abs_z"

    def test_sweep_theta_flat_outputs(self):
        thetas = np.linspace(0, math.pi, 65)
        header, table = run_sweep(experiment_b_defaults(), "theta", thetas)
        assert header[0] == "theta_rad"
        # the unmatched light keeps a residual (1 - eta)(V- - V+)/4 phase dependence
        eta = 0.95**2
        assert np.ptp(table[:, 2]) == pytest.approx((1 - eta) * (10**0.4 - 10**-0.4) / 4, rel=1e-9)

    def test_sweep_visibility(self):
        header, table = run_sweep(experiment_b_defaults(), "visibility", [0.8, 1.0])
        assert table[-1, 2] == pytest.approx(10**-0.4 / 2 + 0.5, abs=1e-10)


class TestCli:
    def test_run_b_ok(self, capsys):
        assert cli.main(["run-b"]) == cli.EXIT_OK
        assert "ENTANGLED" in capsys.readouterr().out

    def test_run_a_csv(self, capsys, tmp_path):
        assert cli.main(["run-a", "--format", "csv", "--out", str(tmp_path)]) == cli.EXIT_OK
        assert capsys.readouterr().out.startswith("scenario,measurement")
        assert (tmp_path / "experiment-a_spectrum_port1.csv").exists()

    def test_oracle_flag(self, capsys):
        assert cli.main(["run-b", "--oracle", "20000", "--seed", "5"]) == cli.EXIT_OK

    def test_config_error_exit(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("source:\n  type: squeezed\n  v_plus_db: [1]\n")
        assert cli.main(["run-b", "--config", str(path)]) == cli.EXIT_CONFIG
        assert "line 3" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert cli.main(["run-b", "--config", str(tmp_path / "none.yaml")]) == cli.EXIT_CONFIG

    def test_physics_exit(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("source:\n  type: squeezed\n  v_plus_db: 4\n  v_minus_db: 2\n")
        assert cli.main(["run-b", "--config", str(path)]) == cli.EXIT_PHYSICS

    def test_unreachable_frequency(self):
        assert cli.main(["timing", "--target", "30e6"]) == cli.EXIT_PHYSICS

    def test_timing_table(self, capsys, tmp_path):
        assert cli.main(["timing", "--format", "csv", "--out", str(tmp_path)]) == cli.EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "n,f_m_hz,delta_l_m"
        assert out[2].startswith("2,10250000,7.31201")
        assert (tmp_path / "timing.csv").exists()

    def test_sweep(self, capsys):
        assert cli.main(["sweep", "--param", "squeezing", "--start", "0", "--stop", "6", "--num", "4"]) == cli.EXIT_OK

    def test_oracle_disagreement_exit(self, monkeypatch):
        def fake(cfg, workers=1):
            report = Report("fake")
            report.rows.append(ReportRow("fake", "x", "one-output-QNL", 1.0, oracle_mean=1.5, oracle_se=0.1))
            return report

        monkeypatch.setattr(cli, "run_experiment_b", fake)
        assert cli.main(["run-b"]) == cli.EXIT_ORACLE

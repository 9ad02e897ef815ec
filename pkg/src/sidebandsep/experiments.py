"""Runners for the classical separation (A) and entanglement (B) experiments.

Each runner returns a :class:`Report`: measurement rows with analytic
values (and oracle estimates when requested), named traces written as
separate CSV files, and entanglement verdicts.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import detection as det
from .config import ScenarioConfig, SourceConfig
from .core import (
    AnalysisSetup,
    Probe,
    make_modulated_coherent,
    make_squeezed_state,
    probe_variance,
    quadrature_variance,
    to_db,
    vacuum_state,
)
from .errors import ConfigError
from .network import compose, propagate
from .oracle import OracleScenario, run_oracle
from .spectrum import render_separated_spectra, render_spectrum, spectral_lines
from .timing import PulseTrainSpec, nearest_valid_config, timing_table
from .umzi import (
    PROMPT_ANGLE,
    build_umzi_network,
    correlation_variances,
    mode_mismatch_output,
    symmetric_output_variance,
)

CSV_COLUMNS = ("scenario", "measurement", "normalization", "linear", "dB", "oracle_mean", "oracle_se", "abs_z")
RELATIVE_POWER = "relative-power"
Z_LIMIT = 3.0


@dataclass
class ReportRow:
    scenario: str
    measurement: str
    normalization: str
    linear: float
    oracle_mean: float | None = None
    oracle_se: float | None = None

    @property
    def db(self) -> float | None:
        return to_db(self.linear) if self.linear > 0 else None

    @property
    def abs_z(self) -> float | None:
        if self.oracle_mean is None or not self.oracle_se:
            return None
        return abs(self.oracle_mean - self.linear) / self.oracle_se


@dataclass
class Report:
    scenario: str
    rows: list = field(default_factory=list)
    traces: dict = field(default_factory=dict)  # name -> (header, 2-D array)
    verdicts: dict = field(default_factory=dict)  # label -> Verdict

    def add(self, measurement, value, normalization=det.ONE_OUTPUT):
        row = ReportRow(self.scenario, measurement, normalization, float(value))
        self.rows.append(row)
        return row

    def row(self, measurement) -> ReportRow:
        for r in self.rows:
            if r.measurement == measurement:
                return r
        raise KeyError(measurement)

    def max_abs_z(self) -> float:
        zs = [r.abs_z for r in self.rows if r.abs_z is not None]
        return max(zs, default=0.0)

    def oracle_failed(self) -> bool:
        return self.max_abs_z() > Z_LIMIT

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([
                r.scenario, r.measurement, r.normalization, _fmt(r.linear), _fmt(r.db),
                _fmt(r.oracle_mean), _fmt(r.oracle_se), _fmt(r.abs_z),
            ])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"scenario: {self.scenario}", ""]
        head = f"{'measurement':<34} {'normalization':<16} {'linear':>12} {'dB':>9} {'oracle':>12} {'|z|':>6}"
        lines += [head, "-" * len(head)]
        for r in self.rows:
            db = f"{r.db:9.3f}" if r.db is not None else f"{'':>9}"
            oracle = f"{r.oracle_mean:12.6f}" if r.oracle_mean is not None else f"{'':>12}"
            z = f"{r.abs_z:6.2f}" if r.abs_z is not None else f"{'':>6}"
            lines.append(f"{r.measurement:<34} {r.normalization:<16} {r.linear:12.6f} {db} {oracle} {z}")
        for label, v in self.verdicts.items():
            state = "ENTANGLED" if v.entangled else "not entangled"
            lines.append(
                f"{label}: {state} (margin {v.margin_db:+.3f} dB; sum criterion "
                f"{v.sum_value:.4f} {'<' if v.sum_criterion else '>='} 2)"
            )
        if self.traces:
            lines.append("traces: " + ", ".join(sorted(self.traces)))
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / f"{self.scenario}_measurements.csv"]
        written[0].write_text(self.to_csv())
        for name, (header, data) in self.traces.items():
            path = out / f"{self.scenario}_{name}.csv"
            np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt="%.10g")
            written.append(path)
        return written


def _fmt(value):
    return "" if value is None else f"{value:.10g}"


def _attach_oracle(report: Report, scenario: OracleScenario, probes_to_rows: dict, cfg: ScenarioConfig, workers):
    if cfg.oracle is None or not probes_to_rows:
        return
    run = run_oracle(scenario, cfg.oracle.samples, cfg.oracle.seed, workers=workers)
    for name, row in probes_to_rows.items():
        est = run.estimates[name]
        row.oracle_mean, row.oracle_se = est.variance, est.stderr


def _source_state(src: SourceConfig, setup: AnalysisSetup):
    v_plus, v_minus = src.variances()
    if src.kind == "squeezed":
        return make_squeezed_state(v_plus, v_minus, carrier=src.carrier, setup=setup)
    if src.kind == "modulated_coherent":
        return make_modulated_coherent(
            src.beta, src.modulation, carrier=src.carrier, setup=setup, v_plus=v_plus, v_minus=v_minus
        )
    return vacuum_state(("A_in",), setup)


def _quadrature_probe(name, beam, theta):
    return Probe(name, ((beam, theta, 1.0),))


def run_experiment_a(cfg: ScenarioConfig, workers: int = 1) -> Report:
    """Classical side-band separation: analyzer spectra plus homodyne traces."""
    if cfg.source.kind != "modulated_coherent":
        raise ConfigError(f"experiment A needs a modulated_coherent source, got {cfg.source.kind!r}")
    setup = AnalysisSetup.from_hz(cfg.analysis_frequency_hz)
    state = _source_state(cfg.source, setup)
    umzi = cfg.umzi_config()
    net = build_umzi_network(umzi)
    out = propagate(state, net)
    report = Report(cfg.name)

    fp = cfg.spectrum
    trace_in = render_spectrum(state, fp)
    trace_1, trace_2 = render_separated_spectra(state, umzi, fp)
    report.traces["spectrum_input"] = (("frequency_hz", "power_rel"), np.column_stack([trace_in.frequency_hz, trace_in.power_rel]))
    report.traces["spectrum_port1"] = (("frequency_hz", "power_rel"), np.column_stack([trace_1.frequency_hz, trace_1.power_rel]))
    report.traces["spectrum_port2"] = (("frequency_hz", "power_rel"), np.column_stack([trace_2.frequency_hz, trace_2.power_rel]))

    lines_in = {ln.label: ln.power for ln in spectral_lines(state)}
    for port in ("A1", "A2"):
        beams = [b for b in out.beams if b == port or b == port + "_perp"]
        lines = {ln.label: ln.power for ln in spectral_lines(out, beams)}
        for side in ("upper", "lower"):
            if lines_in[side] > 0:
                report.add(f"{port} {side} side-band power", lines[side] / lines_in[side], RELATIVE_POWER)
        if lines_in["carrier"] > 0:
            report.add(f"{port} carrier power", lines["carrier"] / lines_in["carrier"], RELATIVE_POWER)

    input_probes, output_probes = {}, {}
    v_plus_in = quadrature_variance(state, "A_in", 0.0)
    v_minus_in = quadrature_variance(state, "A_in", math.pi / 2)
    for name, theta, value in (("A_in V+", 0.0, v_plus_in), ("A_in V-", math.pi / 2, v_minus_in)):
        input_probes[name] = (_quadrature_probe(name, "A_in", theta), report.add(name, value))
    for port in ("A1", "A2"):
        name = f"{port} V+ (prompt frame)"
        probe = _quadrature_probe(name, port, PROMPT_ANGLE[port])
        output_probes[name] = (probe, report.add(name, probe_variance(out, probe)))
    report.add("V_out mode-mismatch closed form", mode_mismatch_output(v_plus_in, v_minus_in, umzi.eta_mm))

    h = cfg.detection.homodyne
    if h is not None:
        thetas = np.linspace(0.0, 2 * math.pi, h.sweep_points, endpoint=False)
        det_in = det.DetectorConfig(h.input_visibility, h.quantum_efficiency)
        det_out = det.DetectorConfig(h.output_visibility, h.quantum_efficiency)
        port = "A2"
        trace_in_h = det.homodyne_sweep(state, "A_in", thetas, det_in)
        trace_out_h = det.homodyne_sweep(out, port, thetas, det_out)
        theory = det.with_efficiency(mode_mismatch_output(v_plus_in, v_minus_in, umzi.eta_mm), det_out.efficiency)
        report.traces["homodyne"] = (
            ("theta_rad", "qnl", "input", f"output_{port}", "theory"),
            np.column_stack([thetas, np.ones_like(thetas), trace_in_h, trace_out_h, np.full_like(thetas, theory)]),
        )
        report.add(f"homodyne {port} mean over LO phase", float(trace_out_h.mean()))
        report.add(f"homodyne {port} theory", theory)
        report.add(f"homodyne {port} LO-phase spread", float(np.ptp(trace_out_h)))

    _attach_oracle(
        report, OracleScenario(state, tuple(p for p, _ in input_probes.values())),
        {k: r for k, (_, r) in input_probes.items()}, cfg, workers,
    )
    _attach_oracle(
        report, OracleScenario(state, tuple(p for p, _ in output_probes.values()), net),
        {k: r for k, (_, r) in output_probes.items()}, cfg, workers,
    )
    return report


def run_experiment_b(cfg: ScenarioConfig, workers: int = 1) -> Report:
    """Entanglement between the separated side-bands of a squeezed beam."""
    if cfg.source.kind != "squeezed":
        raise ConfigError(f"experiment B needs a squeezed source, got {cfg.source.kind!r}")
    setup = AnalysisSetup.from_hz(cfg.analysis_frequency_hz)
    state = _source_state(cfg.source, setup)
    v_plus, v_minus = cfg.source.variances()
    umzi = cfg.umzi_config()
    net = build_umzi_network(umzi)
    out = propagate(state, net)
    report = Report(cfg.name)
    probes = {}

    def track(probe, value, normalization=det.ONE_OUTPUT):
        probes[probe.name] = (probe, report.add(probe.name, value, normalization))

    report.add("input V+", v_plus)
    report.add("input V-", v_minus)
    if cfg.detection.direct:
        for port in ("A1", "A2"):
            theta = det.carrier_angle(out, port)
            track(_quadrature_probe(f"{port} amplitude noise", port, theta), det.direct_detection(out, port).value_linear)
    for port in ("A1", "A2"):
        probe = _quadrature_probe(f"{port} V+ (prompt frame)", port, PROMPT_ANGLE[port])
        track(probe, probe_variance(out, probe))
    report.add("V_out closed form (ideal)", symmetric_output_variance(v_plus, v_minus))
    report.add("V_out mode-mismatch closed form", mode_mismatch_output(v_plus, v_minus, umzi.eta_mm))

    ideal = correlation_variances(v_plus, v_minus)
    for name, value in zip(("V_add+", "V_sub+", "V_add-", "V_sub-"), ideal):
        report.add(f"{name} closed form (ideal)", value, det.TWO_OUTPUT)
    if cfg.detection.joint:
        jv = det.joint_variances(out, "A1", "A2")
        for probe, result in zip(det.joint_probes(out, "A1", "A2"), jv):
            track(Probe(f"joint {probe.name}", probe.terms, probe.divisor), result.value_linear, det.TWO_OUTPUT)
        report.verdicts["joint"] = det.entanglement_verdict(jv.add_plus, jv.sub_minus)

    bell_probes = {}
    if cfg.detection.bell_visibility is not None:
        bell_net = det.bell_network(out, "A1", "A2", cfg.detection.bell_visibility)
        bell_out = propagate(out, bell_net)
        for probe in det.photocurrent_probes(bell_out):
            bell_probes[probe.name] = (probe, report.add(probe.name, probe_variance(bell_out, probe), det.TWO_OUTPUT))
        add, sub = (bell_probes[k][1].linear for k in ("bell V_add+", "bell V_sub-"))
        report.verdicts["bell"] = det.entanglement_verdict(add, sub)

    _attach_oracle(
        report, OracleScenario(state, tuple(p for p, _ in probes.values()), net),
        {k: r for k, (_, r) in probes.items()}, cfg, workers,
    )
    if bell_probes:
        _attach_oracle(
            report, OracleScenario(state, tuple(p for p, _ in bell_probes.values()), compose(net, bell_net)),
            {k: r for k, (_, r) in bell_probes.items()}, cfg, workers,
        )
    return report


def run_timing(rep_rate: float, f_target: float | None = None, n_max: int = 10) -> tuple[tuple, list]:
    """Table of admissible ``(n, f_m, delta_L)``; with a target, only the nearest config."""
    spec = PulseTrainSpec(rep_rate)
    if f_target is not None:
        cfg = nearest_valid_config(spec, f_target)
        return ("n", "f_m_hz", "delta_l_m", "error_hz"), [(cfg.n, cfg.f_m, cfg.delta_l, cfg.error)]
    return ("n", "f_m_hz", "delta_l_m"), [(c.n, c.f_m, c.delta_l) for c in timing_table(spec, n_max)]


SWEEP_PARAMS = ("theta", "visibility", "squeezing")


def run_sweep(cfg: ScenarioConfig, param: str, values) -> tuple[tuple, np.ndarray]:
    """Evaluate the separator over a parameter grid; returns ``(header, table)``."""
    setup = AnalysisSetup.from_hz(cfg.analysis_frequency_hz)
    values = np.asarray(values, dtype=float)
    if param == "theta":
        state = _source_state(cfg.source, setup)
        out = propagate(state, build_umzi_network(cfg.umzi_config()))
        rows = [
            (t, quadrature_variance(state, "A_in", t), quadrature_variance(out, "A1", t), quadrature_variance(out, "A2", t))
            for t in values
        ]
        return ("theta_rad", "V_A_in", "V_A1", "V_A2"), np.array(rows)

    if param not in ("visibility", "squeezing"):
        raise ValueError(f"unknown sweep parameter {param!r} (choose from {', '.join(SWEEP_PARAMS)})")
    if cfg.source.kind != "squeezed":
        raise ConfigError(f"{param} sweeps need a squeezed source, got {cfg.source.kind!r}")
    rows = []
    for value in values:
        point = cfg
        if param == "visibility":
            point = replace(cfg, umzi=replace(cfg.umzi, visibility=float(value)))
        else:
            point = replace(cfg, source=replace(cfg.source, v_plus_db=float(value), v_minus_db=None))
        state = _source_state(point.source, setup)
        out = propagate(state, build_umzi_network(point.umzi_config()))
        jv = det.joint_variances(out, "A1", "A2")
        verdict = det.entanglement_verdict(jv.add_plus, jv.sub_minus)
        rows.append((
            value,
            quadrature_variance(out, "A1", PROMPT_ANGLE["A1"]),
            jv.add_plus.value_linear,
            jv.sub_minus.value_linear,
            float(verdict.entangled),
        ))
    return (param, "V_out_A1", "V_add+", "V_sub-", "entangled"), np.array(rows)

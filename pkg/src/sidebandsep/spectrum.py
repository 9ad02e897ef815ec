"""Scanning Fabry-Perot analyzer traces of carrier and side-band lines.

Each spectral line renders as the FSR-periodic sum of Lorentzians,
evaluated in closed form

    sum_k g / ((x - k F)^2 + g^2) = (pi/F) sinh(a) / (cosh(a) - cos(2 pi x / F)),
    a = 2 pi g / F,  g = HWHM,

scaled so the peak height equals the line power. Lines at ``f`` and
``f + FSR`` therefore land on the same scan position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import SidebandState
from .network import propagate
from .umzi import PERP_PORTS, PORTS, UmziConfig, build_umzi_network

CARRIER = "carrier"


@dataclass(frozen=True)
class FabryPerotSpec:
    """Analyzer cavity plus scan settings, all frequencies in Hz.

    ``mismatch_fraction`` is the relative power coupled into the cavity's
    odd transverse modes, which a confocal cavity shows half an FSR away
    from every line.
    """

    fsr: float = 500e6
    linewidth: float = 2e6
    scan_range: float = 600e6
    resolution: int = 6001
    center: float = 0.0
    mismatch_fraction: float = 0.0

    def __post_init__(self):
        if not self.fsr > self.linewidth > 0:
            raise ValueError("need fsr > linewidth > 0")
        if not self.scan_range > 0 or self.resolution < 2:
            raise ValueError("scan range must be positive with at least two points")
        if not 0.0 <= self.mismatch_fraction < 1.0:
            raise ValueError(f"mismatch_fraction must lie in [0, 1), got {self.mismatch_fraction}")

    def frequencies(self) -> np.ndarray:
        half = self.scan_range / 2
        return np.linspace(self.center - half, self.center + half, self.resolution)


@dataclass(frozen=True)
class SpectralLine:
    frequency: float  # Hz relative to the carrier
    power: float
    label: str = ""


@dataclass(frozen=True)
class SpectrumTrace:
    frequency_hz: np.ndarray
    power_rel: np.ndarray
    lines: tuple = field(default=())

    def clipped(self, level: float | None = None) -> np.ndarray:
        """Display copy with the carrier truncated.

        The default level is 1.2 times the tallest non-carrier line.
        """
        if level is None:
            side = [ln.power for ln in self.lines if ln.label != CARRIER]
            if not side or max(side) <= 0:
                return self.power_rel.copy()
            level = 1.2 * max(side)
        return np.minimum(self.power_rel, level)

    def power_at(self, frequency: float) -> float:
        i = int(np.argmin(np.abs(self.frequency_hz - frequency)))
        return float(self.power_rel[i])

    def peaks(self, threshold: float = 0.0) -> np.ndarray:
        """Frequencies of local maxima above ``threshold`` (grid resolution)."""
        p = self.power_rel
        inner = (p[1:-1] > p[:-2]) & (p[1:-1] >= p[2:]) & (p[1:-1] > threshold)
        return self.frequency_hz[1:-1][inner]


def periodic_lorentzian(x: np.ndarray, center: float, fsr: float, linewidth: float) -> np.ndarray:
    """Unit-peak FSR-periodic Lorentzian centred on ``center``."""
    a = 2.0 * math.pi * (linewidth / 2.0) / fsr
    shape = np.sinh(a) / (np.cosh(a) - np.cos(2.0 * math.pi * (x - center) / fsr))
    return shape * (np.cosh(a) - 1.0) / np.sinh(a)


def spectral_lines(state: SidebandState, beams=None) -> list[SpectralLine]:
    """Classical lines of the given beams; powers of co-propagating beams add."""
    beams = state.beams if beams is None else beams
    f = state.setup.frequency_hz
    power = {CARRIER: 0.0, "upper": 0.0, "lower": 0.0}
    for beam in beams:
        coh = state.coherent(beam)
        power[CARRIER] += abs(coh.alpha_carrier) ** 2
        power["upper"] += abs(coh.alpha_upper) ** 2
        power["lower"] += abs(coh.alpha_lower) ** 2
    return [
        SpectralLine(0.0, power[CARRIER], CARRIER),
        SpectralLine(f, power["upper"], "upper"),
        SpectralLine(-f, power["lower"], "lower"),
    ]


def render_lines(lines, fp: FabryPerotSpec) -> SpectrumTrace:
    x = fp.frequencies()
    total = np.zeros_like(x)
    rendered = list(lines)
    if fp.mismatch_fraction:
        rendered += [
            SpectralLine(ln.frequency + fp.fsr / 2, fp.mismatch_fraction * ln.power, ln.label + " (mismatch)")
            for ln in lines
        ]
    for ln in rendered:
        if ln.power:
            total += ln.power * periodic_lorentzian(x, ln.frequency, fp.fsr, fp.linewidth)
    return SpectrumTrace(x, total, tuple(rendered))


def render_spectrum(state: SidebandState, fp: FabryPerotSpec, beams=None, extra_lines=()) -> SpectrumTrace:
    """Analyzer trace of one beam (or several co-propagating beams summed)."""
    return render_lines(spectral_lines(state, beams) + list(extra_lines), fp)


def render_separated_spectra(input_state: SidebandState, cfg: UmziConfig, fp: FabryPerotSpec):
    """Traces of both UMZI output ports.

    The analyzer collects every spatial mode in a port, so light that
    failed to interfere (``A1_perp``/``A2_perp``) is included.
    """
    if len(input_state.beams) != 1:
        raise ValueError("expected a single input beam")
    state = input_state.rename({input_state.beams[0]: "A_in"})
    out = propagate(state, build_umzi_network(cfg))
    traces = []
    for port, perp in zip(PORTS, PERP_PORTS):
        beams = [port] + ([perp] if perp in out.beams else [])
        traces.append(render_spectrum(out, fp, beams))
    return tuple(traces)


def integrated_power(trace: SpectrumTrace) -> float:
    return float(np.trapezoid(trace.power_rel, trace.frequency_hz))


def write_csv(trace: SpectrumTrace, path) -> None:
    np.savetxt(
        path,
        np.column_stack([trace.frequency_hz, trace.power_rel]),
        delimiter=",",
        header="frequency_hz,power_rel",
        comments="",
        fmt="%.10g",
    )

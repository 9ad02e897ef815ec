"""Detection models: homodyne, direct detection, joint and Bell-type measurements.

Joint measurements refer each beam's amplitude quadrature to that beam's
own carrier phase, which is what a photodetector on a bright beam sees.
The phase quadrature is ``X(theta_carrier - pi/2) = i(a(+W) - a(-W)^dag)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Probe, SidebandState, probe_variance, quadrature_variance, to_db
from .network import OpticalNetwork, beamsplitter, loss, phase_shift, propagate

ONE_OUTPUT = "one-output-QNL"
TWO_OUTPUT = "two-output-QNL"


@dataclass(frozen=True)
class MeasurementResult:
    name: str
    value_linear: float
    normalization: str = ONE_OUTPUT

    def __post_init__(self):
        if self.normalization not in (ONE_OUTPUT, TWO_OUTPUT):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if not self.value_linear >= 0:
            raise ValueError(f"{self.name}: negative variance {self.value_linear}")

    @property
    def value_db(self) -> float:
        return to_db(self.value_linear)


@dataclass(frozen=True)
class DetectorConfig:
    """Homodyne detector; overall efficiency is ``visibility**2 * quantum_efficiency``."""

    homodyne_visibility: float = 1.0
    quantum_efficiency: float = 1.0

    def __post_init__(self):
        for name in ("homodyne_visibility", "quantum_efficiency"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")

    @property
    def efficiency(self) -> float:
        return self.homodyne_visibility**2 * self.quantum_efficiency


def with_efficiency(variance: float, eta: float) -> float:
    """Variance seen after a loss ``eta`` that admits vacuum."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta}")
    return eta * variance + (1.0 - eta)


def homodyne(state: SidebandState, beam: str, theta: float, det: DetectorConfig | None = None) -> MeasurementResult:
    det = det or DetectorConfig()
    value = with_efficiency(quadrature_variance(state, beam, theta), det.efficiency)
    return MeasurementResult(f"homodyne[{beam}]", value, ONE_OUTPUT)


def homodyne_sweep(state, beam, thetas, det=None) -> np.ndarray:
    return np.array([homodyne(state, beam, t, det).value_linear for t in thetas])


def carrier_angle(state: SidebandState, beam: str) -> float:
    """Phase of a beam's carrier; 0 when the beam has no carrier."""
    carrier = state.coherent(beam).alpha_carrier
    return float(np.angle(carrier)) if abs(carrier) > 0 else 0.0


def direct_detection(state: SidebandState, beam: str) -> MeasurementResult:
    """Intensity noise at the analysis frequency, i.e. the carrier-referenced amplitude quadrature."""
    if abs(state.coherent(beam).alpha_carrier) == 0:
        raise ValueError(f"beam {beam!r} has no carrier; direct detection sees no beat note")
    value = quadrature_variance(state, beam, carrier_angle(state, beam))
    return MeasurementResult(f"direct[{beam}]", value, ONE_OUTPUT)


def direct_signal_power(state: SidebandState, beam: str) -> float:
    """Power of the classical photocurrent tone at the analysis frequency.

    The photocurrent component ``exp(-i W t)`` of ``|A0 + u e^{-iWt} +
    l e^{iWt}|^2`` is ``c = conj(A0) u + A0 conj(l)``; the real tone is
    ``2|c| cos(W t + arg c)`` and this returns ``|2c|^2``.
    """
    coh = state.coherent(beam)
    c = np.conj(coh.alpha_carrier) * coh.alpha_upper + coh.alpha_carrier * np.conj(coh.alpha_lower)
    return float(abs(2.0 * c) ** 2)


@dataclass(frozen=True)
class JointVariances:
    add_plus: MeasurementResult
    sub_plus: MeasurementResult
    add_minus: MeasurementResult
    sub_minus: MeasurementResult

    def __iter__(self):
        return iter((self.add_plus, self.sub_plus, self.add_minus, self.sub_minus))

    def linear(self) -> tuple[float, float, float, float]:
        return tuple(r.value_linear for r in self)


def joint_probes(state: SidebandState, beam_a: str, beam_b: str, frames=None) -> list[Probe]:
    """Probes for ``V(X_a +- X_b)/2`` in both quadratures.

    ``frames`` overrides the amplitude-quadrature angle of each beam;
    by default each beam's carrier phase is used.
    """
    if beam_a == beam_b:
        raise ValueError("joint measurement needs two distinct beams")
    if frames is None:
        frames = (carrier_angle(state, beam_a), carrier_angle(state, beam_b))
    ta, tb = frames
    q = math.pi / 2
    return [
        Probe("V_add+", ((beam_a, ta, 1.0), (beam_b, tb, 1.0)), 2.0),
        Probe("V_sub+", ((beam_a, ta, 1.0), (beam_b, tb, -1.0)), 2.0),
        Probe("V_add-", ((beam_a, ta - q, 1.0), (beam_b, tb - q, 1.0)), 2.0),
        Probe("V_sub-", ((beam_a, ta - q, 1.0), (beam_b, tb - q, -1.0)), 2.0),
    ]


def joint_variances(state: SidebandState, beam_a: str, beam_b: str, frames=None) -> JointVariances:
    results = [
        MeasurementResult(p.name, probe_variance(state, p), TWO_OUTPUT)
        for p in joint_probes(state, beam_a, beam_b, frames)
    ]
    return JointVariances(*results)


BELL_A, BELL_B = "bell_a", "bell_b"


def bell_network(state: SidebandState, beam_a: str, beam_b: str, visibility: float = 1.0) -> OpticalNetwork:
    """Equal-loss attenuation, a phase shift making the carriers co-phased, and a 50/50 splitter.

    Co-phased carriers are the analytic solution of the equal-intensity
    condition for this beamsplitter convention. Imperfect interference
    contrast enters as a loss ``visibility**2`` on both beams.
    """
    if beam_a == beam_b:
        raise ValueError("Bell measurement needs two distinct beams")
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    ca, cb = state.coherent(beam_a).alpha_carrier, state.coherent(beam_b).alpha_carrier
    if abs(ca) == 0 or abs(cb) == 0:
        raise ValueError("Bell measurement on intense beams needs a carrier on both beams")
    eta = visibility**2
    psi = float(np.angle(ca) - np.angle(cb))
    others = [b for b in state.beams if b not in (beam_a, beam_b)]
    elements = [
        loss(beam_a, "a_lossy", eta, name="contrast_a"),
        loss(beam_b, "b_lossy", eta, name="contrast_b"),
        phase_shift("b_lossy", "b_locked", psi, name="relative_phase"),
        beamsplitter("a_lossy", "b_locked", BELL_A, BELL_B, name="bell_bs"),
    ]
    return OpticalNetwork(elements, list(state.beams), [BELL_A, BELL_B] + others)


def photocurrent_probes(out: SidebandState) -> list[Probe]:
    """Sum and difference of the two detectors' photocurrents, normalized to their shot noise.

    A detector on a beam with carrier ``c`` registers ``|c| X(arg c)``.
    """
    ca, cb = out.coherent(BELL_A).alpha_carrier, out.coherent(BELL_B).alpha_carrier
    ta, tb = float(np.angle(ca)), float(np.angle(cb))
    wa, wb = abs(ca), abs(cb)
    shot = wa**2 + wb**2
    return [
        Probe("bell V_add+", ((BELL_A, ta, wa), (BELL_B, tb, wb)), shot),
        Probe("bell V_sub-", ((BELL_A, ta, wa), (BELL_B, tb, -wb)), shot),
    ]


def bell_measurement(state: SidebandState, beam_a: str, beam_b: str, visibility: float = 1.0):
    """``(V_add+, V_sub-)`` from direct detection after interfering the two beams.

    Equals :func:`joint_variances` exactly at unit visibility when the two
    carriers have equal power.
    """
    out = propagate(state, bell_network(state, beam_a, beam_b, visibility))
    add, sub = (MeasurementResult(p.name, probe_variance(out, p), TWO_OUTPUT) for p in photocurrent_probes(out))
    return add, sub


@dataclass(frozen=True)
class Verdict:
    entangled: bool
    margin_db: float
    sum_criterion: bool
    sum_value: float


def entanglement_verdict(v_add_plus, v_sub_minus) -> Verdict:
    """Sub-QNL correlations in both conjugate quadratures certify entanglement.

    Accepts floats or :class:`MeasurementResult` objects; the latter must
    be normalized to the QNL of both beams. ``margin_db`` is the weaker of
    the two correlations in dB (negative when entangled).
    """
    values = []
    for v in (v_add_plus, v_sub_minus):
        if isinstance(v, MeasurementResult):
            if v.normalization != TWO_OUTPUT:
                raise ValueError(f"{v.name} is {v.normalization}-normalized; need {TWO_OUTPUT}")
            v = v.value_linear
        values.append(float(v))
    a, b = values
    margin = max(to_db(a), to_db(b))
    return Verdict(a < 1.0 and b < 1.0, margin, a + b < 2.0, a + b)

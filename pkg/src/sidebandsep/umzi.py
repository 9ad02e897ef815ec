"""The unbalanced Mach-Zehnder side-band separator.

Port naming: inputs ``A_in`` (signal) and ``v_in`` (vacuum port), outputs
``A1`` and ``A2``. With the lock at +pi/2 and ``Omega*tau = pi/2`` the
upper side-band of ``A_in`` leaves through ``A1`` and the lower one
through ``A2``; at -pi/2 they swap.

Imperfect fringe visibility splits the delayed arm into a matched part
(power fraction ``eta_mm = visibility**2``) and an orthogonal spatial mode
that only meets vacuum at the second beamsplitter. The orthogonal light
leaves on ``A1_perp``/``A2_perp``, which co-propagate with ``A1``/``A2``
but are invisible to a mode-matched local oscillator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import SidebandState, check_uncertainty
from .network import OpticalNetwork, beamsplitter, delay, phase_shift, propagate
from .timing import SPEED_OF_LIGHT

LOCK_PLUS = math.pi / 2
LOCK_MINUS = -math.pi / 2

PORTS = ("A1", "A2")
PERP_PORTS = ("A1_perp", "A2_perp")

# Quadrature angle of the undelayed-arm light in each port (one reflection
# picks up a factor i). The mode-mismatch formula refers to these frames.
PROMPT_ANGLE = {"A1": 0.0, "A2": math.pi / 2}


@dataclass(frozen=True)
class UmziConfig:
    """Delay ``tau`` (s), lock phase ``lock`` (rad) and fringe visibility."""

    tau: float
    lock: float = LOCK_PLUS
    visibility: float = 1.0

    def __post_init__(self):
        if not self.tau >= 0:
            raise ValueError(f"delay must be non-negative, got {self.tau}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")

    @property
    def eta_mm(self) -> float:
        return self.visibility**2

    @property
    def delta_l(self) -> float:
        return SPEED_OF_LIGHT * self.tau

    @classmethod
    def for_frequency(cls, frequency_hz: float, lock: float = LOCK_PLUS, visibility: float = 1.0):
        """Delay giving a quarter-period shift at ``frequency_hz`` (``Omega*tau = pi/2``)."""
        if not frequency_hz > 0:
            raise ValueError(f"frequency must be positive, got {frequency_hz}")
        return cls(1.0 / (4.0 * frequency_hz), lock, visibility)

    @classmethod
    def from_path_difference(cls, delta_l: float, lock: float = LOCK_PLUS, visibility: float = 1.0):
        return cls(delta_l / SPEED_OF_LIGHT, lock, visibility)


def build_umzi_network(cfg: UmziConfig, signal: str = "A_in", vacuum: str = "v_in") -> OpticalNetwork:
    elements = [
        beamsplitter(signal, vacuum, "short", "long", name="bs1"),
        delay("long", "long_delayed", cfg.tau, name="delay"),
        phase_shift("long_delayed", "long_locked", cfg.lock, name="lock"),
    ]
    inputs = [signal, vacuum]
    outputs = list(PORTS)
    if cfg.visibility < 1.0:
        elements += [
            beamsplitter("long_locked", "v_perp_long", "long_matched", "long_perp",
                         reflectivity=1.0 - cfg.eta_mm, name="mismatch"),
            beamsplitter("v_perp_short", "long_perp", *PERP_PORTS, name="bs2_perp"),
        ]
        inputs += ["v_perp_long", "v_perp_short"]
        outputs += list(PERP_PORTS)
        matched = "long_matched"
    else:
        matched = "long_locked"
    elements.append(beamsplitter("short", matched, *PORTS, name="bs2"))
    return OpticalNetwork(elements, inputs, outputs)


def separate(state: SidebandState, cfg: UmziConfig, signal: str | None = None) -> SidebandState:
    """Send a single-beam state into the signal port and return the output state."""
    if signal is None:
        if len(state.beams) != 1:
            raise ValueError("name the signal beam when the state has several beams")
        signal = state.beams[0]
    return propagate(state.rename({signal: "A_in"}), build_umzi_network(cfg))


def symmetric_output_variance(v_plus: float, v_minus: float) -> float:
    """Variance of either output, any quadrature, for a symmetric input (one-output QNL)."""
    check_uncertainty(v_plus, v_minus)
    return (v_plus + v_minus + 2.0) / 4.0


def correlation_variances(v_plus: float, v_minus: float) -> tuple[float, float, float, float]:
    """``(V_add+, V_sub+, V_add-, V_sub-)`` between the two outputs (two-output QNL)."""
    check_uncertainty(v_plus, v_minus)
    return (v_plus + 1.0) / 2.0, (v_minus + 1.0) / 2.0, (v_minus + 1.0) / 2.0, (v_plus + 1.0) / 2.0


def mode_mismatch_output(v_plus: float, v_minus: float, eta_mm: float) -> float:
    """Amplitude noise of either output when only ``eta_mm`` of the delayed arm interferes."""
    if not 0.0 <= eta_mm <= 1.0:
        raise ValueError(f"eta_mm must lie in [0, 1], got {eta_mm}")
    check_uncertainty(v_plus, v_minus)
    return (v_plus + eta_mm * v_minus + 3.0 - eta_mm) / 4.0

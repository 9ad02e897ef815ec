"""Delay-line choices for side-band separation with a pulse train.

Two conditions must hold at once: the delay is a whole number ``n`` of
pulse periods (``dL = c * n * T_rep``) so successive pulses overlap, and
it is a quarter period at the measurement frequency (``dL = c/(4 f_m)``).
Together they allow ``f_m = rep_rate / (4 n)`` only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import UnreachableFrequencyError

SPEED_OF_LIGHT = 299_792_458.0  # m/s, vacuum


@dataclass(frozen=True)
class PulseTrainSpec:
    rep_rate: float  # Hz

    def __post_init__(self):
        if not self.rep_rate > 0:
            raise ValueError(f"repetition rate must be positive, got {self.rep_rate}")

    @property
    def t_rep(self) -> float:
        return 1.0 / self.rep_rate


@dataclass(frozen=True)
class TimingConfig:
    n: int
    f_m: float  # Hz
    delta_l: float  # m
    error: float = 0.0  # Hz, f_m - requested frequency


def valid_measurement_frequency(spec: PulseTrainSpec, n: int) -> TimingConfig:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    return TimingConfig(n, spec.rep_rate / (4 * n), SPEED_OF_LIGHT * n * spec.t_rep)


def nearest_valid_config(spec: PulseTrainSpec, f_target: float) -> TimingConfig:
    """Integer ``n`` whose ``f_m`` is closest to ``f_target``; ties go to the shorter delay."""
    if not f_target > 0:
        raise ValueError(f"target frequency must be positive, got {f_target}")
    f_max = spec.rep_rate / 4
    if f_target > f_max:
        raise UnreachableFrequencyError(
            f"{f_target:g} Hz is above rep_rate/4 = {f_max:g} Hz; no delay line reaches it"
        )
    # |f(n) - f_target| is unimodal in n, so the optimum brackets n* = f_max / f_target
    guess = f_max / f_target
    candidates = {max(1, math.floor(guess)), max(1, math.ceil(guess))}
    best = min(sorted(candidates), key=lambda n: abs(f_max / n - f_target))
    cfg = valid_measurement_frequency(spec, best)
    return TimingConfig(cfg.n, cfg.f_m, cfg.delta_l, cfg.f_m - f_target)


def timing_table(spec: PulseTrainSpec, n_max: int = 10) -> list[TimingConfig]:
    return [valid_measurement_frequency(spec, n) for n in range(1, n_max + 1)]

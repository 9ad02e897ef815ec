r"""Side-band mode-pair states at a fixed analysis frequency.

Every beam contributes two annihilation operators, :math:`a(+\Omega)` and
:math:`a(-\Omega)`, stored in the flat mode order
``(a_1(+W), a_1(-W), a_2(+W), a_2(-W), ...)``. A state holds the
fluctuation moments

.. math::
    N_{ij} = \langle a_i^\dagger a_j \rangle, \qquad
    M_{ij} = \langle a_i a_j \rangle,

plus the coherent side-band and carrier amplitudes of each beam. The
quadrature of a beam at angle :math:`\theta` is

.. math::
    X(\theta) = e^{-i\theta} a(+\Omega) + e^{i\theta} a(-\Omega)^\dagger,

so ``theta = 0`` is the amplitude quadrature and ``theta = pi/2`` the
phase quadrature (up to an irrelevant overall sign). Variances are
normalized so that vacuum gives 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import UnknownBeamError, UnphysicalStateError

PHYSICALITY_TOL = 1e-9

UPPER = "upper"
LOWER = "lower"


def to_db(value: float) -> float:
    """10*log10 of a QNL-normalized variance; negative means below QNL."""
    return 10.0 * math.log10(value)


def from_db(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def reduce_phase(phi: float) -> float:
    """Map an angle onto (-pi, pi]."""
    return math.pi - (math.pi - phi) % (2.0 * math.pi)


@dataclass(frozen=True)
class AnalysisSetup:
    """Analysis side-band frequency and the UMZI delay/lock it refers to.

    ``omega`` is in rad/s, ``tau`` in seconds. ``phi`` is the carrier
    phase ``omega0 * tau`` folded mod 2*pi; the absolute carrier frequency
    never appears anywhere else.
    """

    omega: float
    tau: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"analysis frequency must be positive, got {self.omega}")
        if not self.tau >= 0:
            raise ValueError(f"delay must be non-negative, got {self.tau}")
        object.__setattr__(self, "phi", reduce_phase(float(self.phi)))

    @classmethod
    def from_hz(cls, frequency_hz: float, **kwargs) -> "AnalysisSetup":
        return cls(omega=2.0 * math.pi * frequency_hz, **kwargs)

    @property
    def frequency_hz(self) -> float:
        return self.omega / (2.0 * math.pi)


@dataclass(frozen=True)
class CoherentSidebands:
    alpha_upper: complex = 0j
    alpha_lower: complex = 0j
    alpha_carrier: complex = 0j


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


def physicality_violation(N: np.ndarray, M: np.ndarray) -> float:
    """Most negative eigenvalue of the uncertainty matrix (0 if none).

    The matrix ``[[N^T + 1, M], [M^*, N]]`` is the expectation of
    ``xi xi^dagger`` for ``xi = (a, a^dagger)``; it is positive
    semidefinite for every physical state.
    """
    k = N.shape[0]
    gamma = np.block([[N.T + np.eye(k), M], [M.conj(), N]])
    gamma = 0.5 * (gamma + gamma.conj().T)
    lowest = float(np.linalg.eigvalsh(gamma)[0])
    return min(lowest, 0.0)


@dataclass(frozen=True)
class SidebandState:
    """Gaussian side-band state of one or more beams.

    Construct through :func:`vacuum_state`, :func:`make_squeezed_state`,
    :func:`make_modulated_coherent` or by propagating an existing state.
    The constructor validates the moments and refuses unphysical input.
    """

    beams: tuple[str, ...]
    N: np.ndarray
    M: np.ndarray
    alpha: np.ndarray
    carrier: np.ndarray
    setup: AnalysisSetup
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        beams = tuple(self.beams)
        if len(set(beams)) != len(beams):
            raise ValueError(f"duplicate beam labels in {beams}")
        k = 2 * len(beams)
        N, M = _frozen(self.N), _frozen(self.M)
        alpha, carrier = _frozen(self.alpha), _frozen(self.carrier)
        if N.shape != (k, k) or M.shape != (k, k):
            raise ValueError(f"moment blocks must be {k}x{k}")
        if alpha.shape != (k,) or carrier.shape != (len(beams),):
            raise ValueError("coherent amplitude vectors have the wrong length")
        for name, arr in (("N", N), ("M", M), ("alpha", alpha), ("carrier", carrier)):
            if not np.all(np.isfinite(arr)):
                raise UnphysicalStateError(f"{name} contains non-finite entries")
        scale = max(1.0, float(np.abs(N).max(initial=0)), float(np.abs(M).max(initial=0)))
        if np.abs(N - N.conj().T).max(initial=0) > PHYSICALITY_TOL * scale:
            raise UnphysicalStateError("<a^dag a> block is not Hermitian")
        if np.abs(M - M.T).max(initial=0) > PHYSICALITY_TOL * scale:
            raise UnphysicalStateError("<a a> block is not symmetric")
        if k:
            worst = physicality_violation(N, M)
            if worst < -PHYSICALITY_TOL * scale:
                raise UnphysicalStateError(
                    f"moments violate the uncertainty bound (eigenvalue {worst:.3e})"
                )
        object.__setattr__(self, "beams", beams)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "_index", {b: i for i, b in enumerate(beams)})

    def beam_index(self, beam: str) -> int:
        try:
            return self._index[beam]
        except KeyError:
            raise UnknownBeamError(f"no beam {beam!r} in state (beams: {self.beams})") from None

    def coherent(self, beam: str) -> CoherentSidebands:
        i = self.beam_index(beam)
        return CoherentSidebands(
            complex(self.alpha[2 * i]), complex(self.alpha[2 * i + 1]), complex(self.carrier[i])
        )

    def pair_moments(self, beam: str) -> tuple[float, float, complex]:
        """``(n_upper, n_lower, m)`` for a single beam, ``m = <a(-W) a(+W)>``."""
        i = self.beam_index(beam)
        u, l = 2 * i, 2 * i + 1
        return float(self.N[u, u].real), float(self.N[l, l].real), complex(self.M[l, u])

    def rename(self, mapping: dict) -> "SidebandState":
        beams = tuple(mapping.get(b, b) for b in self.beams)
        return SidebandState(beams, self.N, self.M, self.alpha, self.carrier, self.setup)

    def select(self, beams: Sequence[str]) -> "SidebandState":
        """Reduced state on a subset of beams (partial trace)."""
        idx = [self.beam_index(b) for b in beams]
        modes = [m for i in idx for m in (2 * i, 2 * i + 1)]
        sel = np.ix_(modes, modes)
        return SidebandState(
            tuple(beams), self.N[sel], self.M[sel], self.alpha[modes], self.carrier[idx], self.setup
        )

    def with_setup(self, setup: AnalysisSetup) -> "SidebandState":
        return SidebandState(self.beams, self.N, self.M, self.alpha, self.carrier, setup)


def vacuum_state(beams: Iterable[str] = ("A_in",), setup: AnalysisSetup | None = None) -> SidebandState:
    beams = tuple(beams)
    k = 2 * len(beams)
    setup = setup or AnalysisSetup.from_hz(1.0)
    return SidebandState(
        beams, np.zeros((k, k)), np.zeros((k, k)), np.zeros(k), np.zeros(len(beams)), setup
    )


def tensor(*states: SidebandState) -> SidebandState:
    """Join independent states into one multi-beam state."""
    if not states:
        raise ValueError("need at least one state")
    setup = states[0].setup
    beams = sum((s.beams for s in states), ())
    N = _block_diag([s.N for s in states])
    M = _block_diag([s.M for s in states])
    alpha = np.concatenate([s.alpha for s in states])
    carrier = np.concatenate([s.carrier for s in states])
    return SidebandState(beams, N, M, alpha, carrier, setup)


def _block_diag(blocks):
    k = sum(b.shape[0] for b in blocks)
    out = np.zeros((k, k), dtype=complex)
    i = 0
    for b in blocks:
        j = i + b.shape[0]
        out[i:j, i:j] = b
        i = j
    return out


def check_uncertainty(v_plus: float, v_minus: float) -> None:
    if not (v_plus > 0 and v_minus > 0):
        raise UnphysicalStateError(f"variances must be positive, got ({v_plus}, {v_minus})")
    if v_plus * v_minus < 1.0 - PHYSICALITY_TOL:
        raise UnphysicalStateError(
            f"V+ * V- = {v_plus * v_minus:.12g} violates the uncertainty bound"
        )


def make_squeezed_state(
    v_plus: float,
    v_minus: float,
    *,
    angle: float = 0.0,
    carrier: complex = 1.0,
    beam: str = "A_in",
    setup: AnalysisSetup | None = None,
) -> SidebandState:
    """Single beam with symmetric side-bands and the given quadrature variances.

    Inverts ``V+- = 2n + 1 +- 2m``: ``n = (V+ + V- - 2)/4`` photons per
    side-band and cross moment ``m = (V+ - V-)/4``. ``angle`` rotates the
    ellipse so that ``v_plus`` is found at ``theta = angle``. The default
    real carrier makes ``v_plus`` the amplitude-quadrature variance.
    """
    check_uncertainty(v_plus, v_minus)
    n = (v_plus + v_minus - 2.0) / 4.0
    m = (v_plus - v_minus) / 4.0 * np.exp(2j * angle)
    N = np.diag([n, n]).astype(complex)
    M = np.array([[0, m], [m, 0]], dtype=complex)
    setup = setup or AnalysisSetup.from_hz(1.0)
    return SidebandState((beam,), N, M, np.zeros(2), np.array([carrier]), setup)


def make_modulated_coherent(
    beta: complex,
    kind: str = "phase",
    *,
    carrier: complex = 1.0,
    beam: str = "A_in",
    setup: AnalysisSetup | None = None,
    v_plus: float = 1.0,
    v_minus: float = 1.0,
) -> SidebandState:
    """Carrier with a pair of classical modulation side-bands.

    Models ``A(t) = A0 * exp(i*beta*cos(W t))`` (phase) or
    ``A0 * (1 + beta*cos(W t))`` (amplitude) to first order in ``beta``:
    both side-bands get ``i*beta*A0/2`` (PM, in quadrature with the
    carrier) or ``beta*A0/2`` (AM, in phase). ``v_plus``/``v_minus`` add
    optional Gaussian noise on top, vacuum by default.
    """
    if kind not in ("phase", "amplitude"):
        raise ValueError(f"modulation kind must be 'phase' or 'amplitude', got {kind!r}")
    base = make_squeezed_state(v_plus, v_minus, carrier=carrier, beam=beam, setup=setup)
    side = 0.5 * beta * carrier * (1j if kind == "phase" else 1.0)
    return SidebandState(base.beams, base.N, base.M, np.array([side, side]), base.carrier, base.setup)


@dataclass(frozen=True)
class Probe:
    """A named linear combination of beam quadratures.

    ``terms`` are ``(beam, theta, weight)``; the probed operator is
    ``sum(weight * X_beam(theta))`` and its variance is divided by
    ``divisor``. Analytic evaluation lives in :func:`probe_variance`,
    sampled evaluation in :mod:`sidebandsep.oracle`.
    """

    name: str
    terms: tuple
    divisor: float = 1.0

    def coefficients(self, beams: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        """Coefficient vectors ``(c, d)`` with ``Q = c.a + d.a^dagger``."""
        index = {b: i for i, b in enumerate(beams)}
        c = np.zeros(2 * len(beams), dtype=complex)
        d = np.zeros(2 * len(beams), dtype=complex)
        for beam, theta, weight in self.terms:
            if beam not in index:
                raise UnknownBeamError(f"probe {self.name!r} refers to unknown beam {beam!r}")
            i = index[beam]
            c[2 * i] += weight * np.exp(-1j * theta)
            d[2 * i + 1] += weight * np.exp(1j * theta)
        return c, d


def operator_variance(state: SidebandState, c: np.ndarray, d: np.ndarray) -> float:
    """``<Q^dagger Q>`` for ``Q = c.a + d.a^dagger`` (normal-ordered moments + commutator)."""
    N, M = state.N, state.M
    value = (
        c.conj() @ N @ c
        + d.conj() @ N.T @ d
        + 2.0 * (d.conj() @ M @ c).real
        + d.conj() @ d
    )
    return float(value.real)


def probe_variance(state: SidebandState, probe: Probe) -> float:
    c, d = probe.coefficients(state.beams)
    return operator_variance(state, c, d) / probe.divisor


def quadrature_variance(state: SidebandState, beam: str, theta: float) -> float:
    """Spectral variance of ``X(theta)`` for one beam, QNL = 1."""
    state.beam_index(beam)
    return probe_variance(state, Probe("X", ((beam, theta, 1.0),)))


def single_sideband_power(state: SidebandState, beam: str, which: str) -> float:
    """Mean photon number ``<a^dag a>`` in the upper or lower side-band of a beam."""
    n_upper, n_lower, _ = state.pair_moments(beam)
    if which == UPPER:
        return n_upper
    if which == LOWER:
        return n_lower
    raise ValueError(f"which must be 'upper' or 'lower', got {which!r}")

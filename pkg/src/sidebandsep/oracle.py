"""Semiclassical Monte-Carlo check of every analytic variance.

Samples complex side-band amplitudes whose symmetrized moments match the
quantum state (each mode carries an extra half quantum of vacuum), pushes
them through the network's scattering matrices and estimates probe
variances from the samples. For Gaussian states, passive networks and
quadrature probes (whose operators commute with their adjoints) this is
exact, so analytic values must agree within a few standard errors.

The sample is split into a fixed number of chunks, each drawing from its
own Philox stream spawned from the seed. Chunk sums are merged in chunk
order, so results are bit-identical for any number of worker threads.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Probe, SidebandState
from .errors import UnphysicalStateError
from .network import OpticalNetwork, scattering_matrix

log = logging.getLogger(__name__)

MIN_SAMPLES = 10_000
N_CHUNKS = 16
BATCH = 1 << 15


@dataclass(frozen=True)
class Estimate:
    mean: complex  # sample mean of the probed operator, ~0
    variance: float
    stderr: float

    def z_score(self, expected: float) -> float:
        return (self.variance - expected) / self.stderr if self.stderr > 0 else 0.0


@dataclass(frozen=True)
class OracleScenario:
    """Input state, optional network, and the probes to estimate on its output."""

    state: SidebandState
    probes: tuple
    network: OpticalNetwork | None = None


@dataclass(frozen=True)
class OracleRun:
    samples: int
    seed: int
    estimates: dict = field(default_factory=dict)


def symmetrized_covariance(state: SidebandState, labels) -> np.ndarray:
    """Real covariance of ``(Re z, Im z)`` over the modes of ``labels``.

    Beams of ``labels`` missing from the state are vacuum.
    """
    k = 2 * len(labels)
    P = 0.5 * np.eye(k, dtype=complex)  # E[z z^H]
    Q = np.zeros((k, k), dtype=complex)  # E[z z^T]
    for beam in state.beams:
        if beam not in labels:
            raise UnphysicalStateError(f"state beam {beam!r} has no place among {tuple(labels)}")
    pos = {b: labels.index(b) for b in state.beams}
    modes = [m for b in state.beams for m in (2 * pos[b], 2 * pos[b] + 1)]
    sel = np.ix_(modes, modes)
    P[sel] += state.N.T
    Q[sel] = state.M
    top = np.hstack([(P + Q).real, (Q - P).imag])
    bottom = np.hstack([(Q - P).imag.T, (P - Q).real])
    return 0.5 * np.vstack([top, bottom])


def _factor(cov: np.ndarray) -> np.ndarray:
    cov = 0.5 * (cov + cov.T)
    w, v = np.linalg.eigh(cov)
    if w[0] < -1e-9 * max(1.0, w[-1]):
        raise UnphysicalStateError(f"symmetrized covariance is not positive (eigenvalue {w[0]:.3e})")
    return v * np.sqrt(np.clip(w, 0.0, None))


def _chunk_sizes(n: int, chunks: int) -> list[int]:
    base, extra = divmod(n, chunks)
    return [base + (1 if i < extra else 0) for i in range(chunks)]


class _Plan:
    def __init__(self, scenario: OracleScenario):
        state, net = scenario.state, scenario.network
        omega = state.setup.omega
        if net is None:
            labels = list(state.beams)
            s_up = s_low = np.eye(len(labels))
            self.out_labels = labels
        else:
            labels = list(net.all_inputs)
            keep = len(net.outputs)
            s_up = scattering_matrix(net, omega)[:keep]
            s_low = scattering_matrix(net, -omega)[:keep]
            self.out_labels = list(net.outputs)
        self.k = 2 * len(labels)
        self.L = _factor(symmetrized_covariance(state, labels))
        self.s_up, self.s_low = s_up, s_low
        self.coeffs = []
        for probe in scenario.probes:
            rows = []
            for beam, theta, weight in probe.terms:
                if beam not in self.out_labels:
                    raise KeyError(f"probe {probe.name!r} refers to unknown beam {beam!r}")
                j = self.out_labels.index(beam)
                rows.append((j, weight * np.exp(-1j * theta), weight * np.exp(1j * theta)))
            self.coeffs.append((rows, probe.divisor))

    def run_chunk(self, size: int, seed_seq: np.random.SeedSequence) -> np.ndarray:
        """Per-probe sums ``[sum Q, sum |Q|^2, sum |Q|^4]`` over one chunk."""
        rng = np.random.Generator(np.random.Philox(seed_seq))
        acc = np.zeros((len(self.coeffs), 3), dtype=complex)
        done = 0
        while done < size:
            b = min(BATCH, size - done)
            r = rng.standard_normal((b, 2 * self.k)) @ self.L.T
            z = r[:, : self.k] + 1j * r[:, self.k :]
            z_up = z[:, 0::2] @ self.s_up.T
            z_low = z[:, 1::2] @ self.s_low.T
            for p, (rows, divisor) in enumerate(self.coeffs):
                q = np.zeros(b, dtype=complex)
                for j, c_up, c_low in rows:
                    q += c_up * z_up[:, j] + c_low * np.conj(z_low[:, j])
                power = (q.real**2 + q.imag**2) / divisor
                acc[p] += (q.sum(), power.sum(), (power**2).sum())
            done += b
        return acc


def run_oracle(scenario: OracleScenario, n_samples: int, seed: int, workers: int = 1) -> OracleRun:
    """Estimate every probe of ``scenario`` from ``n_samples`` draws."""
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"oracle needs at least {MIN_SAMPLES} samples, got {n_samples}")
    plan = _Plan(scenario)
    streams = np.random.SeedSequence(seed).spawn(N_CHUNKS)
    sizes = _chunk_sizes(n_samples, N_CHUNKS)
    log.debug("oracle: %d samples in %d chunks, %d workers", n_samples, N_CHUNKS, workers)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(plan.run_chunk, sizes, streams))
    else:
        parts = [plan.run_chunk(n, s) for n, s in zip(sizes, streams)]
    total = np.zeros_like(parts[0])
    for part in parts:
        total += part
    estimates = {}
    n = n_samples
    for probe, (s1, s2, s4) in zip(scenario.probes, total):
        mean_power = s2.real / n
        # standard error of the mean of |Q|^2/divisor from its sample variance
        var_power = max(s4.real / n - mean_power**2, 0.0) * n / (n - 1)
        estimates[probe.name] = Estimate(complex(s1 / n), mean_power, float(np.sqrt(var_power / n)))
    return OracleRun(n_samples, seed, estimates)

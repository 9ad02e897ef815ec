import math

import numpy as np
import pytest

from sidebandsep.core import AnalysisSetup, from_db, make_squeezed_state, tensor, SidebandState
from sidebandsep.network import OpticalNetwork, beamsplitter, delay, phase_shift, propagate

# 4 dB of squeezing, exact (the 4-decimal rounded pair is slightly unphysical)
V_PLUS_4DB = from_db(-4.0)
V_MINUS_4DB = from_db(4.0)


@pytest.fixture
def setup_b():
    return AnalysisSetup.from_hz(10.25e6)


@pytest.fixture
def squeezed_4db(setup_b):
    return make_squeezed_state(V_PLUS_4DB, V_MINUS_4DB, setup=setup_b)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_single_beam(rng, beam="A_in", setup=None, carrier=None):
    """Squeezed, rotated and thermally broadened single beam."""
    v_plus = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
    v_minus = (1.0 / v_plus) * float(np.exp(rng.uniform(0.0, np.log(5.0))))
    if carrier is None:
        carrier = rng.uniform(0.2, 2.0) * np.exp(1j * rng.uniform(-math.pi, math.pi))
    return make_squeezed_state(
        v_plus, v_minus, angle=rng.uniform(0, math.pi), carrier=carrier, beam=beam,
        setup=setup or AnalysisSetup.from_hz(rng.uniform(1e6, 1e8)),
    )


def random_two_beam(rng, equal_carriers=False):
    """Correlated two-beam state: two random beams mixed on a random splitter, plus classical noise."""
    setup = AnalysisSetup.from_hz(rng.uniform(1e6, 1e8))
    amp = rng.uniform(0.5, 2.0)
    carriers = [amp * np.exp(1j * rng.uniform(-math.pi, math.pi)) for _ in range(2)] if equal_carriers else [None, None]
    a = random_single_beam(rng, "x", setup, carriers[0])
    b = random_single_beam(rng, "y", setup, carriers[1])
    net = OpticalNetwork(
        [
            delay("y", "y_d", rng.uniform(0, 1e-7)),
            phase_shift("y_d", "y_p", rng.uniform(-math.pi, math.pi)),
            beamsplitter("x", "y_p", "p", "q", reflectivity=rng.uniform(0.05, 0.95)),
        ],
        ["x", "y"],
        ["p", "q"],
    )
    mixed = propagate(tensor(a, b), net)
    g = 0.3 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    N = mixed.N + g @ g.conj().T
    carrier = mixed.carrier
    if equal_carriers:
        # the splitter mixes carriers too; restore equal powers with fresh phases
        carrier = amp * np.exp(1j * rng.uniform(-math.pi, math.pi, 2))
    return SidebandState(("a", "b"), N, mixed.M, mixed.alpha, carrier, setup)

import math

import numpy as np
import pytest

from sidebandsep.core import AnalysisSetup, make_modulated_coherent, make_squeezed_state, tensor
from sidebandsep.detection import (
    ONE_OUTPUT,
    TWO_OUTPUT,
    DetectorConfig,
    MeasurementResult,
    bell_measurement,
    direct_detection,
    direct_signal_power,
    entanglement_verdict,
    homodyne,
    homodyne_sweep,
    joint_variances,
    with_efficiency,
)
from sidebandsep.umzi import UmziConfig, correlation_variances, separate

from conftest import V_MINUS_4DB, V_PLUS_4DB, random_two_beam


def photocurrent_tone_power(carrier, upper, lower, omega=2 * math.pi, n=4096):
    """Sample |E(t)|^2 over one period and read the cosine amplitude at omega by FFT."""
    t = np.arange(n) / n
    field = carrier + upper * np.exp(-1j * omega * t) + lower * np.exp(1j * omega * t)
    spectrum = np.fft.rfft(np.abs(field) ** 2) / n
    return float((2 * abs(spectrum[1])) ** 2)


@pytest.fixture
def separated_4db(squeezed_4db):
    return separate(squeezed_4db, UmziConfig.for_frequency(10.25e6))


class TestMeasurementResult:
    def test_db(self):
        assert MeasurementResult("x", 0.5).value_db == pytest.approx(-3.0103, abs=1e-4)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            MeasurementResult("x", -0.1)
        with pytest.raises(ValueError):
            MeasurementResult("x", 1.0, "per-hertz")


class TestHomodyne:
    def test_efficiency_mixes_in_vacuum(self, squeezed_4db):
        det = DetectorConfig(0.9, 0.95)
        r = homodyne(squeezed_4db, "A_in", 0.0, det)
        assert r.value_linear == pytest.approx(det.efficiency * V_PLUS_4DB + 1 - det.efficiency)
        assert r.normalization == ONE_OUTPUT

    def test_with_efficiency_limits(self):
        assert with_efficiency(0.3, 1.0) == 0.3
        assert with_efficiency(0.3, 0.0) == 1.0
        with pytest.raises(ValueError):
            with_efficiency(0.3, 1.5)

    def test_sweep_flat_after_separation(self, separated_4db):
        trace = homodyne_sweep(separated_4db, "A1", np.linspace(0, 2 * math.pi, 32, endpoint=False))
        assert np.ptp(trace) < 1e-12

    def test_detector_validation(self):
        with pytest.raises(ValueError):
            DetectorConfig(quantum_efficiency=1.2)


class TestDirectDetection:
    def test_amplitude_noise_of_squeezed_beam(self, squeezed_4db):
        assert direct_detection(squeezed_4db, "A_in").value_linear == pytest.approx(V_PLUS_4DB)

    def test_follows_carrier_phase(self):
        s = make_squeezed_state(0.5, 2.0, angle=0.3, carrier=np.exp(0.3j))
        assert direct_detection(s, "A_in").value_linear == pytest.approx(0.5)

    def test_no_carrier(self, separated_4db):
        from sidebandsep.core import vacuum_state

        with pytest.raises(ValueError):
            direct_detection(vacuum_state(), "A_in")

    @pytest.mark.parametrize("kind", ["phase", "amplitude"])
    def test_tone_matches_time_domain(self, kind):
        s = make_modulated_coherent(0.02, kind, carrier=1.3 * np.exp(0.4j))
        coh = s.coherent("A_in")
        expected = photocurrent_tone_power(coh.alpha_carrier, coh.alpha_upper, coh.alpha_lower)
        assert direct_signal_power(s, "A_in") == pytest.approx(expected, abs=1e-12)

    def test_phase_modulation_invisible_until_separated(self):
        setup = AnalysisSetup.from_hz(90.5e6)
        s = make_modulated_coherent(0.1, "phase", setup=setup)
        assert direct_signal_power(s, "A_in") == pytest.approx(0.0, abs=1e-20)
        out = separate(s, UmziConfig.for_frequency(90.5e6))
        for port in ("A1", "A2"):
            coh = out.coherent(port)
            expected = photocurrent_tone_power(coh.alpha_carrier, coh.alpha_upper, coh.alpha_lower)
            assert expected > 1e-4
            assert direct_signal_power(out, port) == pytest.approx(expected, rel=1e-9)


class TestJoint:
    def test_matches_closed_form(self, separated_4db):
        jv = joint_variances(separated_4db, "A1", "A2")
        np.testing.assert_allclose(jv.linear(), correlation_variances(V_PLUS_4DB, V_MINUS_4DB), atol=1e-12)
        assert all(r.normalization == TWO_OUTPUT for r in jv)

    def test_headline_db(self, separated_4db):
        jv = joint_variances(separated_4db, "A1", "A2")
        assert jv.add_plus.value_db == pytest.approx(-1.5549, abs=1e-3)
        assert jv.sub_minus.value_db == pytest.approx(-1.5549, abs=1e-3)

    def test_same_beam_rejected(self, separated_4db):
        with pytest.raises(ValueError):
            joint_variances(separated_4db, "A1", "A1")

    def test_independent_vacua_at_qnl(self):
        from sidebandsep.core import vacuum_state

        jv = joint_variances(vacuum_state(("a", "b")), "a", "b")
        np.testing.assert_allclose(jv.linear(), 1.0)


class TestBell:
    def test_equals_joint_on_random_states(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            s = random_two_beam(rng, equal_carriers=True)
            add, sub = bell_measurement(s, "a", "b")
            jv = joint_variances(s, "a", "b")
            assert add.value_linear == pytest.approx(jv.add_plus.value_linear, abs=1e-12)
            assert sub.value_linear == pytest.approx(jv.sub_minus.value_linear, abs=1e-12)

    def test_visibility_degrades_towards_qnl(self, separated_4db):
        values = [bell_measurement(separated_4db, "A1", "A2", v)[0].value_linear for v in (1.0, 0.95, 0.9, 0.5)]
        assert values == sorted(values)
        assert values[-1] < 1.0

    def test_needs_carriers(self):
        from sidebandsep.core import vacuum_state

        with pytest.raises(ValueError):
            bell_measurement(vacuum_state(("a", "b")), "a", "b")

    def test_other_beams_pass_through(self, separated_4db):
        extra = tensor(separated_4db, make_squeezed_state(1.0, 1.0, beam="spare", setup=separated_4db.setup))
        add, _ = bell_measurement(extra, "A1", "A2")
        assert add.value_linear == pytest.approx(correlation_variances(V_PLUS_4DB, V_MINUS_4DB)[0], abs=1e-12)


class TestVerdict:
    def test_entangled(self):
        v = entanglement_verdict(0.7, 0.72)
        assert v.entangled and v.sum_criterion
        assert v.margin_db == pytest.approx(10 * math.log10(0.72))

    def test_one_sided_not_entangled(self):
        v = entanglement_verdict(0.7, 1.1)
        assert not v.entangled
        assert v.sum_criterion

    def test_normalization_checked(self):
        with pytest.raises(ValueError):
            entanglement_verdict(MeasurementResult("a", 0.7, ONE_OUTPUT), 0.7)

    def test_accepts_results(self, separated_4db):
        jv = joint_variances(separated_4db, "A1", "A2")
        assert entanglement_verdict(jv.add_plus, jv.sub_minus).entangled

import numpy as np
import pytest

from sidebandsep.errors import UnreachableFrequencyError
from sidebandsep.timing import (
    SPEED_OF_LIGHT,
    PulseTrainSpec,
    nearest_valid_config,
    timing_table,
    valid_measurement_frequency,
)


@pytest.fixture
def ti_sapphire():
    return PulseTrainSpec(82e6)


class TestValidFrequency:
    def test_first_two_orders(self, ti_sapphire):
        one = valid_measurement_frequency(ti_sapphire, 1)
        two = valid_measurement_frequency(ti_sapphire, 2)
        assert one.delta_l == pytest.approx(3.66, abs=0.01)
        assert one.delta_l == pytest.approx(3.656006, abs=1e-6)
        assert two.f_m == pytest.approx(10.25e6)
        assert two.delta_l == pytest.approx(7.32, abs=0.01)

    def test_both_conditions_hold_for_every_n(self, ti_sapphire):
        for n in range(1, 1_000_001, 997):
            cfg = valid_measurement_frequency(ti_sapphire, n)
            # pulse overlap and quarter period at f_m
            assert cfg.delta_l == pytest.approx(SPEED_OF_LIGHT * n / 82e6, rel=1e-14)
            assert cfg.delta_l == pytest.approx(SPEED_OF_LIGHT / (4 * cfg.f_m), rel=1e-14)

    def test_exhaustive_vectorized(self, ti_sapphire):
        n = np.arange(1, 1_000_001)
        f = np.array([valid_measurement_frequency(ti_sapphire, k).f_m for k in (1, 10, 1000, 1_000_000)])
        np.testing.assert_allclose(f, 82e6 / (4 * np.array([1, 10, 1000, 1_000_000])))
        # monotone decreasing family
        assert np.all(np.diff(82e6 / (4 * n)) < 0)

    @pytest.mark.parametrize("n", [0, -1, 1.5, True])
    def test_bad_n(self, ti_sapphire, n):
        with pytest.raises(ValueError):
            valid_measurement_frequency(ti_sapphire, n)

    def test_table(self, ti_sapphire):
        table = timing_table(ti_sapphire, 4)
        assert [c.n for c in table] == [1, 2, 3, 4]

    def test_bad_rep_rate(self):
        with pytest.raises(ValueError):
            PulseTrainSpec(0.0)


class TestNearest:
    def test_exact_target(self, ti_sapphire):
        cfg = nearest_valid_config(ti_sapphire, 10.25e6)
        assert cfg.n == 2
        assert cfg.error == pytest.approx(0.0)

    def test_above_quarter_rep_rate(self, ti_sapphire):
        with pytest.raises(UnreachableFrequencyError):
            nearest_valid_config(ti_sapphire, 21e6)

    def test_matches_brute_force(self, ti_sapphire):
        rng = np.random.default_rng(17)
        f_max = 82e6 / 4
        n = np.arange(1, 200_001)
        f_n = f_max / n
        for target in f_max / rng.uniform(1.0, 50_000.0, 1000):
            err = np.abs(f_n - target)
            best = int(n[np.argmin(err)])  # argmin returns the first, i.e. shortest delay, on ties
            cfg = nearest_valid_config(ti_sapphire, target)
            assert abs(cfg.f_m - target) <= err[best - 1] * (1 + 1e-12)
            assert cfg.error == pytest.approx(cfg.f_m - target)

    def test_tie_prefers_shorter_delay(self):
        spec = PulseTrainSpec(4.0)  # f(n) = 1/n
        # midpoint of f(1) = 1 and f(2) = 0.5
        assert nearest_valid_config(spec, 0.75).n == 1

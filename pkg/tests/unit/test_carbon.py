import numpy as np
import pytest

from src.carbon.accounting import (
    EmissionsLedger,
    accrue,
    accrue_requests,
    cdp,
    integrate_emissions,
)
from src.carbon.forecast import NoisyForecaster, PerfectForecaster, forecast
from src.carbon.intensity import EnergySource, CiTrace, mix_ci
from src.carbon.policy import ci_to_mode, hysteresis_gate, normalized_position
from src.carbon.traces import (
    TRACE_PROFILES,
    extend_trace,
    generate_trace,
    load_trace,
    trace_profile,
)
from src.utils.errors import ConfigurationError, TraceCoverageError
from tests.conftest import make_forecast


class TestIntensity:
    def test_mix_is_energy_weighted(self):
        sources = [EnergySource("coal", 50.0, 820.0), EnergySource("wind", 50.0, 11.0)]
        assert mix_ci(sources) == pytest.approx(415.5)

    def test_empty_mix(self):
        with pytest.raises(ConfigurationError):
            mix_ci([EnergySource("coal", 0.0, 820.0)])

    def test_negative_energy(self):
        with pytest.raises(ConfigurationError):
            EnergySource("coal", -1.0, 820.0)

    def test_trace_is_piecewise_constant(self):
        trace = CiTrace(np.array([0.0, 100.0, 200.0]), np.array([300.0, 400.0, 350.0]))
        assert trace.ci_at(0.0) == 300.0
        assert trace.ci_at(99.9) == 300.0
        assert trace.ci_at(100.0) == 400.0
        assert trace.ci_at(500.0) == 350.0
        with pytest.raises(TraceCoverageError):
            trace.ci_at(-1.0)

    def test_window_restamps_first_sample(self):
        trace = CiTrace(np.array([0.0, 100.0, 200.0]), np.array([300.0, 400.0, 350.0]))
        window = trace.window(50.0, 200.0)
        assert window.timestamps.tolist() == [50.0, 100.0, 200.0]
        assert window.values.tolist() == [300.0, 400.0, 350.0]
        with pytest.raises(TraceCoverageError):
            trace.window(50.0, 250.0)

    @pytest.mark.parametrize(
        "timestamps,values",
        [([0.0, 0.0], [1.0, 2.0]), ([0.0, 10.0], [1.0, -2.0]), ([], []), ([0.0, 1.0], [1.0])],
    )
    def test_invalid_traces(self, timestamps, values):
        with pytest.raises(ConfigurationError):
            CiTrace(np.array(timestamps), np.array(values))


class TestForecast:
    def test_perfect_forecast_reads_the_next_day(self):
        trace = generate_trace(trace_profile("week1"), 2, 4)
        issued = forecast(trace, 3600.0)
        day = trace.window(3600.0, 3600.0 + 86400.0)
        assert issued.ci_min_day == pytest.approx(day.values.min())
        assert issued.ci_max_day == pytest.approx(day.values.max())
        assert issued.source == "perfect"

    def test_forecast_past_the_trace(self):
        trace = generate_trace(trace_profile("week1"), 1, 4)
        with pytest.raises(TraceCoverageError):
            PerfectForecaster().forecast(trace, 86400.0 + 1.0)

    def test_noisy_forecast_is_reproducible(self):
        trace = generate_trace(trace_profile("week3"), 2, 8)
        first = NoisyForecaster(noise=0.1, seed=3).forecast(trace, 900.0)
        second = NoisyForecaster(noise=0.1, seed=3).forecast(trace, 900.0)
        np.testing.assert_array_equal(first.horizon.values, second.horizon.values)
        exact = NoisyForecaster(noise=0.0).forecast(trace, 900.0)
        np.testing.assert_array_equal(exact.horizon.values, trace.window(900.0, 87300.0).values)

    def test_noise_must_be_non_negative(self):
        with pytest.raises(ConfigurationError):
            NoisyForecaster(noise=-0.1)


class TestCapPolicy:
    @pytest.mark.parametrize("ci,mode_id", [(200.0, 1), (260.0, 2), (450.0, 7), (500.0, 8)])
    def test_cleaner_grid_gets_higher_cap(self, modes, ci, mode_id):
        assert ci_to_mode(ci, make_forecast([200.0, 500.0]), modes).mode_id == mode_id

    def test_out_of_range_ci_is_clamped(self, modes):
        day = make_forecast([200.0, 500.0])
        assert normalized_position(100.0, day) == 0.0
        assert ci_to_mode(900.0, day, modes).mode_id == 8

    def test_flat_forecast_keeps_highest_cap(self, modes):
        assert ci_to_mode(420.0, make_forecast([420.0, 420.0]), modes).mode_id == 1

    def test_hysteresis_gate(self):
        day = make_forecast([200.0, 500.0])
        assert hysteresis_gate(None, 300.0, day)
        assert not hysteresis_gate(300.0, 329.7, day)
        assert hysteresis_gate(300.0, 330.0, day)
        assert hysteresis_gate(300.0, 270.0, day)

    def test_flat_forecast_never_reapplies(self):
        assert not hysteresis_gate(420.0, 420.0, make_forecast([420.0, 420.0]))


class TestAccounting:
    def test_accrue(self):
        ledger = accrue(100.0, 3600.0, 240.0, EmissionsLedger())
        assert ledger.energy_kwh == pytest.approx(0.1)
        assert ledger.emissions_g == pytest.approx(24.0)
        assert accrue(100.0, 0.0, 240.0, ledger) == ledger

    def test_accrue_rejects_negative_power(self):
        with pytest.raises(ConfigurationError):
            accrue(-1.0, 10.0, 240.0, EmissionsLedger())

    def test_requests_and_mean_latency(self):
        ledger = accrue_requests([10.0, 30.0], 60.0, 1000.0, EmissionsLedger())
        assert ledger.requests == pytest.approx(120.0)
        assert ledger.mean_latency_ms == pytest.approx(20.0)
        assert EmissionsLedger().mean_latency_ms == 0.0

    def test_merge(self):
        first = accrue(100.0, 3600.0, 240.0, EmissionsLedger())
        merged = first.merge(first)
        assert merged.emissions_g == pytest.approx(48.0)

    def test_cdp(self):
        assert cdp(24.0, 500.0) == pytest.approx(12.0)

    def test_cdp_of_a_ledger_uses_its_mean_latency(self):
        ledger = accrue(100.0, 3600.0, 240.0, EmissionsLedger())
        ledger = accrue_requests([400.0, 600.0], 60.0, 1000.0, ledger)
        assert cdp(ledger) == pytest.approx(24.0 * 0.5)
        assert cdp(ledger, 1000.0) == pytest.approx(2 * cdp(ledger))
        assert cdp(EmissionsLedger()) == 0.0

    def test_cdp_of_bare_emissions_needs_a_latency(self):
        with pytest.raises(ConfigurationError):
            cdp(24.0)

    def test_integral_matches_piecewise_sum(self):
        trace = CiTrace(np.array([0.0, 1800.0, 7200.0]), np.array([100.0, 300.0, 300.0]))
        integral = integrate_emissions([(0.0, 3600.0, 100.0)], trace)
        expected = accrue(100.0, 1800.0, 300.0, accrue(100.0, 1800.0, 100.0, EmissionsLedger()))
        assert integral == pytest.approx(expected.emissions_g, rel=1e-3)

    def test_integral_skips_empty_intervals(self):
        trace = CiTrace(np.array([0.0, 100.0]), np.array([100.0, 100.0]))
        assert integrate_emissions([(50.0, 50.0, 10.0)], trace) == 0.0


class TestTraces:
    def test_generated_trace_covers_one_extra_day(self):
        trace = generate_trace(trace_profile("week2"), 2, 1)
        assert trace.start_time == 0.0
        assert trace.end_time == pytest.approx(3 * 86400.0)
        assert len(trace.timestamps) == 3 * 96 + 1

    def test_values_stay_in_band(self):
        profile = TRACE_PROFILES["week2"]
        trace = generate_trace(profile, 5, 2)
        assert trace.values.min() >= profile.low
        assert trace.values.max() <= profile.high

    def test_high_variability_profile_reaches_both_bounds(self):
        profile = TRACE_PROFILES["week1"]
        trace = generate_trace(profile, 5, 3)
        assert trace.values.min() <= profile.low * 1.02
        assert trace.values.max() >= profile.high * 0.98

    def test_same_seed_same_trace(self):
        first = generate_trace(trace_profile("week3"), 3, 42)
        second = generate_trace(trace_profile("week3"), 3, 42)
        np.testing.assert_array_equal(first.values, second.values)

    def test_unknown_profile(self):
        with pytest.raises(ConfigurationError):
            trace_profile("week9")

    def test_load_trace(self, tmp_path):
        path = tmp_path / "grid.csv"
        path.write_text("timestamp_seconds,ci_gco2_per_kwh\n0,300\n900,320.5\n")
        trace = load_trace(path)
        assert trace.name == "grid"
        assert trace.values.tolist() == [300.0, 320.5]

    @pytest.mark.parametrize(
        "content",
        [
            "timestamp_seconds,ci_gco2_per_kwh\n900,300\n0,320\n",
            "timestamp_seconds,ci_gco2_per_kwh\n0,-5\n",
            "time,ci\n0,300\n",
        ],
    )
    def test_invalid_trace_files(self, tmp_path, content):
        path = tmp_path / "bad.csv"
        path.write_text(content)
        with pytest.raises(ConfigurationError):
            load_trace(path)

    def test_missing_trace_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_trace(tmp_path / "absent.csv")

    def test_extend_holds_last_value(self):
        trace = CiTrace(np.array([0.0, 100.0]), np.array([300.0, 350.0]))
        extended = extend_trace(trace, 400.0)
        assert extended.end_time == 400.0
        assert extended.ci_at(399.0) == 350.0
        assert extend_trace(trace, 50.0) is trace

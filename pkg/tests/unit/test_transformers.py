import numpy as np
import pandas as pd
import pytest

from src.runtime.state import BreachRecord, IntervalRecord
from src.transformers.report_transformer import (
    DAILY_COLUMNS,
    ReportTransformer,
    normalize_comparison,
)
from src.utils.errors import ConfigurationError


def interval(start, end, power=100.0, ci=240.0, levels=None, latencies=None, **flags):
    return IntervalRecord(
        start=start,
        end=end,
        power=power,
        ci=ci,
        cap_mode_id=1,
        mode_id=3,
        latencies=latencies if latencies is not None else {"a": 10.0, "b": 30.0},
        levels=levels if levels is not None else {"a": 1, "b": 2},
        **flags,
    )


def daily(emissions, power=(5.0, 5.0)):
    return pd.DataFrame(
        {
            "day": np.arange(len(emissions)),
            "mean_power_w": list(power),
            "mean_latency_ms": [100.0] * len(emissions),
            "emissions_g": list(emissions),
            "cdp_g_s": [e * 0.1 for e in emissions],
        }
    )


@pytest.fixture
def transformer():
    return ReportTransformer(frame_interval_ms=1000.0, max_level=3)


class TestTransformRecord:
    def test_flat_row(self, transformer):
        row = transformer.transform_record(interval(0.0, 3600.0, latency_violation=True))
        assert row["energy_kwh"] == pytest.approx(0.1)
        assert row["emissions_g"] == pytest.approx(24.0)
        assert row["requests"] == pytest.approx(7200.0)
        assert row["latency_ms_total"] == pytest.approx(3600.0 * 40.0)
        assert row["level_1_requests"] == pytest.approx(3600.0)
        assert row["level_3_requests"] == 0.0
        assert row["latency_violation_s"] == 3600.0
        assert row["power_breach_s"] == 0.0

    def test_zero_length_intervals_are_dropped(self, transformer):
        frame = transformer.intervals_to_frame([interval(5.0, 5.0), interval(5.0, 10.0)])
        assert len(frame) == 1


class TestDailyRows:
    def test_days_group_and_breaches_count(self, transformer):
        frame = transformer.intervals_to_frame(
            [interval(0.0, 3600.0), interval(86400.0, 90000.0, power=50.0, power_breach=True)]
        )
        breaches = [BreachRecord(86500.0, "power", ("a",), "x"), BreachRecord(86600.0, "latency", ("b",), "y")]
        rows = transformer.daily_rows(frame, breaches, 3)

        assert list(rows.columns) == DAILY_COLUMNS + transformer.level_columns()
        assert rows["day"].tolist() == [0, 1, 2]
        assert rows["breaches"].tolist() == [0, 2, 0]
        assert rows.loc[0, "mean_power_w"] == pytest.approx(100.0)
        assert rows.loc[1, "mean_power_w"] == pytest.approx(50.0)
        assert rows.loc[0, "mean_latency_ms"] == pytest.approx(20.0)
        assert rows.loc[0, "cdp_g_s"] == pytest.approx(24.0 * 20.0 / 1000.0)
        assert rows.loc[1, "power_breach_s"] == 3600.0
        assert rows.loc[0, "level_2_share"] == pytest.approx(0.5)
        assert rows.loc[2, "requests"] == 0.0
        assert rows.loc[2, "mean_latency_ms"] == 0.0

    def test_empty_run(self, transformer):
        rows = transformer.daily_rows(pd.DataFrame(), [], 2)
        assert len(rows) == 2
        assert rows["emissions_g"].sum() == 0.0

    def test_level_distribution_and_residency(self, transformer):
        frame = transformer.intervals_to_frame([interval(0.0, 100.0), interval(100.0, 300.0, levels={"a": 3, "b": 3})])
        shares = transformer.level_distribution(frame)
        assert shares["1"] == pytest.approx(100.0 / 600.0)
        assert shares["3"] == pytest.approx(400.0 / 600.0)
        assert transformer.mode_residency(frame) == {
            "cap_mode": {"1": 300.0},
            "operating_mode": {"3": 300.0},
        }
        assert transformer.level_distribution(pd.DataFrame())["1"] == 0.0


class TestNormalizeComparison:
    def test_divides_by_first_policy(self):
        result = normalize_comparison({"greedy": daily([10.0, 0.0]), "carbon": daily([5.0, 3.0])})
        assert result["policy"].tolist() == ["greedy", "carbon", "greedy", "carbon"]
        day0 = result[result["day"] == 0].set_index("policy")
        assert day0.loc["greedy", "emissions_normalized"] == pytest.approx(1.0)
        assert day0.loc["carbon", "emissions_normalized"] == pytest.approx(0.5)
        day1 = result[result["day"] == 1]
        assert day1["emissions_normalized"].isna().all()

    def test_needs_two_policies(self):
        with pytest.raises(ConfigurationError):
            normalize_comparison({"greedy": daily([1.0, 1.0])})

    def test_day_counts_must_match(self):
        with pytest.raises(ConfigurationError):
            normalize_comparison({"greedy": daily([1.0, 1.0]), "carbon": daily([1.0], power=(5.0,))})

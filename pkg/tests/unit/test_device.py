import random

import pytest

from src.device.hardware import default_device, load_device
from src.device.mapping import (
    Mapping,
    Placement,
    count_mappings,
    count_placements,
    enumerate_mappings,
    enumerate_placements,
    random_mapping,
)
from src.device.modes import DEFAULT_MODE_TABLE, load_mode_file, load_mode_lut
from src.device.oracle import oracle_evaluate
from src.utils.errors import ConfigurationError, EnumerationLimitError
from tests.conftest import CONFIG_DIR, make_model


class TestModes:
    def test_default_lut_round_trips(self, modes):
        assert [mode.to_record() for mode in modes] == DEFAULT_MODE_TABLE
        assert [mode.mode_id for mode in modes] == list(range(1, 9))

    def test_config_file_matches_builtin_table(self, modes):
        assert load_mode_file(CONFIG_DIR / "operating_modes.yaml") == modes

    def test_shuffled_power_caps_are_rejected(self):
        rows = [dict(row) for row in DEFAULT_MODE_TABLE]
        caps = [row["p_max_w"] for row in rows]
        random.Random(3).shuffle(caps)
        if caps == sorted(caps, reverse=True):
            caps.reverse()
        for row, cap in zip(rows, caps):
            row["p_max_w"] = cap
        with pytest.raises(ConfigurationError, match="strictly decrease"):
            load_mode_lut({"modes": rows})

    def test_single_mode_is_rejected(self):
        with pytest.raises(ConfigurationError):
            load_mode_lut({"modes": DEFAULT_MODE_TABLE[:1]})

    def test_duplicate_ids_are_rejected(self):
        rows = [dict(DEFAULT_MODE_TABLE[0]), dict(DEFAULT_MODE_TABLE[0])]
        with pytest.raises(ConfigurationError, match="duplicate"):
            load_mode_lut({"modes": rows})


class TestDevice:
    def test_config_file_matches_default(self):
        loaded = load_device(CONFIG_DIR / "device.yaml")
        default = default_device()
        assert loaded.component_ids == default.component_ids
        for ours, theirs in zip(loaded.components, default.components):
            assert ours.dynamic_share == pytest.approx(theirs.dynamic_share)
            assert ours.peak_throughput == theirs.peak_throughput

    def test_throughput_scales_with_clock_and_cores(self, device, mode_1, modes):
        assert device.throughput("gpu", mode_1) == pytest.approx(60.0)
        assert device.throughput("cpu0", mode_1) == pytest.approx(12.0)
        mode_3 = modes[2]
        assert device.throughput("cpu0", mode_3) == pytest.approx(12.0 * 4 / 8)
        assert device.throughput("gpu", mode_3) == pytest.approx(60.0)

    def test_all_busy_power_stays_under_every_cap(self, device, modes):
        for mode in modes:
            assert device.full_load_power(mode) <= mode.power_cap + 1e-9

    def test_unknown_component(self, device):
        with pytest.raises(ConfigurationError):
            device.component("npu")


class TestMappings:
    def test_placement_boundaries_are_checked(self, small_model):
        with pytest.raises(ConfigurationError):
            Placement("s", small_model, (3,), ("gpu", "cpu0"))
        with pytest.raises(ConfigurationError):
            Placement("s", small_model, (1,), ("gpu",))

    def test_partitions(self, small_model):
        placement = Placement("s", small_model, (1,), ("gpu", "cpu0"))
        assert placement.partitions() == [(0, 1, "gpu"), (1, 3, "cpu0")]

    def test_with_model_falls_back_when_too_shallow(self, small_model):
        placement = Placement("s", small_model, (2,), ("gpu", "cpu0"))
        shallow = make_model("shallow", [50.0, 50.0])
        moved = placement.with_model(shallow)
        assert moved.boundaries == ()
        assert moved.components == ("gpu",)

    @pytest.mark.parametrize("layers,partitions", [(1, 2), (3, 1), (3, 2), (5, 3)])
    def test_count_matches_enumeration(self, layers, partitions):
        model = make_model("m", [10.0] * layers)
        components = ["cpu0", "cpu1", "gpu"]
        placements = list(enumerate_placements("s", model, components, partitions))
        assert len(placements) == count_placements(layers, 3, partitions)
        assert len({p.key() for p in placements}) == len(placements)

    def test_enumeration_refuses_above_cap(self, small_model):
        workload = {"a": small_model, "b": small_model}
        components = ["cpu0", "cpu1", "gpu"]
        size = count_mappings(workload, components, 2)
        assert size == 21 * 21
        with pytest.raises(EnumerationLimitError):
            next(enumerate_mappings(workload, components, 2, cap=size - 1))
        assert sum(1 for _ in enumerate_mappings(workload, components, 2, cap=size)) == size

    def test_mapping_replace_and_without(self, small_model):
        first = Placement("a", small_model, (), ("gpu",))
        mapping = Mapping((first,))
        moved = mapping.replace(Placement("a", small_model, (), ("cpu0",)))
        assert moved.placement_of("a").components == ("cpu0",)
        added = mapping.replace(Placement("b", small_model, (), ("gpu",)))
        assert added.service_ids == ("a", "b")
        assert added.without("a").service_ids == ("b",)

    def test_mapping_rejects_duplicate_services(self, small_model):
        placement = Placement("a", small_model, (), ("gpu",))
        with pytest.raises(ConfigurationError):
            Mapping((placement, placement))

    def test_random_mapping_is_valid(self, small_model, rng):
        mapping = random_mapping({"a": small_model, "b": small_model}, ["cpu0", "gpu"], 2, rng)
        assert mapping.service_ids == ("a", "b")
        for placement in mapping.placements:
            assert set(placement.components) <= {"cpu0", "gpu"}
            assert placement.partition_count <= 2


class TestOracle:
    def test_idle_device_draws_static_power(self, device, mode_1):
        result = oracle_evaluate(Mapping(), mode_1, device)
        assert result.total_power == pytest.approx(0.2 * 30.0)
        assert result.mean_latency == 0.0

    def test_single_partition_latency(self, device, mode_1, small_model):
        mapping = Mapping((Placement("s", small_model, (), ("gpu",)),))
        result = oracle_evaluate(mapping, mode_1, device)
        # 600 MFLOPs at 60 GFLOP/s
        assert result.latencies["s"] == pytest.approx(10.0)
        assert result.utilization["gpu"] == pytest.approx(0.01)
        assert result.total_power == pytest.approx(6.0 + 30.0 * 0.8 * 7 / 15 * 0.01)

    def test_crossing_adds_transfer_time(self, device, mode_1, small_model):
        split = Mapping((Placement("s", small_model, (1,), ("gpu", "gpu")),))
        crossing = Mapping((Placement("s", small_model, (1,), ("gpu", "cpu0")),))
        same = oracle_evaluate(split, mode_1, device).latencies["s"]
        moved = oracle_evaluate(crossing, mode_1, device).latencies["s"]
        # 300 MFLOPs on the GPU, 300 on one CPU cluster, 2 MB over 30 GB/s
        assert same == pytest.approx(10.0)
        assert moved == pytest.approx(5.0 + 25.0 + 2.0 / 30.0)

    def test_overload_slows_every_partition(self, device, mode_8):
        big = make_model("big", [20000.0])
        mapping = Mapping(
            (Placement("a", big, (), ("gpu",)), Placement("b", big, (), ("gpu",)))
        )
        result = oracle_evaluate(mapping, mode_8, device)
        throughput = device.throughput("gpu", mode_8)
        busy = 2 * 20000.0 / throughput
        load = busy / device.frame_interval
        assert load > 1
        assert result.latencies["a"] == pytest.approx(20000.0 / throughput * load)
        assert result.within_cap(mode_8.power_cap)

    @pytest.mark.parametrize("mode_ids", [(1, 4, 7), (2, 5, 8), (3, 6)])
    @pytest.mark.parametrize("component", ["cpu0", "gpu"])
    def test_latency_grows_as_clocks_fall(self, device, modes, small_model, mode_ids, component):
        # modes in each group share a core count and step every clock down
        by_id = {mode.mode_id: mode for mode in modes}
        mapping = Mapping((Placement("s", small_model, (), (component,)),))
        latencies = [oracle_evaluate(mapping, by_id[m], device).latencies["s"] for m in mode_ids]
        assert latencies == sorted(latencies)
        assert latencies[0] < latencies[-1]

    def test_crossing_uses_the_mode_bandwidth(self, device, modes, small_model):
        mode_7 = next(mode for mode in modes if mode.mode_id == 7)
        crossing = Mapping((Placement("s", small_model, (1,), ("gpu", "cpu0")),))
        result = oracle_evaluate(crossing, mode_7, device)
        compute = 300.0 / device.throughput("gpu", mode_7) + 300.0 / device.throughput("cpu0", mode_7)
        assert device.bandwidth(mode_7) == pytest.approx(30.0 * 1.2 / 2.1)
        assert result.latencies["s"] == pytest.approx(compute + 2.0 / device.bandwidth(mode_7))

    def test_overloaded_component_draws_full_dynamic_power(self, device, mode_8):
        big = make_model("big", [20000.0])
        mapping = Mapping((Placement("a", big, (), ("gpu",)), Placement("b", big, (), ("gpu",))))
        result = oracle_evaluate(mapping, mode_8, device)
        assert result.utilization["gpu"] == 1.0
        assert result.total_power == pytest.approx(
            device.static_power(mode_8) + device.dynamic_power("gpu", mode_8)
        )

import pytest

from src.extractors.trace_extractor import TraceExtractor
from src.extractors.yaml_extractor import YamlExtractor
from src.utils.config import get_settings, load_yaml
from src.utils.errors import ConfigurationError
from src.validators.config_validator import CatalogValidator, DeviceValidator, ScenarioValidator
from src.validators.mode_validator import ModeValidator
from src.validators.trace_validator import TraceValidator
from tests.conftest import CONFIG_DIR, scenario_config


class TestModeValidator:
    def test_valid_row(self):
        row = {"mode": 1, "cores": 8, "f_cpu_ghz": 2.2, "f_gpu_ghz": 1.3, "f_mem_ghz": 2.1, "p_max_w": 30}
        assert ModeValidator().validate_record(row) == (True, [])

    def test_invalid_row_reports_every_problem(self):
        row = {"mode": 1.5, "cores": 0, "f_cpu_ghz": "fast", "f_gpu_ghz": 1.3, "f_mem_ghz": 2.1}
        is_valid, errors = ModeValidator().validate_record(row)
        assert not is_valid
        assert len(errors) == 4
        assert all(error.startswith("mode 1.5:") for error in errors)


class TestTraceValidator:
    def test_batch_summary(self):
        records = [
            {"row_number": 2, "timestamp_seconds": 0, "ci_gco2_per_kwh": 300},
            {"row_number": 3, "timestamp_seconds": 900, "ci_gco2_per_kwh": -1},
            {"row_number": 4, "timestamp_seconds": "", "ci_gco2_per_kwh": 300},
        ]
        summary = TraceValidator().validate_batch(records)
        assert summary["valid_count"] == 1
        assert summary["invalid_count"] == 2
        assert summary["dataset_errors"] == []

    def test_check_raises_on_unordered_timestamps(self):
        records = [
            {"row_number": 2, "timestamp_seconds": 900, "ci_gco2_per_kwh": 300},
            {"row_number": 3, "timestamp_seconds": 900, "ci_gco2_per_kwh": 310},
        ]
        with pytest.raises(ConfigurationError, match="strictly increasing"):
            TraceValidator().check(records)


class TestConfigValidators:
    def test_shipped_configs_are_valid(self):
        CatalogValidator().check_config(load_yaml(CONFIG_DIR / "services.yaml"))
        DeviceValidator().check_config(load_yaml(CONFIG_DIR / "device.yaml"))
        for path in sorted((CONFIG_DIR / "scenarios").glob("*.yaml")):
            ScenarioValidator().check_config(load_yaml(path))

    def test_catalog_cost_factor_must_shrink(self):
        config = load_yaml(CONFIG_DIR / "services.yaml")
        config["profile"]["cost_factor"] = 1.2
        with pytest.raises(ConfigurationError, match="cost_factor"):
            CatalogValidator().check_config(config)

    def test_catalog_variant_count_must_match_layers(self):
        row = {
            "service": "Broken",
            "family": "f",
            "variants": ["a", "b"],
            "layer_counts": [3],
            "base_cost_mflops": 10.0,
            "base_accuracy": 70.0,
        }
        is_valid, errors = CatalogValidator().validate_record(row)
        assert not is_valid
        assert "2 variants but 1 layer counts" in errors[0]

    def test_device_rejects_duplicate_components(self):
        config = load_yaml(CONFIG_DIR / "device.yaml")
        config["components"].append(dict(config["components"][0]))
        with pytest.raises(ConfigurationError, match="duplicate component ids"):
            DeviceValidator().check_config(config)

    def test_device_static_fraction_below_one(self):
        config = load_yaml(CONFIG_DIR / "device.yaml")
        config["static_fraction"] = 1.0
        with pytest.raises(ConfigurationError, match="static_fraction"):
            DeviceValidator().check_config(config)

    def test_scenario_record(self):
        assert ScenarioValidator().validate_record(scenario_config()) == (True, [])
        is_valid, errors = ScenarioValidator().validate_record(scenario_config(seed="abc"))
        assert not is_valid
        assert any("seed" in error for error in errors)

    def test_scenario_must_be_a_mapping(self):
        with pytest.raises(ConfigurationError):
            ScenarioValidator().check_config(["not", "a", "mapping"])


class TestExtractors:
    def test_yaml_extractor_metadata(self):
        extractor = YamlExtractor(CONFIG_DIR / "operating_modes.yaml", source_name="modes")
        config = extractor.run()
        assert len(config["modes"]) == 8
        assert extractor.get_metadata() == {
            "source_name": "modes",
            "path": str(CONFIG_DIR / "operating_modes.yaml"),
            "record_count": 1,
        }

    def test_trace_extractor_numbers_rows_like_the_file(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("timestamp_seconds,ci_gco2_per_kwh,source\n0,300,grid\n900,310,grid\n")
        records = TraceExtractor(path).run()
        assert [r["row_number"] for r in records] == [2, 3]
        assert records[1]["ci_gco2_per_kwh"] == 310


class TestConfig:
    def test_load_yaml_errors(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_yaml(tmp_path / "absent.yaml")

        broken = tmp_path / "broken.yaml"
        broken.write_text("modes: [1, 2\n")
        with pytest.raises(ConfigurationError, match="Invalid YAML"):
            load_yaml(broken)

        listing = tmp_path / "list.yaml"
        listing.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigurationError):
            load_yaml(listing)

        empty = tmp_path / "empty.yaml"
        empty.write_text("")
        assert load_yaml(empty) == {}

    def test_settings_from_environment(self, monkeypatch, tmp_path):
        monkeypatch.setenv("GREENEDGE_OUTPUT_DIR", str(tmp_path))
        monkeypatch.setenv("GREENEDGE_ENUMERATION_CAP", "500")
        settings = get_settings()
        assert settings.output_dir == tmp_path
        assert settings.enumeration_cap == 500

    def test_enumeration_cap_must_be_an_integer(self, monkeypatch):
        monkeypatch.setenv("GREENEDGE_ENUMERATION_CAP", "lots")
        with pytest.raises(ConfigurationError):
            get_settings()

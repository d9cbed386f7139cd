"""
Tests for INI configuration parsing, overrides and canonical serialization
"""

import pytest

from config.settings import (
    RunSettings, SettingsManager, config_hash, parse_ini, parse_override, settings_to_ini
)
from models.base import ConfigurationError


class TestParsing:

    def test_defaults(self):
        settings = parse_ini("")
        assert settings.lattice.m_axis == 64
        assert settings.ell == pytest.approx(2.5)
        assert list(settings.observables) == ["window"]
        assert settings.evolution.scheme == "cayley"

    def test_sections_and_lists(self):
        settings = parse_ini(
            "[potential]\nn_particles = 500\nn_sweep = 100, 1000, 1e4\n"
            "[observable.left]\nkind = window\ncenter = 2.5\n"
            "[observable.low_k]\nkind = momentum_window\ncutoff = 3.0\n"
        )
        assert settings.potential.n_sweep == [100.0, 1000.0, 1e4]
        assert set(settings.observables) == {"left", "low_k"}
        assert settings.observables["left"].center == [2.5]

    def test_unknown_section(self):
        with pytest.raises(ConfigurationError):
            parse_ini("[lattices]\nd = 1\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError):
            parse_ini("[lattice]\nsides = 4\n")

    def test_unknown_run_key(self):
        with pytest.raises(ConfigurationError):
            parse_ini("[run]\nseed = 1\nthreads = 4\n")

    def test_bad_value_type(self):
        with pytest.raises(ConfigurationError):
            parse_ini("[lattice]\nm_axis = many\n")

    def test_bad_observable_name(self):
        with pytest.raises(ConfigurationError):
            parse_ini("[observable.a b]\nkind = window\n")

    def test_unparseable_text(self):
        with pytest.raises(ConfigurationError):
            parse_ini("m_axis = 4\n")


class TestOverrides:

    def test_split_on_last_dot(self):
        assert parse_override("observable.left.half_width=2.0") == ("observable.left", "half_width", "2.0")

    @pytest.mark.parametrize("override", ["lattice.m_axis", "m_axis=4"])
    def test_malformed_override(self, override):
        with pytest.raises(ConfigurationError):
            parse_override(override)

    def test_override_wins(self):
        settings = parse_ini("[lattice]\nm_axis = 16\n", overrides=["lattice.m_axis=32", "run.seed=9"])
        assert settings.lattice.m_axis == 32
        assert settings.seed == 9


class TestCanonicalForm:

    def test_round_trip(self, small_settings):
        text = settings_to_ini(small_settings)
        again = parse_ini(text)
        assert settings_to_ini(again) == text
        assert config_hash(again) == config_hash(small_settings)

    def test_hash_changes_with_values(self, small_settings):
        other = parse_ini(settings_to_ini(small_settings), overrides=["run.seed=8"])
        assert config_hash(other) != config_hash(small_settings)

    def test_none_values_are_omitted(self):
        text = settings_to_ini(RunSettings())
        assert "ell =" not in text
        assert text.startswith("[run]\nseed = 0\n")


class TestSettingsManager:

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            SettingsManager(tmp_path / "absent.ini").load_settings()

    def test_range_errors_are_rejected(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[lattice]\nm_axis = 15\n", encoding="utf-8")
        with pytest.raises(ConfigurationError) as excinfo:
            SettingsManager(path).load_settings()
        assert excinfo.value.exit_code == 2

    def test_update_and_save(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[lattice]\nm_axis = 16\n", encoding="utf-8")
        manager = SettingsManager(path)
        assert manager.update_setting("lattice", "length", 8.0).lattice.length == 8.0
        saved = manager.save_settings(tmp_path / "canonical" / "run.ini")
        assert parse_ini(saved.read_text(encoding="utf-8")).lattice.length == 8.0
        assert manager.config_hash() == config_hash(manager.get_settings())

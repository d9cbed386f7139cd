"""
Tests for configuration validators and numerical soft checks
"""

import pytest

from config.settings import parse_ini
from utils.validation import (
    MAX_LATTICE_SITES, CondensateValidator, EvolutionValidator, LatticeValidator, ObservableValidator,
    OracleValidator, RunSettingsValidator, ScatteringValidator, defect_check, resolution_check
)
from utils.validators import (
    validate_even_axis, validate_particle_sweep, validate_seed, validate_step_divides
)


class TestHelpers:

    @pytest.mark.parametrize("total, step, expected", [
        (1.0, 1e-3, True), (0.5, 0.1, True), (0.35, 0.1, False), (1.0, 0.0, False),
    ])
    def test_step_divides(self, total, step, expected):
        assert validate_step_divides(total, step) is expected

    def test_even_axis(self):
        assert validate_even_axis(64)
        assert not validate_even_axis(63)
        assert not validate_even_axis("many")

    def test_seed_range(self):
        assert validate_seed(0)
        assert not validate_seed(-1)
        assert not validate_seed(2 ** 64)

    def test_particle_sweep(self):
        assert validate_particle_sweep([1e2, 1e3, 1e4])
        assert not validate_particle_sweep([1e3, 1e2])


class TestSectionValidators:

    def test_defaults_are_valid(self):
        result = RunSettingsValidator().validate(parse_ini(""))
        assert result.is_valid, result.errors

    def test_lattice_site_limit(self):
        lattice = parse_ini("[lattice]\nd = 3\nm_axis = 32\n").lattice
        result = LatticeValidator().validate(lattice)
        assert not result.is_valid
        assert str(MAX_LATTICE_SITES) in result.errors[0]

    def test_ell_must_contain_scaled_support(self):
        settings = parse_ini("[potential]\nn_particles = 4\n[scattering]\nell = 0.4\n")
        result = ScatteringValidator().validate(settings.scattering, settings.potential, settings.lattice)
        assert any("scaled support" in error for error in result.errors)

    def test_wrap_around_warning(self):
        settings = parse_ini("[lattice]\nlength = 4.0\n[scattering]\nell = 3.0\n")
        result = ScatteringValidator().validate(settings.scattering, settings.potential, settings.lattice)
        assert result.is_valid
        assert result.warnings

    def test_time_grid_and_plane_wave(self):
        settings = parse_ini("[condensate]\nt_final = 0.35\ndt = 0.1\ninitial = plane_wave\nmomentum = 1.5\n")
        result = CondensateValidator().validate(settings.condensate, settings.lattice)
        codes = {message.code for message in result.messages}
        assert {"NOT_MULTIPLE", "NOT_INTEGER"} <= codes

    def test_evolution_choices(self):
        settings = parse_ini("[evolution]\nscheme = euler\ncache_size = 2\n")
        result = EvolutionValidator().validate(settings.evolution)
        assert len(result.errors) == 2

    def test_rk2_without_correction_is_noted(self):
        settings = parse_ini("[evolution]\nscheme = rk2\n")
        result = EvolutionValidator().validate(settings.evolution)
        assert result.is_valid
        assert any(message.code == "DRIFT" for message in result.messages)

    def test_custom_observable_needs_snapshot(self, tmp_path):
        settings = parse_ini(f"[observable.mine]\nkind = custom\nsnapshot = {tmp_path / 'none.bin'}\n")
        result = ObservableValidator().validate("mine", settings.observables["mine"], settings.lattice)
        assert not result.is_valid
        assert "mine" in result.errors[0]

    def test_oracle_dimension_limit(self):
        settings = parse_ini("[oracle]\nmodes = 6\nn_max = 20\n")
        result = OracleValidator().validate(settings.oracle)
        assert any("Fock dimension" in error for error in result.errors)

    def test_oracle_test_sector(self):
        settings = parse_ini("[oracle]\nn_max = 4\ntest_sector = 3\n")
        assert not OracleValidator().validate(settings.oracle).is_valid


class TestSoftChecks:

    def test_resolution(self):
        assert resolution_check(0.01, 0.3).warnings
        assert not resolution_check(1.0, 0.1).warnings

    def test_defect(self):
        result = defect_check("sympl_defect", 2e-6, 1e-6)
        assert result.is_valid
        assert result.warnings
        assert result.data["sympl_defect"] == 2e-6

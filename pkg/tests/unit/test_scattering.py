"""
Tests for the Neumann scattering problem and the limiting correlation profile
"""

import numpy as np
import pytest

from models.base import PreconditionError
from models.scattering import (
    CUBE_INVERSE_RADIUS, SQUARE_INVERSE_RADIUS, Potential, eigenvalue_identity_residual, limiting_n_lambda, omega_infinity,
    omega_infinity_cell_average, omega_infinity_profile, omega_profile, radial_cell_average,
    scattering_length, solve_neumann_scattering
)


class TestPotential:

    def test_polynomial_integral(self):
        pot = Potential(profile="polynomial", amplitude=1.0, support_radius=1.0)
        assert pot.b0 == pytest.approx(32.0 * np.pi / 105.0, rel=1e-10)

    def test_square_integral(self):
        pot = Potential(profile="square", amplitude=2.0, support_radius=1.0)
        assert pot.b0 == pytest.approx(8.0 * np.pi / 3.0, rel=1e-8)

    def test_scaling_of_amplitude_and_support(self, bump):
        assert bump.scaled_support == pytest.approx(1e-2)
        assert bump.scaled(0.5 * bump.scaled_support)[0] == pytest.approx(
            1e6 * bump.unscaled(0.5)[0]
        )

    @pytest.mark.parametrize("kwargs", [
        {"profile": "gaussian"},
        {"amplitude": -1.0},
        {"beta": 1.0},
        {"n_particles": 0.0},
    ])
    def test_rejects_invalid_parameters(self, kwargs):
        with pytest.raises(PreconditionError):
            Potential(**kwargs)


class TestScatteringLength:

    def test_square_well_closed_form(self):
        pot = Potential(profile="square", amplitude=2.0, support_radius=1.0)
        kappa = 1.0
        assert scattering_length(pot, max_step=1e-3) == pytest.approx(1.0 - np.tanh(kappa) / kappa, rel=1e-8)

    def test_zero_potential(self):
        assert scattering_length(Potential(profile="zero")) == 0.0


class TestNeumannProblem:

    def test_zero_potential_gives_trivial_solution(self):
        sol = solve_neumann_scattering(Potential(profile="zero", n_particles=1e3), ell=1.0)
        assert sol.eigenvalue == 0.0
        assert sol.scattering_length == 0.0
        assert np.allclose(sol.f_at(np.linspace(0.0, 1.0, 5)), 1.0)

    def test_ell_inside_support_is_rejected(self, bump):
        with pytest.raises(PreconditionError):
            solve_neumann_scattering(bump, ell=bump.scaled_support / 2.0)

    def test_eigenvalue_matches_limit(self, bump):
        ell = 1.0
        sol = solve_neumann_scattering(bump, ell=ell)
        limit = limiting_n_lambda(bump.b0, ell)
        assert sol.n_lambda == pytest.approx(limit, rel=0.03)
        assert eigenvalue_identity_residual(sol) <= 1e-8

    def test_profile_is_monotone_and_flat_at_boundary(self, bump):
        sol = solve_neumann_scattering(bump, ell=1.0)
        r = np.linspace(0.05, 1.0, 50)
        f = sol.f_at(r)
        assert np.all(np.diff(f) >= -1e-12)
        assert f[-1] == pytest.approx(1.0)
        assert np.allclose(omega_profile(sol)(np.array([1.0, 2.0])), 0.0, atol=1e-8)


class TestLimitingProfile:

    def test_neumann_variant_vanishes_at_boundary(self):
        assert omega_infinity(2.0, 1.0, 2.0, variant="neumann") == pytest.approx(0.0, abs=1e-14)
        assert omega_infinity(2.0, 1.0, 2.0) == pytest.approx(-1.0 / (8.0 * np.pi * 12.0))

    def test_zero_outside_ball(self):
        assert omega_infinity(1.0, 1.0, np.array([1.0, 1.0, 0.0])) == 0.0

    def test_singular_at_origin(self):
        with pytest.raises(PreconditionError):
            omega_infinity(1.0, 1.0, 0.0)

    def test_unknown_variant(self):
        with pytest.raises(PreconditionError):
            omega_infinity_profile(1.0, 1.0, np.array([0.5]), variant="sideways")

    def test_cube_average_of_inverse_distance(self):
        spacing = 0.3
        average = radial_cell_average(lambda r: 1.0 / r, spacing)
        assert average == pytest.approx(CUBE_INVERSE_RADIUS / spacing, rel=1e-6)

    def test_cell_average_matches_quadrature(self):
        ell, b0, spacing = 2.0, 0.7, 0.25
        numeric = radial_cell_average(
            lambda r: float(omega_infinity_profile(ell, b0, np.array([r]))[0]), spacing
        )
        assert omega_infinity_cell_average(ell, b0, spacing) == pytest.approx(numeric, rel=1e-6)

    def test_square_average_of_inverse_distance(self):
        spacing = 0.3
        average = radial_cell_average(lambda r: 1.0 / r, spacing, d=2)
        assert average == pytest.approx(SQUARE_INVERSE_RADIUS / spacing, rel=1e-6)

    def test_square_cell_average_matches_quadrature(self):
        ell, b0, spacing = 2.0, 0.7, 0.25
        numeric = radial_cell_average(
            lambda r: float(omega_infinity_profile(ell, b0, np.array([r]))[0]), spacing, d=2
        )
        assert omega_infinity_cell_average(ell, b0, spacing, d=2) == pytest.approx(numeric, rel=1e-6)

    def test_segment_takes_half_spacing_value(self):
        ell, b0, spacing = 2.0, 0.7, 0.25
        edge = float(omega_infinity_profile(ell, b0, np.array([spacing / 2.0]), "neumann")[0])
        assert omega_infinity_cell_average(ell, b0, spacing, "neumann", d=1) == pytest.approx(edge)
        assert radial_cell_average(lambda r: 1.0 / r, spacing, d=1) == pytest.approx(2.0 / spacing)

    def test_cell_averages_differ_by_dimension(self):
        ell, b0, spacing = 2.0, 0.7, 0.25
        values = [omega_infinity_cell_average(ell, b0, spacing, d=d) for d in (1, 2, 3)]
        assert len(set(values)) == 3

    def test_unsupported_dimension(self):
        with pytest.raises(PreconditionError):
            omega_infinity_cell_average(2.0, 0.7, 0.25, d=4)
        with pytest.raises(PreconditionError):
            radial_cell_average(lambda r: 1.0, 0.25, d=4)

"""
Acceptance runs: the matched Fock space oracle and the convergence rates in N
"""

import numpy as np
import pytest

from controllers.oracle import OracleController
from models.condensate import distance_to_limit, evolve_modified_hartree, evolve_nls, gaussian_initial_state
from models.fock import verify_matched_instance
from models.grid import Lattice
from models.kernels import FiniteNProfile, LimitingProfile, build_eta
from models.scattering import Potential, solve_neumann_scattering
from utils.resource_manager import ResourceManager

PARTICLE_NUMBERS = [1e2, 1e3, 1e4]


def fitted_slope(n_values, errors):
    return float(np.polyfit(np.log(n_values), np.log(errors), 1)[0])


class TestMatchedOracle:

    def test_default_instance(self):
        verdict = verify_matched_instance(np.random.default_rng(0))
        assert verdict.passed
        assert verdict.defect <= 1e-6
        assert verdict.leakage <= 1e-8
        assert verdict.details["vacuum_number_gap"] <= 1e-6

    def test_controller_checks(self, small_settings, tmp_path):
        controller = OracleController(small_settings, ResourceManager(tmp_path / "out"),
                                      rng=np.random.default_rng(3))
        result = controller.run()
        checks = {check["test"]: check for check in result["checks"]}
        assert checks["characteristic_function"]["defect"] <= 1e-5
        assert checks["vacuum_number"]["pass"]
        assert checks["one_particle_sector"]["defect"] <= 1e-8
        assert controller.passed
        assert (tmp_path / "out" / "oracle.json").exists()


@pytest.mark.slow
class TestRatesInN:

    ell = 2.0

    @pytest.fixture(scope="class", params=[1.0 / 3.0, 0.5], ids=["beta=1/3", "beta=1/2"])
    def sweep(self, request):
        beta = request.param
        solutions = [
            solve_neumann_scattering(
                Potential(profile="polynomial", amplitude=1.0, support_radius=1.0, beta=beta, n_particles=n),
                self.ell,
            )
            for n in PARTICLE_NUMBERS
        ]
        return beta, solutions

    @staticmethod
    def window(beta):
        return min(beta, 1.0 - beta)

    def test_pair_kernel_rate(self, sweep):
        beta, solutions = sweep
        lattice = Lattice(d=1, m_axis=64, length=10.0)
        phi = gaussian_initial_state(lattice, width=1.0)
        b0 = solutions[0].potential.b0
        limit = build_eta(phi, LimitingProfile(self.ell, b0, variant="neumann"))
        errors = [np.linalg.norm(build_eta(phi, FiniteNProfile(sol)).matrix - limit.matrix) for sol in solutions]
        slope = fitted_slope(PARTICLE_NUMBERS, errors)
        assert abs(slope + self.window(beta)) <= 0.25

    def test_condensate_rate(self, sweep):
        beta, solutions = sweep
        lattice = Lattice(d=1, m_axis=64, length=10.0)
        phi0 = gaussian_initial_state(lattice, width=1.0)
        T, dt = 0.5, 0.005
        b0 = solutions[0].potential.b0
        limit = evolve_nls(phi0, sigma=b0, T=T, dt=dt)
        errors = [
            distance_to_limit(limit, evolve_modified_hartree(phi0, sol.potential, sol, T, dt), T)
            for sol in solutions
        ]
        slope = fitted_slope(PARTICLE_NUMBERS, errors)
        assert abs(slope + self.window(beta)) <= 0.25

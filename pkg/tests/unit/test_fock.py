"""
Tests for the truncated Fock space oracle
"""

import numpy as np
import pytest
import scipy.linalg

from models.base import ConfigurationError, InconclusiveVerdictError, PreconditionError, StructuralError
from models.bogoliubov import BogoliubovPair, GeneratorTerm, QuadraticGenerator
from models.fock import (
    ExactPropagator, FockBasis, FockSpace, characteristic_function_exact, evolve_exact, evolved_vacuum,
    leakage, one_particle_defect, random_instance, random_mode_vector, sector_changes, sector_weights,
    vacuum_number, verify_bogoliubov_conjugation, verify_matched_instance
)


def exact_pair(generator, t):
    theta = scipy.linalg.expm(t * generator.bdg_matrix())
    return BogoliubovPair.from_theta(theta, t=t, s=0.0)


class TestBasis:

    def test_dimension_and_ordering(self):
        basis = FockBasis(modes=2, n_max=3)
        assert basis.dimension == 10
        assert basis.states[0] == (0, 0)
        assert list(basis.totals) == sorted(basis.totals)
        assert np.array_equal(basis.vacuum[:1], [1.0])

    def test_dimension_limit(self):
        with pytest.raises(ConfigurationError):
            FockBasis(modes=10, n_max=10)

    def test_rejects_empty_basis(self):
        with pytest.raises(ConfigurationError):
            FockBasis(modes=0, n_max=4)


class TestOperators:

    def test_canonical_commutation_below_cutoff(self):
        space = FockSpace(modes=3, n_max=5)
        columns = space.basis.below(4)
        for i, ai in enumerate(space.ladders):
            for j, aj in enumerate(space.ladders):
                commutator = (ai @ aj.conj().T - aj.conj().T @ ai).toarray()[:, columns]
                expected = np.eye(space.dimension)[:, columns] * (i == j)
                assert np.allclose(commutator, expected)

    def test_quadratic_operator_changes_sectors_by_two(self, rng):
        space = FockSpace(modes=2, n_max=6)
        h, p = random_instance(rng, 2)
        generator = space.second_quantize(h, p)
        assert sector_changes(generator) == [-2, 0, 2]
        assert generator.hermiticity_defect() <= 1e-12
        assert sector_changes(space.field(random_mode_vector(rng, 2))) == [-1, 1]

    def test_term_operator_matches_quadratic(self, rng):
        space = FockSpace(modes=2, n_max=4)
        c = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        eye = np.eye(2)
        one_body = space.term_operator(GeneratorTerm("+-", left=eye, middle=c, right=eye))
        pairing = space.term_operator(GeneratorTerm("++", left=eye, middle=c, right=eye))
        zero = np.zeros((2, 2))
        assert np.allclose(one_body.dense(), space.quadratic(c, zero, zero).dense())
        assert np.allclose(pairing.dense(), space.quadratic(zero, c, zero).dense())

    def test_mode_vector_size_is_checked(self):
        space = FockSpace(modes=2, n_max=3)
        with pytest.raises(StructuralError):
            space.creation(np.ones(3))

    def test_lattice_generator_is_rejected(self, lattice_1d):
        space = FockSpace(modes=2, n_max=3)
        zero = np.zeros((lattice_1d.size, lattice_1d.size))
        generator = QuadraticGenerator(t=0.0, one_body=zero, pairing=zero, lattice=lattice_1d, kinetic=True)
        with pytest.raises(PreconditionError):
            space.from_generator(generator)


class TestExactEvolution:

    def test_time_dependent_path_matches_constant(self, rng):
        space = FockSpace(modes=2, n_max=6)
        h, p = random_instance(rng, 2)
        operator = space.second_quantize(h, p)
        psi = evolve_exact(operator, space.basis.vacuum, 0.3)
        stepped = evolve_exact(lambda t: operator, space.basis.vacuum, 0.3, dt=0.05)
        assert np.allclose(psi, stepped, atol=1e-12)

    def test_pairing_keeps_even_sectors(self, rng):
        space = FockSpace(modes=2, n_max=12)
        h, p = random_instance(rng, 2)
        psi = evolved_vacuum(space, QuadraticGenerator.constant(h, p), 0.5)
        weights = sector_weights(space.basis, psi)
        assert np.allclose(weights[1::2], 0.0, atol=1e-24)
        assert np.sum(weights) == pytest.approx(1.0)


class TestVerifications:

    def test_vacuum_characteristic_function(self, rng):
        space = FockSpace(modes=2, n_max=12)
        h = random_mode_vector(rng, 2)
        h /= np.linalg.norm(h)
        for s in np.linspace(-2.0, 2.0, 9):
            value = characteristic_function_exact(space, space.basis.vacuum, h, s)
            assert abs(value - np.exp(-0.5 * s ** 2)) <= 1e-8

    def test_free_generator_conjugation_is_exact(self, rng):
        h, _ = random_instance(rng, 2)
        generator = QuadraticGenerator.constant(h, np.zeros((2, 2)))
        space = FockSpace(modes=2, n_max=6)
        propagator = ExactPropagator(space.from_generator(generator)).matrix(0.7)
        pair = exact_pair(generator, 0.7)
        defect, leak = verify_bogoliubov_conjugation(
            space, pair, propagator, random_mode_vector(rng, 2), random_mode_vector(rng, 2),
        )
        assert defect <= 1e-10
        assert leak <= 1e-20

    def test_pairing_generator_conjugation(self, rng):
        h, p = random_instance(rng, 2)
        generator = QuadraticGenerator.constant(h, p)
        space = FockSpace(modes=2, n_max=14)
        propagator = ExactPropagator(space.from_generator(generator)).matrix(0.5)
        pair = exact_pair(generator, 0.5)
        defect, leak = verify_bogoliubov_conjugation(
            space, pair, propagator, random_mode_vector(rng, 2), random_mode_vector(rng, 2),
        )
        assert defect <= 1e-8
        assert leak <= 1e-8
        assert abs(vacuum_number(space, propagator[:, 0]) - pair.vacuum_number()) <= 1e-8
        f = random_mode_vector(rng, 2)
        assert one_particle_defect(space, propagator, f / np.linalg.norm(f)) <= 1e-8

    def test_strong_pairing_is_inconclusive(self, rng):
        with pytest.raises(InconclusiveVerdictError):
            verify_matched_instance(rng, modes=2, n_max=4, t=0.5, dt=1e-3, trials=1, pairing_scale=3.0)

    def test_leaky_state_is_inconclusive(self):
        space = FockSpace(modes=1, n_max=4)
        top = np.zeros(space.dimension, dtype=complex)
        top[-1] = 1.0
        assert leakage(space.basis, top) == 1.0
        with pytest.raises(InconclusiveVerdictError):
            characteristic_function_exact(space, top, np.ones(1), 1.0)

"""
Tests for quadratic generators and Bogoliubov pair propagation
"""

import numpy as np
import pytest
import scipy.linalg

from models.base import PreconditionError, PropagationFailureError, StructuralError
from models.bogoliubov import (
    SERIES_COLUMNS, BogoliubovPair, GeneratorTerm, QuadraticGenerator, TrajectoryGenerators,
    assemble_generator, bdg_step, canonical_form, compose_pairs, free_pair, generator_inputs,
    generator_terms, normal_order, propagate, resymplectify, time_derivative_coefficients,
    time_derivative_terms
)
from models.condensate import evolve_nls, gaussian_initial_state
from models.fock import FockSpace
from models.grid import Lattice
from models.kernels import KernelBuilder, LimitingProfile


def random_coefficients(rng, size, scale=0.5):
    a = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    b = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    return scale * (a + a.conj().T) / 2.0, scale * (b + b.T) / 2.0


def constant_source(generator):
    return lambda t: generator


def pair_creation_unitary(space, eta):
    """exp(½Σ η a a − ½Σ conj(η) a* a*) as a dense matrix on the truncated space"""
    zero = np.zeros_like(eta)
    return scipy.linalg.expm(space.quadratic(zero, -0.5 * eta.conj(), 0.5 * eta).dense())


def restrict_modes(term, modes):
    """The same term with its mode functions cut down to the given lattice sites"""
    if term.kind == "scalar":
        return term
    return GeneratorTerm(term.kind, left=term.left[modes, :], middle=term.middle,
                         right=term.right[modes, :], hc=term.hc, label=term.label, value=term.value)


def generator_on(lattice, t_final=0.01, dt=0.005, b0=0.5, index=1):
    phi0 = gaussian_initial_state(lattice, width=1.2)
    trajectory = evolve_nls(phi0, sigma=1.0, T=t_final, dt=dt)
    builder = KernelBuilder(trajectory, LimitingProfile(ell=2.5, b0=b0), b0=b0)
    family = builder.family_at(index)
    return family, assemble_generator(family, family.phi, 2.5, b0)


class TestQuadraticGenerator:

    def test_rejects_non_hermitian_one_body(self):
        with pytest.raises(PreconditionError):
            QuadraticGenerator.constant(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((2, 2)))

    def test_rejects_non_symmetric_pairing(self):
        with pytest.raises(PreconditionError):
            QuadraticGenerator.constant(np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_bdg_matrix_layout(self):
        generator = QuadraticGenerator.constant(np.array([[2.0]]), np.array([[0.5j]]))
        expected = 1j * np.array([[2.0, -1.0j], [-1.0j, -2.0]])
        assert np.allclose(generator.bdg_matrix(), expected)

    def test_abstract_generator_has_no_lattice(self):
        generator = QuadraticGenerator.constant(np.eye(2), np.zeros((2, 2)))
        with pytest.raises(StructuralError):
            generator.h1


class TestNormalOrder:

    def test_hermitian_conjugate_terms(self, rng):
        coeff = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        eye = np.eye(3)
        terms = [
            GeneratorTerm("+-", left=eye, middle=coeff, right=eye, hc=True, label="one-body"),
            GeneratorTerm("++", left=eye, middle=coeff, right=eye, hc=True, label="pairing"),
            GeneratorTerm("scalar", hc=True, label="constant", value=1.0 + 2.0j),
        ]
        h, q, r, c = normal_order(terms, 3)
        assert np.allclose(h, coeff + coeff.conj().T)
        assert np.allclose(r, q.conj().T)
        assert c == pytest.approx(2.0)
        h1, pairing, defect = canonical_form(h, q, r)
        assert defect == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(pairing, pairing.T)

    def test_canonical_form_reports_defect(self):
        h = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        _, _, defect = canonical_form(h, np.zeros((2, 2)), np.zeros((2, 2)))
        assert defect == pytest.approx(np.sqrt(2.0))


class TestTimeDerivativeTerms:

    eta = np.array([[0.20 + 0.05j, 0.10 - 0.08j], [0.10 - 0.08j, -0.12 + 0.10j]])
    eta_dot = np.array([[0.5, -0.3 + 0.4j], [-0.3 + 0.4j, 0.2 - 0.6j]])

    def test_first_order_at_vanishing_pair_kernel(self):
        h, pairing = time_derivative_coefficients(np.zeros((2, 2), dtype=complex), self.eta_dot)
        assert np.allclose(h, 0.0, atol=1e-14)
        assert np.allclose(pairing, -0.5j * self.eta_dot.conj(), atol=1e-14)

    def test_matches_exact_derivative_on_fock_space(self):
        space = FockSpace(2, 30)
        epsilon = 1e-5
        derivative = (pair_creation_unitary(space, self.eta + epsilon * self.eta_dot)
                      - pair_creation_unitary(space, self.eta - epsilon * self.eta_dot)) / (2.0 * epsilon)
        exact = 1j * derivative @ pair_creation_unitary(space, self.eta).conj().T

        h, q, r, _ = normal_order(time_derivative_terms(self.eta, self.eta_dot), 2)
        model = space.quadratic(h, q, r).dense()

        low = np.ix_(space.basis.below(4), space.basis.below(4))
        # the c-number of i(∂T)T* sits on the vacuum
        exact_low = exact[low] - exact[0, 0] * np.eye(len(space.basis.below(4)))
        assert np.linalg.norm(exact_low) > 0.1
        assert np.allclose(model[low], exact_low, atol=1e-6)

    def test_terms_are_hermitian(self):
        h, q, r, _ = normal_order(time_derivative_terms(self.eta, self.eta_dot), 2)
        _, _, defect = canonical_form(h, q, r)
        assert defect == pytest.approx(0.0, abs=1e-12)


class TestAssembledGenerator:

    def test_vanishing_interaction_gives_zero_generator(self, short_trajectory):
        builder = KernelBuilder(short_trajectory, LimitingProfile(ell=2.5, b0=0.0), b0=0.0)
        family = builder.family_at(2)
        generator = assemble_generator(family, family.phi, 2.5, 0.0)
        assert np.allclose(generator.one_body, 0.0, atol=1e-12)
        assert np.allclose(generator.pairing, 0.0, atol=1e-12)
        assert generator.kinetic

    def test_terms_match_fock_space_on_two_sites(self, limiting_builder):
        family = limiting_builder.family_at(2)
        terms = generator_terms(generator_inputs(family, 2.5, 0.5))
        generator = assemble_generator(family, family.phi, 2.5, 0.5)
        sites = [14, 17]
        space = FockSpace(2, 4)

        total = space.identity() * 0.0
        for term in terms:
            reduced = restrict_modes(term, sites)
            h, q, r, c = normal_order([reduced], 2)
            direct = space.term_operator(reduced)
            assert np.allclose(direct.dense(), space.quadratic(h, q, r, c).dense(), atol=1e-10), term.label
            total = total + direct

        hermitian = 0.5 * (total.dense() + total.dense().conj().T)
        block = np.ix_(sites, sites)
        expected = space.second_quantize(generator.one_body[block], generator.pairing[block], generator.scalar)
        assert np.allclose(hermitian, expected.dense(), atol=1e-10)

    def test_stable_under_refinement(self):
        forms = []
        for m_axis in (8, 16):
            lattice = Lattice(d=2, m_axis=m_axis, length=6.0)
            _, generator = generator_on(lattice)
            f = gaussian_initial_state(lattice, width=1.5, center=2.5).coefficients()
            forms.append((np.vdot(f, generator.one_body @ f), f @ generator.pairing @ f))
        (h_coarse, p_coarse), (h_fine, p_fine) = forms
        assert abs(h_fine - h_coarse) <= 0.05 * abs(h_fine)
        assert abs(p_fine - p_coarse) <= 0.1 * abs(p_fine)

    def test_parts_cover_every_label(self, limiting_builder):
        family = limiting_builder.family_at(2)
        generator = assemble_generator(family, family.phi, 2.5, 0.5)
        assert set(generator.parts) == {"time_derivative", "V1", "V2", "V3", "V4", "lambda", "kinetic"}
        assert generator.parts["time_derivative"] > 0.0


class TestPropagation:

    def test_single_mode_closed_form(self):
        omega, p, T = 0.5, 0.5, 1.0
        generator = QuadraticGenerator.constant(np.array([[omega]]), np.array([[p]]))
        pair, series = propagate(constant_source(generator), 0.0, T, 1e-3)
        kappa = np.sqrt(4.0 * p ** 2 - omega ** 2)
        u = np.cosh(kappa * T) + 1j * omega * np.sinh(kappa * T) / kappa
        v = 2j * p * np.sinh(kappa * T) / kappa
        assert pair.u[0, 0] == pytest.approx(u, abs=1e-5)
        assert pair.v[0, 0] == pytest.approx(v, abs=1e-5)
        assert series.columns == SERIES_COLUMNS
        assert len(series) == 1001

    def test_matches_matrix_exponential(self, rng):
        h, p = random_coefficients(rng, 3)
        generator = QuadraticGenerator.constant(h, p)
        pair, _ = propagate(constant_source(generator), 0.0, 0.5, 1e-3)
        exact = scipy.linalg.expm(0.5 * generator.bdg_matrix())
        assert np.allclose(pair.theta(), exact, atol=1e-5)
        assert pair.symplectic_defect() <= 1e-10
        assert pair.intertwining_defect() <= 1e-10

    def test_free_flow_is_exact(self):
        lattice = Lattice(d=1, m_axis=16, length=5.0)
        zero = np.zeros((lattice.size, lattice.size), dtype=complex)
        generator = QuadraticGenerator(t=0.0, one_body=zero, pairing=zero, lattice=lattice, kinetic=True)
        pair, _ = propagate(constant_source(generator), 0.0, 0.3, 0.01)
        expected = free_pair(lattice, 0.3)
        assert np.allclose(pair.u, expected.u, atol=1e-10)
        assert pair.vacuum_number() == 0.0

    @pytest.mark.slow
    def test_lattice_propagation_stays_symplectic(self):
        lattice = Lattice(d=1, m_axis=128, length=10.0)
        trajectory = evolve_nls(gaussian_initial_state(lattice, width=1.0), sigma=0.5, T=1.0, dt=1e-3)
        builder = KernelBuilder(trajectory, LimitingProfile(ell=2.5, b0=0.5), b0=0.5)
        generators = TrajectoryGenerators(builder, 2.5, 0.5)
        pair, series = propagate(generators, 0.0, 1.0, 1e-3, record_every=100)
        assert np.max(series.column("sympl_defect")) <= 1e-6
        assert np.max(series.column("intertwining_defect")) <= 1e-6
        assert pair.V.hs_norm() > 0.0
        assert len(generators.hermiticity_defects) == 1001

    def test_forward_and_backward_compose_to_identity(self, rng):
        h, p = random_coefficients(rng, 2)
        generator = QuadraticGenerator.constant(h, p)
        forward, _ = propagate(constant_source(generator), 0.0, 0.4, 0.01)
        backward, _ = propagate(constant_source(generator), 0.4, 0.0, 0.01)
        loop = compose_pairs(forward, backward)
        assert np.allclose(loop.theta(), np.eye(4), atol=1e-10)

    def test_composition_over_split_interval(self, rng):
        h, p = random_coefficients(rng, 2)
        source = constant_source(QuadraticGenerator.constant(h, p))
        first, _ = propagate(source, 0.0, 0.2, 0.01)
        second, _ = propagate(source, 0.2, 0.4, 0.01)
        whole, _ = propagate(source, 0.0, 0.4, 0.01)
        assert np.allclose(compose_pairs(first, second).theta(), whole.theta(), atol=1e-10)
        with pytest.raises(StructuralError):
            compose_pairs(second, first)

    def test_step_callback_and_record_stride(self):
        generator = QuadraticGenerator.constant(np.eye(1), np.zeros((1, 1)))
        seen = []
        _, series = propagate(constant_source(generator), 0.0, 0.1, 0.01, record_every=3,
                              on_step=lambda pair: seen.append(pair.t))
        assert len(seen) == 10
        assert series.column("t")[-1] == pytest.approx(0.1)
        assert len(series) == 5

    def test_rejects_bad_steps(self):
        source = constant_source(QuadraticGenerator.constant(np.eye(1), np.zeros((1, 1))))
        with pytest.raises(PreconditionError):
            propagate(source, 0.0, 1.0, 0.0)
        with pytest.raises(PreconditionError):
            propagate(source, 0.0, 0.35, 0.1)
        with pytest.raises(PreconditionError):
            bdg_step(BogoliubovPair.identity(1), source(0.0), 0.1, scheme="euler")

    def test_lost_symplecticity_is_reported(self):
        generator = QuadraticGenerator.constant(np.array([[0.1]]), np.array([[2.0]]))
        with pytest.raises(PropagationFailureError):
            propagate(constant_source(generator), 0.0, 1.0, 0.5, scheme="rk2")


class TestResymplectify:

    def test_restores_symplectic_structure(self, rng):
        h, p = random_coefficients(rng, 3)
        pair, _ = propagate(constant_source(QuadraticGenerator.constant(h, p)), 0.0, 0.2, 0.01)
        noisy = BogoliubovPair(t=pair.t, s=pair.s, u=pair.u + 1e-4 * rng.normal(size=(3, 3)),
                               v=pair.v + 1e-4 * rng.normal(size=(3, 3)))
        assert noisy.symplectic_defect() > 1e-6
        fixed = resymplectify(noisy)
        assert fixed.symplectic_defect() <= 1e-10
        assert np.allclose(fixed.u, noisy.u, atol=1e-3)

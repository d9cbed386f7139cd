"""
Tests for the lattice, grid functions, kernels and spectral operators
"""

import numpy as np
import pytest

from models.base import PreconditionError, StructuralError
from models.grid import (
    GridFunction, Kernel, Lattice, displacement_lengths, fourier_transform, gradient, kernel_adjoint,
    kernel_apply, kernel_compose, kernel_conjugate, kernel_transpose, laplacian, laplacian_matrix,
    midpoint_samples, refine
)


class TestLattice:

    def test_spacing_and_size(self):
        lattice = Lattice(d=2, m_axis=8, length=4.0)
        assert lattice.spacing == pytest.approx(0.5)
        assert lattice.cell_volume == pytest.approx(0.25)
        assert lattice.size == 64
        assert lattice.coordinates().shape == (64, 2)

    @pytest.mark.parametrize("d, m_axis, length", [(4, 8, 1.0), (1, 7, 1.0), (1, 8, 0.0)])
    def test_rejects_invalid_parameters(self, d, m_axis, length):
        with pytest.raises(PreconditionError):
            Lattice(d=d, m_axis=m_axis, length=length)


class TestGridFunction:

    def test_norm_of_constant(self, lattice_1d):
        f = GridFunction(lattice_1d, np.ones(lattice_1d.size))
        assert f.norm() == pytest.approx(np.sqrt(lattice_1d.length))

    def test_normalized_zero_raises(self, lattice_1d):
        with pytest.raises(PreconditionError):
            GridFunction.zeros(lattice_1d).normalized()

    def test_wrong_sample_count(self, lattice_1d):
        with pytest.raises(StructuralError):
            GridFunction(lattice_1d, np.ones(lattice_1d.size + 1))

    def test_inner_product_is_antilinear_in_first_slot(self, lattice_1d, rng):
        f = GridFunction(lattice_1d, rng.normal(size=lattice_1d.size))
        g = GridFunction(lattice_1d, rng.normal(size=lattice_1d.size) + 1j)
        assert (f * 1j).inner(g) == pytest.approx(-1j * f.inner(g))

    def test_mixing_lattices_raises(self, lattice_1d):
        other = Lattice(d=1, m_axis=16, length=10.0)
        with pytest.raises(StructuralError):
            GridFunction.zeros(lattice_1d) + GridFunction.zeros(other)


class TestSpectralOperators:

    def test_fourier_transform_is_unitary(self, lattice_2d, rng):
        f = GridFunction(lattice_2d, rng.normal(size=lattice_2d.size) + 1j * rng.normal(size=lattice_2d.size))
        forward = fourier_transform(f)
        assert np.linalg.norm(forward.values) == pytest.approx(np.linalg.norm(f.values))
        back = fourier_transform(forward, "inverse")
        assert np.allclose(back.values, f.values, atol=1e-12)

    def test_unknown_direction(self, lattice_1d):
        with pytest.raises(PreconditionError):
            fourier_transform(GridFunction.zeros(lattice_1d), "sideways")

    def test_laplacian_of_plane_wave(self, lattice_1d):
        k = 2.0 * np.pi * 3 / lattice_1d.length
        f = GridFunction.from_callable(lattice_1d, lambda x: np.exp(1j * k * x[:, 0]))
        assert np.allclose(laplacian(f).values, -k ** 2 * f.values, atol=1e-9)

    def test_gradient_of_sine(self, lattice_1d):
        k = 2.0 * np.pi / lattice_1d.length
        f = GridFunction.from_callable(lattice_1d, lambda x: np.sin(k * x[:, 0]))
        expected = k * np.cos(k * lattice_1d.coordinates()[:, 0])
        assert np.allclose(gradient(f)[0].values, expected, atol=1e-10)

    def test_laplacian_matrix_matches_spectral_laplacian(self, lattice_2d, rng):
        f = GridFunction(lattice_2d, rng.normal(size=lattice_2d.size))
        matrix = laplacian_matrix(lattice_2d)
        assert np.allclose(matrix, matrix.T)
        assert np.allclose(matrix @ f.values, -laplacian(f).values, atol=1e-9)

    def test_refine_keeps_coarse_samples(self, lattice_1d, gaussian_1d):
        fine = refine(gaussian_1d, 2)
        assert fine.shape == (2 * lattice_1d.m_axis,)
        assert np.allclose(fine[::2], gaussian_1d.values, atol=1e-12)

    def test_midpoint_samples_are_symmetric(self, lattice_1d, gaussian_1d):
        mid = midpoint_samples(refine(gaussian_1d, 2) ** 2, lattice_1d)
        assert np.allclose(mid, mid.T)
        assert np.allclose(np.diag(mid), gaussian_1d.values ** 2, atol=1e-12)

    def test_displacement_lengths_minimal_image(self, lattice_1d):
        lengths = displacement_lengths(lattice_1d)
        assert lengths[0, lattice_1d.m_axis - 1] == pytest.approx(lattice_1d.spacing)
        assert np.max(lengths) <= lattice_1d.length / 2.0 + 1e-12


class TestKernelAlgebra:

    def test_identity_acts_as_identity(self, lattice_1d, gaussian_1d):
        out = kernel_apply(Kernel.identity(lattice_1d), gaussian_1d)
        assert np.allclose(out.values, gaussian_1d.values)

    def test_rank_one_action(self, lattice_1d, gaussian_1d, rng):
        g = GridFunction(lattice_1d, rng.normal(size=lattice_1d.size))
        out = kernel_apply(Kernel.rank_one(gaussian_1d, gaussian_1d), g)
        assert np.allclose(out.values, gaussian_1d.inner(g) * gaussian_1d.values)

    def test_compose_matches_operator_product(self, lattice_1d, rng):
        a = Kernel(lattice_1d, rng.normal(size=(lattice_1d.size, lattice_1d.size)))
        b = Kernel(lattice_1d, rng.normal(size=(lattice_1d.size, lattice_1d.size)))
        assert np.allclose(kernel_compose(a, b).matrix, a.matrix @ b.matrix)

    def test_adjoint_transpose_conjugate(self, lattice_1d, rng):
        values = rng.normal(size=(lattice_1d.size, lattice_1d.size)) * (1 + 2j)
        k = Kernel(lattice_1d, values)
        assert np.allclose(kernel_adjoint(k).values, values.conj().T)
        assert np.allclose(kernel_transpose(k).values, values.T)
        assert np.allclose(kernel_conjugate(k).values, values.conj())

    def test_rank_one_projector_norms(self, lattice_1d, gaussian_1d):
        projector = Kernel.rank_one(gaussian_1d, gaussian_1d)
        assert projector.hs_norm() == pytest.approx(1.0)
        assert projector.op_norm() == pytest.approx(1.0)

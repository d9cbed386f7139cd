"""
Lattice Models
Periodic spatial lattice, sampled functions, two-point kernels and the spectral
operators acting on them
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple, Union

import numpy as np
from loguru import logger

from .base import PreconditionError, StructuralError

Scalar = Union[int, float, complex]


@dataclass(frozen=True)
class Lattice:
    """Periodic cubic lattice with M_axis points per axis in a box of side L"""

    d: int
    m_axis: int
    length: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise PreconditionError(f"Lattice dimension must be 1, 2 or 3, got {self.d}")
        if self.m_axis < 2 or self.m_axis % 2:
            raise PreconditionError(f"Points per axis must be even and >= 2, got {self.m_axis}")
        if not self.length > 0:
            raise PreconditionError(f"Box length must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.m_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.d

    @property
    def size(self) -> int:
        return self.m_axis ** self.d

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.m_axis,) * self.d

    def wavenumbers(self) -> np.ndarray:
        """Per-axis wavenumbers 2πn/L in FFT order"""
        return 2.0 * np.pi * np.fft.fftfreq(self.m_axis, d=self.spacing)

    def k_squared(self) -> np.ndarray:
        k = self.wavenumbers()
        grids = np.meshgrid(*([k] * self.d), indexing='ij')
        return sum(g ** 2 for g in grids)

    def coordinates(self) -> np.ndarray:
        """Lattice points as an (M, d) array, row-major over the axes"""
        axis = np.arange(self.m_axis) * self.spacing
        grids = np.meshgrid(*([axis] * self.d), indexing='ij')
        return np.stack([g.ravel() for g in grids], axis=1)

    def index_grid(self) -> np.ndarray:
        """Integer multi-indices as an (M, d) array"""
        axis = np.arange(self.m_axis)
        grids = np.meshgrid(*([axis] * self.d), indexing='ij')
        return np.stack([g.ravel() for g in grids], axis=1)

    def __repr__(self) -> str:
        return f"<Lattice(d={self.d}, M_axis={self.m_axis}, L={self.length})>"


class GridFunction:
    """Complex function sampled on a lattice"""

    def __init__(self, lattice: Lattice, values: np.ndarray):
        values = np.asarray(values, dtype=complex).reshape(-1)
        if values.size != lattice.size:
            raise StructuralError(
                f"GridFunction needs {lattice.size} samples, got {values.size}"
            )
        self.lattice = lattice
        self.values = values

    @classmethod
    def zeros(cls, lattice: Lattice) -> 'GridFunction':
        return cls(lattice, np.zeros(lattice.size, dtype=complex))

    @classmethod
    def from_callable(cls, lattice: Lattice, func) -> 'GridFunction':
        """Sample func(points) where points is the (M, d) coordinate array"""
        return cls(lattice, func(lattice.coordinates()))

    @property
    def field(self) -> np.ndarray:
        return self.values.reshape(self.lattice.shape)

    def norm(self) -> float:
        return float(np.sqrt(self.lattice.cell_volume * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: 'GridFunction') -> complex:
        """⟨self, other⟩, antilinear in self"""
        _check_same_lattice(self.lattice, other.lattice)
        return complex(self.lattice.cell_volume * np.vdot(self.values, other.values))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def normalized(self) -> 'GridFunction':
        norm = self.norm()
        if norm == 0.0:
            raise PreconditionError("Cannot normalize the zero function")
        return GridFunction(self.lattice, self.values / norm)

    def conj(self) -> 'GridFunction':
        return GridFunction(self.lattice, np.conj(self.values))

    def coefficients(self) -> np.ndarray:
        """Orthonormal-basis coefficients √ΔV·f(x)"""
        return np.sqrt(self.lattice.cell_volume) * self.values

    def __add__(self, other: 'GridFunction') -> 'GridFunction':
        _check_same_lattice(self.lattice, other.lattice)
        return GridFunction(self.lattice, self.values + other.values)

    def __sub__(self, other: 'GridFunction') -> 'GridFunction':
        _check_same_lattice(self.lattice, other.lattice)
        return GridFunction(self.lattice, self.values - other.values)

    def __mul__(self, scalar: Scalar) -> 'GridFunction':
        return GridFunction(self.lattice, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> 'GridFunction':
        return GridFunction(self.lattice, -self.values)

    def __repr__(self) -> str:
        return f"<GridFunction(lattice={self.lattice}, norm={self.norm():.6g})>"


class Kernel:
    """
    Two-point kernel K(x;y) on a lattice.

    The operator action is (Kf)(x) = ΔV Σ_y K(x;y) f(y); `matrix` is the corresponding
    operator matrix ΔV·K in the orthonormal lattice basis.
    """

    def __init__(self, lattice: Lattice, values: np.ndarray):
        values = np.asarray(values, dtype=complex)
        if values.shape != (lattice.size, lattice.size):
            raise StructuralError(
                f"Kernel needs shape {(lattice.size, lattice.size)}, got {values.shape}"
            )
        self.lattice = lattice
        self.values = values

    @classmethod
    def identity(cls, lattice: Lattice) -> 'Kernel':
        return cls(lattice, np.eye(lattice.size) / lattice.cell_volume)

    @classmethod
    def zeros(cls, lattice: Lattice) -> 'Kernel':
        return cls(lattice, np.zeros((lattice.size, lattice.size), dtype=complex))

    @classmethod
    def from_matrix(cls, lattice: Lattice, matrix: np.ndarray) -> 'Kernel':
        return cls(lattice, np.asarray(matrix) / lattice.cell_volume)

    @classmethod
    def multiplication(cls, f: GridFunction) -> 'Kernel':
        """Kernel of the multiplication operator by f"""
        return cls(f.lattice, np.diag(f.values) / f.lattice.cell_volume)

    @classmethod
    def rank_one(cls, f: GridFunction, g: GridFunction) -> 'Kernel':
        """Kernel of |f⟩⟨g|"""
        _check_same_lattice(f.lattice, g.lattice)
        return cls(f.lattice, np.outer(f.values, np.conj(g.values)))

    @property
    def matrix(self) -> np.ndarray:
        return self.lattice.cell_volume * self.values

    def hs_norm(self) -> float:
        return float(self.lattice.cell_volume * np.linalg.norm(self.values))

    def op_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def __add__(self, other: 'Kernel') -> 'Kernel':
        _check_same_lattice(self.lattice, other.lattice)
        return Kernel(self.lattice, self.values + other.values)

    def __sub__(self, other: 'Kernel') -> 'Kernel':
        _check_same_lattice(self.lattice, other.lattice)
        return Kernel(self.lattice, self.values - other.values)

    def __mul__(self, scalar: Scalar) -> 'Kernel':
        return Kernel(self.lattice, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> 'Kernel':
        return Kernel(self.lattice, -self.values)

    def __matmul__(self, other: 'Kernel') -> 'Kernel':
        return kernel_compose(self, other)

    def __repr__(self) -> str:
        return f"<Kernel(lattice={self.lattice}, hs_norm={self.hs_norm():.6g})>"


def _check_same_lattice(first: Lattice, second: Lattice) -> None:
    if first != second:
        raise StructuralError(f"Lattice mismatch: {first} vs {second}")


# ============================================================================
# Spectral operations
# ============================================================================

def fourier_transform(f: GridFunction, direction: str = "forward") -> GridFunction:
    """Unitary discrete Fourier transform; coefficients are returned in FFT order"""
    if direction == "forward":
        out = np.fft.fftn(f.field, norm="ortho")
    elif direction == "inverse":
        out = np.fft.ifftn(f.field, norm="ortho")
    else:
        raise PreconditionError(f"Unknown transform direction: {direction}")
    return GridFunction(f.lattice, out)


def apply_multiplier(f: GridFunction, multiplier: np.ndarray) -> GridFunction:
    """Multiply the Fourier coefficients of f by a multiplier shaped like the lattice"""
    out = np.fft.ifftn(multiplier * np.fft.fftn(f.field))
    return GridFunction(f.lattice, out)


def laplacian(f: GridFunction) -> GridFunction:
    return apply_multiplier(f, -f.lattice.k_squared())


def gradient(f: GridFunction) -> List[GridFunction]:
    """Spectral gradient components; the Nyquist mode is dropped"""
    return [apply_multiplier(f, m) for m in _derivative_multipliers(f.lattice)]


def _derivative_multipliers(lattice: Lattice) -> List[np.ndarray]:
    k = lattice.wavenumbers().astype(complex)
    k[lattice.m_axis // 2] = 0.0
    multipliers = []
    for axis in range(lattice.d):
        shape = [1] * lattice.d
        shape[axis] = lattice.m_axis
        multipliers.append(np.broadcast_to(1j * k.reshape(shape), lattice.shape))
    return multipliers


def refine(f: GridFunction, factor: int = 2) -> np.ndarray:
    """Trigonometric interpolation of f onto the lattice with factor×M_axis points per axis"""
    data = f.field
    for axis in range(f.lattice.d):
        data = _refine_axis(data, axis, factor)
    return data


def _refine_axis(data: np.ndarray, axis: int, factor: int) -> np.ndarray:
    m = data.shape[axis]
    fine = m * factor
    half = m // 2
    coeffs = np.moveaxis(np.fft.fft(data, axis=axis), axis, 0)
    padded = np.zeros((fine,) + coeffs.shape[1:], dtype=complex)
    padded[:half] = coeffs[:half]
    padded[fine - half + 1:] = coeffs[half + 1:]
    padded[half] += 0.5 * coeffs[half]
    padded[fine - half] += 0.5 * coeffs[half]
    return np.moveaxis(np.fft.ifft(padded, axis=0) * factor, 0, axis)


def free_flow_multiplier(lattice: Lattice, tau: float) -> np.ndarray:
    """Fourier multiplier of e^{iτ(−Δ)}"""
    return np.exp(1j * tau * lattice.k_squared())


def apply_multiplier_rows(matrix: np.ndarray, lattice: Lattice, multiplier: np.ndarray) -> np.ndarray:
    """
    Right-multiply an operator matrix by a real-symmetric Fourier multiplier operator.

    Rows are treated as lattice functions; this equals matrix @ F* diag(m) F whenever the
    multiplier is even in k.
    """
    rows = matrix.reshape((matrix.shape[0],) + lattice.shape)
    axes = tuple(range(1, lattice.d + 1))
    out = np.fft.ifftn(multiplier * np.fft.fftn(rows, axes=axes), axes=axes)
    return out.reshape(matrix.shape)


@lru_cache(maxsize=8)
def laplacian_matrix(lattice: Lattice) -> np.ndarray:
    """Operator matrix of −Δ in the orthonormal lattice basis (real symmetric)"""
    eye = np.eye(lattice.size).reshape((lattice.size,) + lattice.shape)
    axes = tuple(range(1, lattice.d + 1))
    columns = np.fft.ifftn(lattice.k_squared() * np.fft.fftn(eye, axes=axes), axes=axes)
    matrix = columns.reshape(lattice.size, lattice.size).T.real
    logger.debug(f"Built Laplacian matrix for {lattice}")
    return np.ascontiguousarray(0.5 * (matrix + matrix.T))


@lru_cache(maxsize=8)
def gradient_matrices(lattice: Lattice) -> Tuple[np.ndarray, ...]:
    """Operator matrices of ∂_α (real antisymmetric, Nyquist dropped)"""
    eye = np.eye(lattice.size).reshape((lattice.size,) + lattice.shape)
    axes = tuple(range(1, lattice.d + 1))
    out = []
    for multiplier in _derivative_multipliers(lattice):
        columns = np.fft.ifftn(multiplier * np.fft.fftn(eye, axes=axes), axes=axes)
        out.append(np.ascontiguousarray(columns.reshape(lattice.size, lattice.size).T.real))
    return tuple(out)


@lru_cache(maxsize=8)
def minimal_image_displacements(lattice: Lattice) -> np.ndarray:
    """
    Integer displacements i − j wrapped to [−M_axis/2, M_axis/2) per axis.

    Returns an (M, M, d) int array.
    """
    idx = lattice.index_grid()
    diff = idx[:, None, :] - idx[None, :, :]
    m = lattice.m_axis
    return (diff + m // 2) % m - m // 2


def displacement_lengths(lattice: Lattice) -> np.ndarray:
    """|x − y| under the minimal-image convention, as an (M, M) array"""
    disp = minimal_image_displacements(lattice) * lattice.spacing
    return np.sqrt(np.sum(disp.astype(float) ** 2, axis=-1))


def midpoint_samples(fine_field: np.ndarray, lattice: Lattice) -> np.ndarray:
    """
    Sample a field given on the half-step lattice at the midpoints (x+y)/2.

    The midpoint is taken along the minimal-image displacement, so the result is
    x↔y symmetric. Antipodal pairs have two candidate midpoints and get their average.
    Returns an (M, M) array.
    """
    idx = lattice.index_grid()
    disp = minimal_image_displacements(lattice)
    fine_m = 2 * lattice.m_axis
    mid = (2 * idx[None, :, :] + disp) % fine_m
    samples = fine_field[tuple(mid[..., axis] for axis in range(lattice.d))]
    return 0.5 * (samples + samples.T)


# ============================================================================
# Kernel algebra
# ============================================================================

def kernel_apply(kernel: Kernel, f: GridFunction) -> GridFunction:
    _check_same_lattice(kernel.lattice, f.lattice)
    return GridFunction(f.lattice, kernel.matrix @ f.values)


def kernel_compose(first: Kernel, second: Kernel) -> Kernel:
    _check_same_lattice(first.lattice, second.lattice)
    return Kernel(first.lattice, first.lattice.cell_volume * (first.values @ second.values))


def kernel_adjoint(kernel: Kernel) -> Kernel:
    return Kernel(kernel.lattice, kernel.values.conj().T)


def kernel_transpose(kernel: Kernel) -> Kernel:
    return Kernel(kernel.lattice, kernel.values.T)


def kernel_conjugate(kernel: Kernel) -> Kernel:
    return Kernel(kernel.lattice, kernel.values.conj())

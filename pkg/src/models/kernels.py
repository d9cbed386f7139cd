"""
Correlation Kernel Models
Builds the pair-correlation kernel η, its Bogoliubov series sh/ch, the decomposition
into r, p, k, μ, the mean-field kernels K₁, K₂ and the time derivative η̇
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from loguru import logger

from .base import PreconditionError, Provenance, StructuralError
from .condensate import NORMALIZATION_TOLERANCE, CondensateTrajectory, projector_q
from .grid import (
    GridFunction, Kernel, Lattice, displacement_lengths, gradient_matrices, kernel_compose,
    kernel_conjugate, kernel_transpose, laplacian_matrix, midpoint_samples, refine,
)
from .scattering import (
    ScatteringSolution, omega_infinity_cell_average, omega_infinity_profile, radial_cell_average,
)

SERIES_TOLERANCE = 1e-14
MAX_SERIES_TERMS = 200

SNAPSHOT_HEADER = np.dtype([('d', '<i8'), ('m_axis', '<i8'), ('length', '<f8'), ('t', '<f8')])


# ============================================================================
# Radial correlation profiles on the lattice
# ============================================================================

class CorrelationProfile:
    """Radial correlation profile tabulated on lattice displacements"""

    provenance = Provenance.LIMITING
    n_particles: Optional[float] = None

    def __init__(self):
        self._cache: Dict[Lattice, np.ndarray] = {}

    def values(self, lattice: Lattice) -> np.ndarray:
        """(M, M) array of ω(x − y), the diagonal replaced by the cell average"""
        if lattice not in self._cache:
            r = displacement_lengths(lattice)
            off = r > 0
            table = np.zeros_like(r)
            table[off] = self._radial(r[off])
            np.fill_diagonal(table, self._cell_average(lattice))
            self._cache[lattice] = table
        return self._cache[lattice]

    def _radial(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cell_average(self, lattice: Lattice) -> float:
        raise NotImplementedError


class LimitingProfile(CorrelationProfile):
    """ω_∞ with the analytic cell average on the diagonal"""

    def __init__(self, ell: float, b0: float, variant: str = "printed"):
        super().__init__()
        self.ell = ell
        self.b0 = b0
        self.variant = variant

    def _radial(self, r: np.ndarray) -> np.ndarray:
        return omega_infinity_profile(self.ell, self.b0, r, self.variant)

    def _cell_average(self, lattice: Lattice) -> float:
        if self.b0 == 0.0:
            return 0.0
        return omega_infinity_cell_average(self.ell, self.b0, lattice.spacing, self.variant, d=lattice.d)


class FiniteNProfile(CorrelationProfile):
    """N·ω_N interpolated from the radial Neumann solution"""

    provenance = Provenance.FINITE_N

    def __init__(self, scattering: ScatteringSolution):
        super().__init__()
        self.scattering = scattering
        self.n_particles = scattering.potential.n_particles

    def _radial(self, r: np.ndarray) -> np.ndarray:
        return self.scattering.n_omega(r)

    def _cell_average(self, lattice: Lattice) -> float:
        if self.scattering.potential.is_zero:
            return 0.0
        return radial_cell_average(lambda r: float(self.scattering.n_omega(r)[0]), lattice.spacing,
                                   d=lattice.d)


# ============================================================================
# Kernel family
# ============================================================================

@dataclass
class KernelFamily:
    """All correlation kernels at one time"""

    t: float
    phi: GridFunction
    eta: Kernel
    sh: Kernel
    ch: Kernel
    provenance: Provenance = Provenance.LIMITING
    n_particles: Optional[float] = None
    profile: Optional[CorrelationProfile] = None
    k: Optional[Kernel] = None
    mu: Optional[Kernel] = None
    r: Optional[Kernel] = None
    p: Optional[Kernel] = None
    k1: Optional[Kernel] = None
    k2: Optional[Kernel] = None
    eta_dot: Optional[Kernel] = None
    eta_dot_one_sided: bool = False
    norms: Dict[str, float] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def lattice(self) -> Lattice:
        return self.phi.lattice

    def missing(self) -> List[str]:
        names = ["k", "mu", "r", "p", "k1", "k2", "eta_dot"]
        return [name for name in names if getattr(self, name) is None]

    def require_complete(self) -> None:
        absent = self.missing()
        if absent:
            raise StructuralError(f"Kernel family at t={self.t} is missing {absent}")


def _check_normalized(phi: GridFunction) -> None:
    if abs(phi.norm() - 1.0) > NORMALIZATION_TOLERANCE:
        raise PreconditionError(f"Condensate must be normalized, got norm {phi.norm():.12g}")


def singular_part(phi: GridFunction, profile: CorrelationProfile) -> Kernel:
    """k(x;y) = −ω(x−y)·φ((x+y)/2)², unprojected"""
    lattice = phi.lattice
    fine = refine(phi, 2)
    phi2_mid = midpoint_samples(fine ** 2, lattice)
    return Kernel(lattice, -profile.values(lattice) * phi2_mid)


def build_eta(phi: GridFunction, profile: CorrelationProfile, q: Optional[Kernel] = None) -> Kernel:
    """η = (q⊗q)k, each slot projected: q∘k∘qᵀ"""
    _check_normalized(phi)
    q = q if q is not None else projector_q(phi)
    base = singular_part(phi, profile)
    return kernel_compose(kernel_compose(q, base), kernel_transpose(q))


def hyperbolic_functions(eta: Kernel) -> Tuple[Kernel, Kernel]:
    """sh = Σ (ηη̄)ⁿη/(2n+1)!, ch = Σ (ηη̄)ⁿ/(2n)!, truncated at HS-term < 1e−14"""
    lattice = eta.lattice
    e = eta.matrix
    x = e @ np.conj(e)
    term_ch = np.eye(lattice.size, dtype=complex)
    term_sh = e.copy()
    ch = term_ch.copy()
    sh = term_sh.copy()
    for n in range(1, MAX_SERIES_TERMS):
        term_ch = x @ term_ch / ((2 * n - 1) * (2 * n))
        term_sh = x @ term_sh / ((2 * n) * (2 * n + 1))
        ch += term_ch
        sh += term_sh
        if max(np.linalg.norm(term_ch), np.linalg.norm(term_sh)) < SERIES_TOLERANCE:
            break
    else:
        logger.warning(f"Bogoliubov series not converged after {MAX_SERIES_TERMS} terms")
    return Kernel.from_matrix(lattice, sh), Kernel.from_matrix(lattice, ch)


def decompose(family: KernelFamily) -> KernelFamily:
    """Fill r = sh − η, p = ch − 1, k (singular part), μ = η − k and record HS norms"""
    lattice = family.lattice
    family.r = family.sh - family.eta
    family.p = family.ch - Kernel.identity(lattice)
    if family.profile is not None:
        family.k = singular_part(family.phi, family.profile)
    else:
        family.k = Kernel.zeros(lattice)
    family.mu = family.eta - family.k
    for name in ("k", "eta", "sh", "p", "r", "mu"):
        family.norms[name] = getattr(family, name).hs_norm()
    return family


def build_K1_K2(phi: GridFunction, b0: float, q: Optional[Kernel] = None) -> Tuple[Kernel, Kernel]:
    """K₁ = q K̃₁ q and K₂ = (q⊗q)K̃₂ with K̃₁ = 𝔟₀|φ|²δ, K̃₂ = 𝔟₀φ²δ"""
    _check_normalized(phi)
    q = q if q is not None else projector_q(phi)
    density = GridFunction(phi.lattice, b0 * np.abs(phi.values) ** 2)
    pairing = GridFunction(phi.lattice, b0 * phi.values ** 2)
    k1 = kernel_compose(kernel_compose(q, Kernel.multiplication(density)), q)
    k2 = kernel_compose(kernel_compose(q, Kernel.multiplication(pairing)), kernel_transpose(q))
    return k1, k2


# ============================================================================
# Time-dependent families
# ============================================================================

class KernelBuilder:
    """Builds and caches kernel families along a condensate trajectory"""

    def __init__(self, trajectory: CondensateTrajectory, profile: CorrelationProfile,
                 b0: float, cache_size: int = 4):
        self.trajectory = trajectory
        self.profile = profile
        self.b0 = b0
        self.cache_size = cache_size
        self.warnings: List[str] = []
        self._eta_cache: Dict[int, Kernel] = {}

    @property
    def dt(self) -> float:
        return self.trajectory.dt

    def phi_at(self, index: int) -> GridFunction:
        return self.trajectory.snapshot(index).normalized()

    def eta_at(self, index: int) -> Kernel:
        if index not in self._eta_cache:
            if len(self._eta_cache) >= self.cache_size:
                farthest = max(self._eta_cache, key=lambda i: abs(i - index))
                del self._eta_cache[farthest]
            self._eta_cache[index] = build_eta(self.phi_at(index), self.profile)
        return self._eta_cache[index]

    def family_at(self, index: int) -> KernelFamily:
        phi = self.phi_at(index)
        q = projector_q(phi)
        eta = self.eta_at(index)
        sh, ch = hyperbolic_functions(eta)
        family = KernelFamily(
            t=index * self.dt, phi=phi, eta=eta, sh=sh, ch=ch,
            provenance=self.profile.provenance, n_particles=self.profile.n_particles,
            profile=self.profile,
        )
        decompose(family)
        family.k1, family.k2 = build_K1_K2(phi, self.b0, q)
        family.eta_dot, family.eta_dot_one_sided = _eta_derivative(self, index)
        family.norms["eta_dot"] = family.eta_dot.hs_norm()
        if family.eta_dot_one_sided:
            family.warnings.append(f"one-sided time derivative at t={family.t:g}")
        return family


def _eta_derivative(builder: KernelBuilder, index: int) -> Tuple[Kernel, bool]:
    steps = builder.trajectory.steps
    if steps == 0:
        return Kernel.zeros(builder.trajectory.lattice), True
    if 0 < index < steps:
        diff = builder.eta_at(index + 1) - builder.eta_at(index - 1)
        return diff * (1.0 / (2.0 * builder.dt)), False
    if index == 0:
        diff = builder.eta_at(1) - builder.eta_at(0)
    else:
        diff = builder.eta_at(index) - builder.eta_at(index - 1)
    return diff * (1.0 / builder.dt), True


def eta_time_derivative(trajectory: CondensateTrajectory, t: float, builder: KernelBuilder) -> Kernel:
    """Centered difference of η over neighboring snapshots; one-sided (flagged) at the ends"""
    if builder.trajectory is not trajectory:
        raise StructuralError("Kernel builder belongs to a different trajectory")
    index = trajectory.index_of(t)
    kernel, one_sided = _eta_derivative(builder, index)
    if one_sided:
        message = f"eta time derivative at boundary time t={t:g} is one-sided (first order)"
        builder.warnings.append(message)
        logger.warning(message)
    return kernel


# ============================================================================
# Checks
# ============================================================================

def slot_laplacian(kernel: Kernel) -> Kernel:
    """Δ₁K, spectral differentiation in the first slot"""
    return Kernel.from_matrix(kernel.lattice, -laplacian_matrix(kernel.lattice) @ kernel.matrix)


def slot_gradient_l1(kernel: Kernel) -> float:
    """sup_x ∫dz |∇₁K(x;z)|, maximized over components"""
    bounds = [np.max(np.sum(np.abs(d @ kernel.matrix), axis=1))
              for d in gradient_matrices(kernel.lattice)]
    return float(max(bounds))


def family_defects(family: KernelFamily) -> Dict[str, float]:
    """HS sizes of the structural identities a family must satisfy"""
    lattice = family.lattice
    identity = Kernel.identity(lattice)
    q = projector_q(family.phi)
    eta, sh, ch = family.eta, family.sh, family.ch
    eta_norm = eta.hs_norm()
    defects = {
        'symmetry': (eta - kernel_transpose(eta)).hs_norm(),
        'hyperbolic': (ch @ ch - sh @ kernel_conjugate(sh) - identity).hs_norm(),
        'intertwining': (ch @ sh - sh @ kernel_conjugate(ch)).hs_norm(),
        'q_left': (q @ eta - eta).hs_norm(),
        'q_right': (eta @ kernel_transpose(q) - eta).hs_norm(),
        'sh_bound_slack': np.sinh(eta_norm) - sh.hs_norm(),
    }
    if family.p is not None:
        defects['p_bound_slack'] = np.cosh(eta_norm) - 1.0 - family.p.op_norm()
    return defects


# ============================================================================
# Snapshot IO
# ============================================================================

def save_kernel_snapshot(path: Union[str, Path], kernel: Kernel, t: float) -> Path:
    """Header {d, M_axis, L, t} followed by row-major little-endian complex doubles"""
    path = Path(path)
    lattice = kernel.lattice
    header = np.array([(lattice.d, lattice.m_axis, lattice.length, t)], dtype=SNAPSHOT_HEADER)
    with open(path, 'wb') as handle:
        handle.write(header.tobytes())
        handle.write(np.ascontiguousarray(kernel.values, dtype='<c16').tobytes())
    logger.debug(f"Kernel snapshot written: {path}")
    return path


def load_kernel_snapshot(path: Union[str, Path]) -> Tuple[Kernel, float]:
    data = Path(path).read_bytes()
    header = np.frombuffer(data[:SNAPSHOT_HEADER.itemsize], dtype=SNAPSHOT_HEADER)[0]
    lattice = Lattice(int(header['d']), int(header['m_axis']), float(header['length']))
    body = np.frombuffer(data[SNAPSHOT_HEADER.itemsize:], dtype='<c16')
    if body.size != lattice.size ** 2:
        raise StructuralError(f"Snapshot {path} holds {body.size} values, expected {lattice.size ** 2}")
    return Kernel(lattice, body.reshape(lattice.size, lattice.size).copy()), float(header['t'])

"""
Condensate Models
Split-step evolution of the condensate wave function under the cubic NLS and the
N-dependent modified Hartree equation, plus the projector onto its orthogonal complement
"""

from typing import Callable, List, Optional, Tuple

import numpy as np
from loguru import logger

from .base import CondensateFlavor, PreconditionError, StructuralError
from .grid import GridFunction, Kernel, Lattice, laplacian, minimal_image_displacements
from .scattering import Potential, ScatteringSolution

SIGMA_MODES = ("cubic", "linear")
NORMALIZATION_TOLERANCE = 1e-8
MIN_POINTS_ACROSS_SUPPORT = 4


class SplitStepper:
    """
    Strang splitting: half nonlinear phase, full kinetic step, half nonlinear phase.

    The nonlinear sub-flow only rotates phases, so it is integrated exactly.
    """

    def __init__(self, lattice: Lattice, dt: float, potential: Callable[[np.ndarray], np.ndarray]):
        self.lattice = lattice
        self.dt = dt
        self.potential = potential
        self._kinetic = np.exp(-1j * dt * lattice.k_squared())

    def step(self, values: np.ndarray) -> np.ndarray:
        half = 0.5 * self.dt
        values = values * np.exp(-1j * half * self.potential(values))
        field = np.fft.ifftn(self._kinetic * np.fft.fftn(values.reshape(self.lattice.shape)))
        values = field.reshape(-1)
        return values * np.exp(-1j * half * self.potential(values))

    def run(self, values: np.ndarray, steps: int) -> np.ndarray:
        """Return the (steps+1, M) array of snapshots"""
        out = np.empty((steps + 1, values.size), dtype=complex)
        out[0] = values
        for n in range(steps):
            out[n + 1] = self.step(out[n])
        return out


class CondensateTrajectory:
    """Snapshots φ_{t_n} at t_n = n·dt of one condensate flow"""

    def __init__(self, lattice: Lattice, dt: float, snapshots: np.ndarray,
                 flavor: CondensateFlavor, stepper: SplitStepper,
                 energy: Callable[[np.ndarray], float],
                 potential: Optional[Potential] = None,
                 scattering: Optional[ScatteringSolution] = None,
                 sigma: float = 0.0, sigma_mode: str = "cubic"):
        self.lattice = lattice
        self.dt = dt
        self.snapshots = snapshots
        self.flavor = flavor
        self.potential = potential
        self.scattering = scattering
        self.sigma = sigma
        self.sigma_mode = sigma_mode
        self.warnings: List[str] = []
        self._stepper = stepper
        self._energy = energy

    @property
    def steps(self) -> int:
        return self.snapshots.shape[0] - 1

    @property
    def final_time(self) -> float:
        return self.steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt

    def index_of(self, t: float) -> int:
        index = int(round(t / self.dt))
        if index < 0 or index > self.steps or abs(index * self.dt - t) > 1e-9 * max(1.0, abs(t)):
            raise StructuralError(f"Time {t} is not a snapshot time of this trajectory")
        return index

    def snapshot(self, index: int) -> GridFunction:
        return GridFunction(self.lattice, self.snapshots[index])

    def at(self, t: float) -> GridFunction:
        return self.snapshot(self.index_of(t))

    @property
    def final(self) -> GridFunction:
        return self.snapshot(self.steps)

    def mass_history(self) -> np.ndarray:
        return np.sqrt(self.lattice.cell_volume * np.sum(np.abs(self.snapshots) ** 2, axis=1))

    def energy_history(self) -> np.ndarray:
        return np.array([self._energy(values) for values in self.snapshots])

    def linf_history(self) -> np.ndarray:
        return np.max(np.abs(self.snapshots), axis=1)

    def max_mass_drift(self) -> float:
        mass = self.mass_history()
        return float(np.max(np.abs(mass / mass[0] - 1.0)))

    def time_reversal_defect(self) -> float:
        """‖conj(evolve_T(conj(φ_T))) − φ₀‖₂"""
        values = np.conj(self.snapshots[-1])
        for _ in range(self.steps):
            values = self._stepper.step(values)
        back = GridFunction(self.lattice, np.conj(values))
        return (back - self.snapshot(0)).norm()

    def __repr__(self) -> str:
        return (f"<CondensateTrajectory(flavor={self.flavor.value}, steps={self.steps}, "
                f"dt={self.dt})>")


def _check_inputs(phi0: GridFunction, T: float, dt: float) -> int:
    if not dt > 0:
        raise PreconditionError(f"Time step must be positive, got {dt}")
    if T < 0:
        raise PreconditionError(f"Final time must be non-negative, got {T}")
    if phi0.norm() == 0.0:
        raise PreconditionError("Initial condensate must be nonzero")
    return int(round(T / dt))


def _kinetic_energy(lattice: Lattice, values: np.ndarray) -> float:
    f = GridFunction(lattice, values)
    return float(np.real(f.inner(-laplacian(f))))


def evolve_nls(phi0: GridFunction, sigma: float, T: float, dt: float,
               sigma_mode: str = "cubic") -> CondensateTrajectory:
    """
    i∂_tφ = −Δφ + σ|φ|²φ (cubic) or i∂_tφ = −Δφ + σφ (linear) by Strang splitting.
    """
    if sigma_mode not in SIGMA_MODES:
        raise PreconditionError(f"Unknown sigma mode '{sigma_mode}'")
    steps = _check_inputs(phi0, T, dt)
    lattice = phi0.lattice
    dv = lattice.cell_volume

    if sigma_mode == "cubic":
        potential = lambda values: sigma * np.abs(values) ** 2
        interaction = lambda values: 0.5 * sigma * dv * np.sum(np.abs(values) ** 4)
    else:
        potential = lambda values: np.full(values.shape, sigma)
        interaction = lambda values: sigma * dv * np.sum(np.abs(values) ** 2)

    stepper = SplitStepper(lattice, dt, potential)
    snapshots = stepper.run(phi0.values.copy(), steps)
    energy = lambda values: _kinetic_energy(lattice, values) + float(interaction(values))
    trajectory = CondensateTrajectory(
        lattice, dt, snapshots, CondensateFlavor.NLS, stepper, energy,
        sigma=sigma, sigma_mode=sigma_mode,
    )
    logger.info(f"NLS evolved to T={trajectory.final_time:g} in {steps} steps, "
                f"mass drift {trajectory.max_mass_drift():.2e}")
    return trajectory


def hartree_weight(lattice: Lattice, pot: Potential, scat: ScatteringSolution) -> Tuple[np.ndarray, bool]:
    """
    Lattice tabulation of V_N f_N indexed by displacement, with ΔV Σ w = ∫V_N f_N.

    Returns (weight field, resolved flag). An under-resolved V_N is replaced by its
    cell average, which puts the whole integral into the origin cell.
    """
    weight = np.zeros(lattice.size)
    if pot.is_zero:
        return weight.reshape(lattice.shape), True
    total = scat.hartree_integral
    resolved = pot.scaled_support / lattice.spacing >= MIN_POINTS_ACROSS_SUPPORT
    if resolved:
        disp = minimal_image_displacements(lattice)[:, 0, :] * lattice.spacing
        r = np.sqrt(np.sum(disp.astype(float) ** 2, axis=1))
        weight = pot.scaled(r) * scat.f_at(r)
        weight *= total / (lattice.cell_volume * np.sum(weight))
    else:
        weight[0] = total / lattice.cell_volume
    return weight.reshape(lattice.shape), resolved


def evolve_modified_hartree(phi0: GridFunction, pot: Potential, scat: ScatteringSolution,
                            T: float, dt: float) -> CondensateTrajectory:
    """i∂_tφ = −Δφ + (V_N f_N * |φ|²)φ with the convolution evaluated by FFT"""
    steps = _check_inputs(phi0, T, dt)
    lattice = phi0.lattice
    dv = lattice.cell_volume
    weight, resolved = hartree_weight(lattice, pot, scat)
    weight_hat = np.fft.fftn(weight)

    def potential(values: np.ndarray) -> np.ndarray:
        density = np.abs(values.reshape(lattice.shape)) ** 2
        return (dv * np.fft.ifftn(weight_hat * np.fft.fftn(density))).real.reshape(-1)

    def energy(values: np.ndarray) -> float:
        mean_field = 0.5 * dv * np.sum(potential(values) * np.abs(values) ** 2)
        return _kinetic_energy(lattice, values) + float(mean_field)

    stepper = SplitStepper(lattice, dt, potential)
    snapshots = stepper.run(phi0.values.copy(), steps)
    trajectory = CondensateTrajectory(
        lattice, dt, snapshots, CondensateFlavor.MODIFIED_HARTREE, stepper, energy,
        potential=pot, scattering=scat, sigma=scat.hartree_integral,
    )
    if not resolved:
        message = (f"Lattice spacing {lattice.spacing:.4g} does not resolve the scaled support "
                   f"{pot.scaled_support:.4g}; V_N f_N replaced by its cell average")
        trajectory.warnings.append(message)
        logger.warning(message)
    logger.info(f"Modified Hartree evolved (N={pot.n_particles:g}) to T={trajectory.final_time:g}, "
                f"mass drift {trajectory.max_mass_drift():.2e}")
    return trajectory


def distance_to_limit(first: CondensateTrajectory, second: CondensateTrajectory, t: float) -> float:
    """‖φ_t − φ_{N,t}‖₂ between two trajectories sharing a lattice"""
    return (first.at(t) - second.at(t)).norm()


def gaussian_initial_state(lattice: Lattice, width: Optional[float] = None,
                           center: Optional[float] = None, momentum: float = 0.0) -> GridFunction:
    """Normalized periodized Gaussian, optionally boosted along the first axis"""
    width = width if width is not None else lattice.length / 8.0
    center = center if center is not None else lattice.length / 2.0
    points = lattice.coordinates()
    values = np.zeros(lattice.size)
    shifts = np.array(np.meshgrid(*([[-1, 0, 1]] * lattice.d), indexing='ij')).reshape(lattice.d, -1).T
    for shift in shifts:
        offset = points - center + shift * lattice.length
        values += np.exp(-np.sum(offset ** 2, axis=1) / (2.0 * width ** 2))
    phase = np.exp(1j * momentum * points[:, 0])
    return GridFunction(lattice, values * phase).normalized()


def projector_q(phi: GridFunction) -> Kernel:
    """Kernel of 1 − |φ⟩⟨φ|"""
    norm = phi.norm()
    if norm == 0.0:
        raise PreconditionError("projector_q needs a nonzero condensate")
    if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
        raise PreconditionError(f"projector_q needs a normalized condensate, got norm {norm:.12g}")
    return Kernel.identity(phi.lattice) - Kernel.rank_one(phi, phi)

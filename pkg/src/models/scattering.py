"""
Scattering Models
Radial interaction profiles, the Neumann scattering problem of the scaled potential,
the zero-energy scattering length and the limiting correlation profile ω_∞
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Optional, Union

import numpy as np
from loguru import logger
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .base import PreconditionError, SolverFailureError

# ∫ dx/|x| over the unit cube centered at the origin
CUBE_INVERSE_RADIUS = 3.0 * np.log(2.0 + np.sqrt(3.0)) - np.pi / 2.0
# ∫ dx/|x| over the unit square centered at the origin
SQUARE_INVERSE_RADIUS = 4.0 * np.log(1.0 + np.sqrt(2.0))
# d -> (unit-cell average of 1/|x|, unit-cell average of |x|²)
CELL_MOMENTS = {2: (SQUARE_INVERSE_RADIUS, 1.0 / 6.0), 3: (CUBE_INVERSE_RADIUS, 1.0 / 4.0)}

OMEGA_VARIANTS = ("printed", "neumann")


def _bump(r: np.ndarray, radius: float) -> np.ndarray:
    s = np.clip(np.asarray(r, dtype=float) / radius, 0.0, 1.0)
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def _polynomial(r: np.ndarray, radius: float) -> np.ndarray:
    s = np.asarray(r, dtype=float) / radius
    return np.where(s < 1.0, (1.0 - s ** 2) ** 2, 0.0)


def _square(r: np.ndarray, radius: float) -> np.ndarray:
    return np.where(np.asarray(r, dtype=float) < radius, 1.0, 0.0)


def _zero(r: np.ndarray, radius: float) -> np.ndarray:
    return np.zeros_like(np.asarray(r, dtype=float))


PROFILES: Dict[str, Callable[[np.ndarray, float], np.ndarray]] = {
    "bump": _bump,
    "polynomial": _polynomial,
    "square": _square,
    "zero": _zero,
}


@dataclass(frozen=True)
class Potential:
    """Repulsive radial pair potential and its N-dependent scaling V_N(x) = N^{3β}V(N^β x)"""

    profile: str = "bump"
    amplitude: float = 1.0
    support_radius: float = 1.0
    beta: float = 0.5
    n_particles: float = 1000.0

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise PreconditionError(f"Unknown potential profile '{self.profile}'")
        if self.amplitude < 0:
            raise PreconditionError("Potential amplitude must be non-negative")
        if not self.support_radius > 0:
            raise PreconditionError("Support radius must be positive")
        if not 0.0 < self.beta < 1.0:
            raise PreconditionError(f"Scaling exponent must lie in (0, 1), got {self.beta}")
        if not self.n_particles > 0:
            raise PreconditionError("Particle number must be positive")

    @property
    def is_zero(self) -> bool:
        return self.profile == "zero" or self.amplitude == 0.0

    def unscaled(self, r: Union[float, np.ndarray]) -> np.ndarray:
        return self.amplitude * PROFILES[self.profile](np.atleast_1d(r), self.support_radius)

    def scaled(self, r: Union[float, np.ndarray]) -> np.ndarray:
        n, beta = self.n_particles, self.beta
        return n ** (3 * beta) * self.unscaled(n ** beta * np.atleast_1d(r))

    @property
    def scaled_support(self) -> float:
        return self.n_particles ** (-self.beta) * self.support_radius

    @cached_property
    def b0(self) -> float:
        """𝔟₀ = ∫V over ℝ³"""
        if self.is_zero:
            return 0.0
        value, _ = quad(
            lambda r: 4.0 * np.pi * r * r * float(self.unscaled(r)[0]),
            0.0, self.support_radius, limit=200, epsabs=1e-14, epsrel=1e-13,
        )
        return float(value)

    def with_particles(self, n_particles: float) -> 'Potential':
        return Potential(self.profile, self.amplitude, self.support_radius, self.beta, n_particles)

    def scaled_by(self, factor: float) -> 'Potential':
        return Potential(self.profile, self.amplitude * factor, self.support_radius,
                         self.beta, self.n_particles)


@dataclass
class ScatteringSolution:
    """Ground state of the Neumann problem on the ball B_ℓ"""

    potential: Potential
    ell: float
    radii: np.ndarray
    f_values: np.ndarray
    eigenvalue: float
    scattering_length: float
    mass_integral: float
    interaction_integral: float
    metadata: Dict[str, float] = field(default_factory=dict)

    @cached_property
    def _spline(self) -> CubicSpline:
        return CubicSpline(self.radii, self.f_values)

    @property
    def omega_values(self) -> np.ndarray:
        return 1.0 - self.f_values

    def f_at(self, r: Union[float, np.ndarray]) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.ones_like(r)
        inside = r < self.ell
        out[inside] = self._spline(r[inside])
        return out

    def n_omega(self, r: Union[float, np.ndarray]) -> np.ndarray:
        """r ↦ N·ω_N(r)"""
        return self.potential.n_particles * (1.0 - self.f_at(r))

    @property
    def n_lambda(self) -> float:
        return self.potential.n_particles * self.eigenvalue

    @property
    def hartree_integral(self) -> float:
        """c_N = ∫V_N f_N"""
        return 2.0 * self.potential.n_particles * self.interaction_integral

    def __repr__(self) -> str:
        return (f"<ScatteringSolution(N={self.potential.n_particles:g}, ell={self.ell}, "
                f"lambda_N={self.eigenvalue:.6e})>")


# ============================================================================
# Neumann problem
# ============================================================================

_ODE_OPTIONS = dict(method="DOP853", rtol=1e-11, atol=1e-16)


def _radial_rhs(pot: Potential, eigenvalue: float):
    inverse_2n = 1.0 / (2.0 * pot.n_particles)

    def rhs(r, y):
        v = float(pot.scaled(r)[0]) * inverse_2n
        u, du = y[0], y[1]
        return [du, (v - eigenvalue) * u, 4.0 * np.pi * r * u, 4.0 * np.pi * r * u * v]

    return rhs


def _shoot(pot: Potential, ell: float, eigenvalue: float, grid: Optional[np.ndarray] = None):
    """Integrate u'' = (V_N/2N − λ)u with u(0)=0, u'(0)=1 in two legs: core and free region"""
    core = min(pot.scaled_support, ell)
    rhs = _radial_rhs(pot, eigenvalue)
    y0 = [0.0, 1.0, 0.0, 0.0]
    legs = [(0.0, core, core / 40.0), (core, ell, np.inf)]
    samples = []
    for start, stop, max_step in legs:
        if stop <= start:
            continue
        t_eval = None
        if grid is not None:
            t_eval = grid[(grid >= start) & (grid <= stop)]
        sol = solve_ivp(rhs, (start, stop), y0, t_eval=t_eval, max_step=max_step, **_ODE_OPTIONS)
        if not sol.success:
            raise SolverFailureError(f"Radial integration failed: {sol.message}")
        y0 = sol.y[:, -1]
        if grid is not None:
            samples.append(sol)
    return np.asarray(y0), samples


def radial_grid(pot: Potential, ell: float, points: int = 10_000) -> np.ndarray:
    """Radial sample points, geometrically refined towards 0 inside the scaled support"""
    points = max(points, 10_000)
    core = min(pot.scaled_support, ell)
    inner = np.geomspace(core * 1e-4, core, points // 2)
    outer = np.linspace(core, ell, points - points // 2 + 1)[1:]
    return np.unique(np.concatenate([[0.0], inner, outer]))


def solve_neumann_scattering(pot: Potential, ell: float, radial_points: int = 10_000) -> ScatteringSolution:
    """
    Lowest eigenpair of [−Δ + V_N/(2N)]f = λf on B_ℓ with f(ℓ) = 1 and f'(ℓ) = 0.

    λ_N is bracketed in [0, C/N] from the integrated eigenvalue identity and refined by
    bracketing root search on the Neumann residual ℓu'(ℓ) − u(ℓ) of the shooting solution.
    """
    if not ell > pot.scaled_support:
        raise PreconditionError(
            f"ell={ell} must exceed the scaled support {pot.scaled_support:.6g}"
        )
    grid = radial_grid(pot, ell, radial_points)
    a0 = scattering_length(pot)

    if pot.is_zero:
        logger.info("Zero potential: f_N = 1, lambda_N = 0")
        mass = 4.0 * np.pi * ell ** 3 / 3.0
        return ScatteringSolution(pot, ell, grid, np.ones_like(grid), 0.0, 0.0, mass, 0.0)

    def residual(eigenvalue: float) -> float:
        y, _ = _shoot(pot, ell, eigenvalue)
        return ell * y[1] - y[0]

    if residual(0.0) <= 0.0:
        raise SolverFailureError("Neumann residual is not positive at zero energy")
    estimate = 3.0 * pot.b0 / (8.0 * np.pi * ell ** 3 * pot.n_particles)
    upper = 2.0 * estimate
    for _ in range(40):
        if residual(upper) < 0.0:
            break
        upper *= 2.0
    else:
        raise SolverFailureError("No eigenvalue bracket found for the Neumann problem")

    eigenvalue = brentq(residual, 0.0, upper, xtol=1e-300, rtol=1e-14, maxiter=500)
    y_end, legs = _shoot(pot, ell, eigenvalue, grid)
    scale = ell / y_end[0]

    radii = np.concatenate([leg.t for leg in legs])
    u = np.concatenate([leg.y[0] for leg in legs]) * scale
    du = np.concatenate([leg.y[1] for leg in legs]) * scale
    radii, unique = np.unique(radii, return_index=True)
    u, du = u[unique], du[unique]
    f_values = np.empty_like(radii)
    f_values[1:] = u[1:] / radii[1:]
    f_values[0] = du[0]

    mass = y_end[2] * scale
    interaction = y_end[3] * scale
    solution = ScatteringSolution(
        pot, ell, radii, f_values, float(eigenvalue), a0, float(mass), float(interaction),
        metadata={'neumann_residual': float(ell * y_end[1] - y_end[0]) * scale / ell},
    )
    logger.info(
        f"Neumann problem solved: N={pot.n_particles:g}, beta={pot.beta}, "
        f"N*lambda_N={solution.n_lambda:.8g}, identity residual="
        f"{eigenvalue_identity_residual(solution):.3e}"
    )
    return solution


def omega_profile(sol: ScatteringSolution) -> Callable[[np.ndarray], np.ndarray]:
    """r ↦ N·ω_N(r) of a Neumann solution"""
    return sol.n_omega


def eigenvalue_identity_residual(sol: ScatteringSolution) -> float:
    """Relative residual of λ_N ∫_{B_ℓ} f_N = (1/2N) ∫ V_N f_N"""
    if sol.interaction_integral == 0.0:
        return abs(sol.eigenvalue * sol.mass_integral)
    return abs(sol.eigenvalue * sol.mass_integral - sol.interaction_integral) / abs(sol.interaction_integral)


def limiting_n_lambda(b0: float, ell: float) -> float:
    """lim N·λ_N = 3𝔟₀/(8πℓ³)"""
    return 3.0 * b0 / (8.0 * np.pi * ell ** 3)


# ============================================================================
# Zero-energy scattering
# ============================================================================

def scattering_length(pot: Potential, max_step: Optional[float] = None) -> float:
    """
    Scattering length 𝔞₀ of [−Δ + V/2]f = 0.

    Integrates u'' = (V/2)u outward from u(0)=0, u'(0)=1 to R_V and matches u = c(r − 𝔞₀).
    """
    if pot.is_zero:
        return 0.0
    radius = pot.support_radius
    step = max_step if max_step is not None else radius / 200.0

    def rhs(r, y):
        return [y[1], 0.5 * float(pot.unscaled(r)[0]) * y[0]]

    sol = solve_ivp(rhs, (0.0, radius), [0.0, 1.0], method="DOP853",
                    rtol=1e-12, atol=1e-15, max_step=step)
    if not sol.success:
        raise SolverFailureError(f"Zero-energy integration failed: {sol.message}")
    u, du = sol.y[0, -1], sol.y[1, -1]
    return float(radius - u / du)


# ============================================================================
# Limiting correlation profile
# ============================================================================

def _quadratic_coefficient(variant: str) -> float:
    if variant == "printed":
        return 1.0 / 3.0
    if variant == "neumann":
        return 1.0 / 2.0
    raise PreconditionError(f"Unknown omega_infinity variant '{variant}'")


def omega_infinity_profile(ell: float, b0: float, r: np.ndarray, variant: str = "printed") -> np.ndarray:
    """Vectorized ω_∞ on distances r > 0"""
    r = np.asarray(r, dtype=float)
    coefficient = _quadratic_coefficient(variant)
    with np.errstate(divide='ignore'):
        values = b0 / (8.0 * np.pi) * (1.0 / r - 1.5 / ell + coefficient * r ** 2 / ell ** 3)
    return np.where(r <= ell, values, 0.0)


def omega_infinity(ell: float, b0: float, x: Union[float, np.ndarray], variant: str = "printed") -> float:
    """
    ω_∞(x) = 𝔟₀/(8π)[1/|x| − 3/(2ℓ) + |x|²/(3ℓ³)] inside B_ℓ and 0 outside.

    `x` is a distance or a displacement vector. The "neumann" variant uses the
    coefficient 1/(2ℓ³), which makes the profile vanish continuously at |x| = ℓ.
    """
    r = float(np.linalg.norm(np.atleast_1d(x)))
    if r == 0.0:
        raise PreconditionError("omega_infinity is singular at x = 0")
    return float(omega_infinity_profile(ell, b0, np.array([r]), variant)[0])


def omega_infinity_cell_average(ell: float, b0: float, spacing: float, variant: str = "printed",
                                d: int = 3) -> float:
    """
    Average of ω_∞ over the lattice cell of side `spacing` centered at 0.

    The cell is a cube for d = 3 and a square for d = 2. On a segment 1/|x| is not
    integrable, so for d = 1 the profile is taken at half a spacing instead.
    """
    if d == 1:
        return float(omega_infinity_profile(ell, b0, np.array([spacing / 2.0]), variant)[0])
    if d not in CELL_MOMENTS:
        raise PreconditionError(f"Lattice dimension must be 1, 2 or 3, got {d}")
    coefficient = _quadratic_coefficient(variant)
    inverse_radius, second_moment = CELL_MOMENTS[d]
    return b0 / (8.0 * np.pi) * (
        inverse_radius / spacing - 1.5 / ell + coefficient * second_moment * spacing ** 2 / ell ** 3
    )


def radial_cell_average(profile: Callable[[float], float], spacing: float, nodes: int = 24,
                        d: int = 3) -> float:
    """
    Average of a radial function over the lattice cell of side `spacing` centered at 0.

    The cube (d = 3) is split into 24 pyramids and the square (d = 2) into 8 triangles,
    each mapped with a Duffy transform, which removes an integrable 1/r singularity at
    the origin. For d = 1 the profile is evaluated at half a spacing.
    """
    half = spacing / 2.0
    if d == 1:
        return float(profile(half))
    if d not in CELL_MOMENTS:
        raise PreconditionError(f"Lattice dimension must be 1, 2 or 3, got {d}")
    t, w = np.polynomial.legendre.leggauss(nodes)
    v, wv = 0.5 * (t + 1.0), 0.5 * w
    if d == 2:
        total = 0.0
        for vi, wi in zip(v, wv):
            stretch = np.sqrt(1.0 + vi * vi)
            value, _ = quad(lambda x: x * profile(x * stretch), 0.0, half, limit=200)
            total += wi * value
        return 2.0 * total / half ** 2
    total = 0.0
    for vi, wi in zip(v, wv):
        for vj, wj in zip(v, wv):
            stretch = np.sqrt(1.0 + vi * vi + vj * vj)
            value, _ = quad(lambda x: x * x * profile(x * stretch), 0.0, half, limit=200)
            total += wi * wj * value
    return 3.0 * total / half ** 3


def sup_error_vs_limit(sol: ScatteringSolution, delta: float, variant: str = "printed",
                       samples: int = 2000) -> float:
    """sup over r ∈ [δ, ℓ] of |N·ω_N(r) − ω_∞(r)|"""
    r = np.linspace(delta, sol.ell, samples)
    limit = omega_infinity_profile(sol.ell, sol.potential.b0, r, variant)
    return float(np.max(np.abs(sol.n_omega(r) - limit)))

"""
Central Limit Models
Fluctuation vectors, covariance matrices, Gaussian probabilities and multivariate
Gaussian expectations built from the Bogoliubov pair and the correlation kernels
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from loguru import logger
from scipy.special import ndtr

from .base import PreconditionError, SingularCovarianceError, StructuralError, TimeSeries
from .bogoliubov import BogoliubovPair
from .condensate import NORMALIZATION_TOLERANCE, projector_q
from .grid import GridFunction, Kernel, Lattice, apply_multiplier_rows, kernel_apply
from .kernels import KernelFamily

SINGULAR_CONDITION = 1e12
FLUCTUATION_FORMS = ("exact", "printed")
TIME_TOLERANCE = 1e-9
QUADRATURE_TOLERANCE = 1e-14


# ============================================================================
# Observables
# ============================================================================

@dataclass
class Observable:
    """Bounded one-particle operator O given by its kernel"""

    name: str
    kernel: Kernel
    kind: str = "custom"

    @property
    def lattice(self) -> Lattice:
        return self.kernel.lattice

    def op_norm(self) -> float:
        return self.kernel.op_norm()

    def apply(self, f: GridFunction) -> GridFunction:
        return kernel_apply(self.kernel, f)

    @classmethod
    def window(cls, name: str, lattice: Lattice, center: Sequence[float], half_width: float,
               edge: float) -> 'Observable':
        """Multiplication by a smooth periodic indicator of a box around `center`"""
        if not half_width > 0 or not edge > 0:
            raise PreconditionError("Window half-width and edge must be positive")
        center = np.broadcast_to(np.asarray(center, dtype=float), (lattice.d,))
        points = lattice.coordinates()
        offset = (points - center + 0.5 * lattice.length) % lattice.length - 0.5 * lattice.length
        profile = np.prod(0.5 * (np.tanh((offset + half_width) / edge)
                                 - np.tanh((offset - half_width) / edge)), axis=1)
        return cls(name, Kernel.multiplication(GridFunction(lattice, profile)), kind="window")

    @classmethod
    def momentum_window(cls, name: str, lattice: Lattice, cutoff: float, edge: float) -> 'Observable':
        """Fourier multiplier smoothly cutting off wavenumbers above `cutoff`"""
        if not cutoff > 0 or not edge > 0:
            raise PreconditionError("Momentum cutoff and edge must be positive")
        k_abs = np.sqrt(lattice.k_squared())
        multiplier = 0.5 * (1.0 - np.tanh((k_abs - cutoff) / edge))
        matrix = apply_multiplier_rows(np.eye(lattice.size, dtype=complex), lattice, multiplier)
        return cls(name, Kernel.from_matrix(lattice, matrix), kind="momentum_window")

    @classmethod
    def rank_one(cls, name: str, f: GridFunction, g: Optional[GridFunction] = None) -> 'Observable':
        return cls(name, Kernel.rank_one(f, g if g is not None else f), kind="rank_one")

    @classmethod
    def custom(cls, name: str, kernel: Kernel) -> 'Observable':
        return cls(name, kernel, kind="custom")


# ============================================================================
# Fluctuation vectors and covariance
# ============================================================================

def transform_mode(pair: BogoliubovPair, h: np.ndarray) -> np.ndarray:
    """U h + conj(V) conj(h), the field argument after conjugation with the flow"""
    return pair.u @ h + pair.v.conj() @ np.conj(h)


def fluctuation_vector(observable: Observable, phi: GridFunction, family: KernelFamily,
                       pair: BogoliubovPair, form: str = "exact") -> GridFunction:
    """
    ν = U h + conj(V) conj(h) with h = ch w + sh conj(w) and w = q O φ.

    form="printed" evaluates (U ch + V̄ sh)w + (U sh + V̄ ch)w̄, which agrees with the
    exact form whenever η is real.
    """
    if form not in FLUCTUATION_FORMS:
        raise PreconditionError(f"Unknown fluctuation form '{form}'")
    if abs(family.t - pair.t) > TIME_TOLERANCE * max(1.0, abs(pair.t)):
        raise StructuralError(f"Kernel family at t={family.t} and pair at t={pair.t} do not match")
    if phi.lattice != family.lattice or observable.lattice != family.lattice:
        raise StructuralError("Observable, condensate and kernels live on different lattices")
    if abs(phi.norm() - 1.0) > NORMALIZATION_TOLERANCE:
        raise PreconditionError(f"Condensate must be normalized, got norm {phi.norm():.12g}")

    w = kernel_apply(projector_q(phi), observable.apply(phi)).values
    ch, sh = family.ch.matrix, family.sh.matrix
    if form == "exact":
        h = ch @ w + sh @ np.conj(w)
        nu = transform_mode(pair, h)
    else:
        u, v_bar = pair.u, pair.v.conj()
        nu = (u @ ch + v_bar @ sh) @ w + (u @ sh + v_bar @ ch) @ np.conj(w)
    return GridFunction(phi.lattice, nu)


@dataclass
class CovarianceReport:
    """Covariance matrix of a set of fluctuation vectors at one time"""

    t: float
    names: List[str]
    vectors: List[GridFunction]
    sigma: np.ndarray
    norms: np.ndarray
    determinant: complex
    condition_number: float
    hermiticity_defect: float
    inverse: Optional[np.ndarray] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.sigma.shape[0]

    @property
    def singular(self) -> bool:
        return self.inverse is None

    @property
    def variance(self) -> float:
        """‖σ_t‖² for a single observable"""
        if self.size != 1:
            raise PreconditionError("Variance is defined for a single observable")
        return float(self.sigma[0, 0].real)

    def require_invertible(self) -> None:
        if self.singular:
            raise SingularCovarianceError(
                f"Covariance at t={self.t} is singular (condition number {self.condition_number:.3e})"
            )


def covariance_matrix(vectors: Sequence[GridFunction], t: float = 0.0,
                      names: Optional[Sequence[str]] = None) -> CovarianceReport:
    """Σ_ij = ⟨ν_i, ν_j⟩ for i < j and ⟨ν_j, ν_i⟩ otherwise"""
    vectors = list(vectors)
    if not vectors:
        raise PreconditionError("Covariance needs at least one fluctuation vector")
    lattice = vectors[0].lattice
    if any(v.lattice != lattice for v in vectors):
        raise StructuralError("Fluctuation vectors live on different lattices")
    names = list(names) if names is not None else [f"O{j + 1}" for j in range(len(vectors))]

    k = len(vectors)
    sigma = np.zeros((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            sigma[i, j] = vectors[i].inner(vectors[j]) if i < j else vectors[j].inner(vectors[i])

    norms = np.array([v.norm() for v in vectors])
    determinant = complex(np.linalg.det(sigma))
    condition = float(np.linalg.cond(sigma)) if np.any(sigma) else float("inf")
    defect = float(np.linalg.norm(sigma - sigma.conj().T))
    report = CovarianceReport(
        t=t, names=names, vectors=vectors, sigma=sigma, norms=norms,
        determinant=determinant, condition_number=condition, hermiticity_defect=defect,
    )
    if np.isfinite(condition) and condition < SINGULAR_CONDITION:
        report.inverse = np.linalg.inv(sigma)
    else:
        report.warnings.append(f"covariance at t={t:g} is singular")
        logger.warning(f"Covariance at t={t:g} is singular (condition number {condition:.3e})")
    scale = max(1.0, float(np.max(np.abs(sigma))))
    if defect > 1e-10 * scale:
        message = f"covariance at t={t:g} is not Hermitian (defect {defect:.3e})"
        report.warnings.append(message)
        logger.warning(message)
    return report


def fluctuation_report(observables: Sequence[Observable], phi: GridFunction, family: KernelFamily,
                       pair: BogoliubovPair, form: str = "exact") -> CovarianceReport:
    vectors = [fluctuation_vector(o, phi, family, pair, form) for o in observables]
    return covariance_matrix(vectors, t=pair.t, names=[o.name for o in observables])


# ============================================================================
# Gaussian side
# ============================================================================

def gaussian_probability(variance: float, a: float, b: float) -> float:
    """ℙ(G ∈ [a, b]) for a centered Gaussian; a degenerate G gives the indicator of 0 ∈ [a, b]"""
    if variance < 0:
        raise PreconditionError(f"Variance must be non-negative, got {variance}")
    if not a < b:
        raise PreconditionError(f"Interval needs a < b, got [{a}, {b}]")
    if variance == 0:
        return 1.0 if a <= 0.0 <= b else 0.0
    sd = np.sqrt(variance)
    if a > 0:
        return float(ndtr(-a / sd) - ndtr(-b / sd))
    return float(ndtr(b / sd) - ndtr(a / sd))


def berry_esseen_gaussian_side(report: CovarianceReport, a: float, b: float) -> float:
    """Gaussian probability of [a, b] for the single observable of `report`"""
    return gaussian_probability(report.variance, a, b)


def _sigma_of(source: Union[CovarianceReport, np.ndarray]) -> np.ndarray:
    return source.sigma if isinstance(source, CovarianceReport) else np.atleast_2d(np.asarray(source, dtype=complex))


def characteristic_function(source: Union[CovarianceReport, np.ndarray], s: Sequence[float]) -> complex:
    """exp(−½ sᵀΣs)"""
    sigma = _sigma_of(source)
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.size != sigma.shape[0]:
        raise StructuralError(f"Argument has {s.size} components for a {sigma.shape[0]}x{sigma.shape[0]} covariance")
    return complex(np.exp(-0.5 * s @ sigma @ s))


def gaussian_density(report: CovarianceReport, x: Sequence[float]) -> complex:
    """Centered Gaussian density with covariance Σ at x"""
    report.require_invertible()
    x = np.asarray(x, dtype=float).reshape(-1)
    k = report.size
    norm = np.sqrt((2.0 * np.pi) ** k * report.determinant)
    return complex(np.exp(-0.5 * x @ report.inverse @ x) / norm)


def variance_time_series(reports: Sequence[CovarianceReport]) -> TimeSeries:
    """t ↦ diagonal entries ‖ν_j‖² for each observable"""
    if not reports:
        raise PreconditionError("No covariance reports given")
    names = reports[0].names
    series = TimeSeries(["t"] + [f"var_{name}" for name in names])
    for report in reports:
        if report.names != names:
            raise StructuralError("Reports carry different observables")
        values = {f"var_{name}": float(report.sigma[j, j].real) for j, name in enumerate(names)}
        series.append(t=report.t, **values)
    return series


# ============================================================================
# Multivariate expectation
# ============================================================================

@dataclass
class TestFunction:
    """
    Test function g with Fourier transform ĝ(s) = (1/2π)∫g(x)e^{−isx}dx.

    `direct` is the position-side g, needed only for the cross-check.
    """

    name: str
    fourier: Callable[[np.ndarray], np.ndarray]
    direct: Optional[Callable[[np.ndarray], np.ndarray]] = None

    __test__ = False

    @classmethod
    def gaussian_density(cls, variance: float) -> 'TestFunction':
        """g = density of N(0, variance)"""
        return cls(
            name=f"gauss({variance:g})",
            fourier=lambda s: np.exp(-0.5 * variance * s ** 2) / (2.0 * np.pi),
            direct=lambda x: np.exp(-0.5 * x ** 2 / variance) / np.sqrt(2.0 * np.pi * variance),
        )

    @classmethod
    def wide_gaussian(cls, width: float) -> 'TestFunction':
        """g = exp(−x²/(2·width²)), approaching the constant 1 as width grows"""
        return cls(
            name=f"wide({width:g})",
            fourier=lambda s: width / np.sqrt(2.0 * np.pi) * np.exp(-0.5 * (width * s) ** 2),
            direct=lambda x: np.exp(-0.5 * (x / width) ** 2),
        )


@dataclass
class ExpectationResult:
    value: complex
    radii: List[float]
    nodes: int
    cross_check: Optional[complex] = None

    @property
    def discrepancy(self) -> Optional[float]:
        if self.cross_check is None:
            return None
        return float(abs(self.value - self.cross_check))


_SCAN = np.concatenate([-np.logspace(6, -6, 1201), [0.0], np.logspace(-6, 6, 1201)])


def integration_radius(test: TestFunction, variance: float, tolerance: float = QUADRATURE_TOLERANCE) -> float:
    """Radius beyond which (1+|s|)⁴|ĝ(s)|·e^{−variance·s²/2} is negligible"""
    weighted = (1.0 + np.abs(_SCAN)) ** 4 * np.abs(test.fourier(_SCAN))
    if not np.all(np.isfinite(weighted)):
        raise PreconditionError(f"Fourier transform of '{test.name}' is not finite")
    peak = float(np.max(weighted))
    if peak == 0.0:
        raise PreconditionError(f"Fourier transform of '{test.name}' vanishes")
    if weighted[0] > tolerance * peak or weighted[-1] > tolerance * peak:
        raise PreconditionError(f"Fourier transform of '{test.name}' is not integrable "
                                f"with weight (1+|s|)^4")
    significant = np.abs(_SCAN[weighted > tolerance * peak])
    radius = float(np.max(significant))
    if variance > 0:
        radius = min(radius, float(np.sqrt(2.0 * np.log(1.0 / tolerance) / variance)))
    return max(radius, 1e-12)


def multivariate_expectation(source: Union[CovarianceReport, np.ndarray], tests: Sequence[TestFunction],
                             nodes: Optional[int] = None, cross_check: bool = True) -> ExpectationResult:
    """
    E[g₁(X₁)…g_k(X_k)] for X ~ N(0, Σ) as ∫ĝ₁(s₁)…ĝ_k(s_k) e^{−½sᵀΣs} ds.

    The s-integral uses tensor Gauss–Legendre quadrature on per-axis radii; for k ≤ 2 and
    real Σ it is cross-checked on the x side by Gauss–Hermite quadrature.
    """
    report = source if isinstance(source, CovarianceReport) else covariance_from_matrix(source)
    report.require_invertible()
    sigma = report.sigma
    k = sigma.shape[0]
    if len(tests) != k:
        raise StructuralError(f"{len(tests)} test functions for a {k}x{k} covariance")
    if np.min(np.linalg.eigvalsh(0.5 * (sigma.real + sigma.real.T))) < -1e-12 * np.max(np.abs(sigma)):
        raise PreconditionError("Covariance real part is not positive semidefinite")

    nodes = nodes if nodes is not None else max(24, int(round(1.0e6 ** (1.0 / k))) if k > 2 else 400)
    base_x, base_w = np.polynomial.legendre.leggauss(nodes)
    radii, axes, weights = [], [], []
    for j, test in enumerate(tests):
        radius = integration_radius(test, float(sigma[j, j].real))
        radii.append(radius)
        axes.append(radius * base_x)
        weights.append(radius * base_w * test.fourier(radius * base_x))

    grids = np.meshgrid(*axes, indexing='ij')
    points = np.stack([g.ravel() for g in grids], axis=1)
    quadratic = np.einsum('ni,ij,nj->n', points, sigma, points)
    weight_grids = np.meshgrid(*weights, indexing='ij')
    weight = np.prod(np.stack([g.ravel() for g in weight_grids], axis=0), axis=0)
    value = complex(np.sum(weight * np.exp(-0.5 * quadratic)))

    result = ExpectationResult(value=value, radii=radii, nodes=nodes)
    real_sigma = np.max(np.abs(sigma.imag)) <= 1e-12 * max(1.0, np.max(np.abs(sigma)))
    if cross_check and k <= 2 and real_sigma and all(t.direct is not None for t in tests):
        result.cross_check = _position_side(sigma.real, tests)
        logger.debug(f"Gaussian expectation cross-check discrepancy {result.discrepancy:.3e}")
    return result


def _position_side(sigma: np.ndarray, tests: Sequence[TestFunction], nodes: int = 80) -> complex:
    """π^{−k/2} Σ w g(√2 L z) with Σ = LLᵀ"""
    k = sigma.shape[0]
    chol = np.linalg.cholesky(sigma)
    z, w = np.polynomial.hermite.hermgauss(nodes)
    grids = np.meshgrid(*([z] * k), indexing='ij')
    wgrid = np.meshgrid(*([w] * k), indexing='ij')
    points = np.stack([g.ravel() for g in grids], axis=1)
    weight = np.prod(np.stack([g.ravel() for g in wgrid], axis=1), axis=1)
    x = np.sqrt(2.0) * points @ chol.T
    values = np.ones(points.shape[0], dtype=complex)
    for j, test in enumerate(tests):
        values = values * test.direct(x[:, j])
    return complex(np.sum(weight * values) / np.pi ** (k / 2.0))


def covariance_from_matrix(sigma: np.ndarray, t: float = 0.0) -> CovarianceReport:
    """Wrap a given covariance matrix in a report without fluctuation vectors"""
    sigma = np.atleast_2d(np.asarray(sigma, dtype=complex))
    condition = float(np.linalg.cond(sigma)) if np.any(sigma) else float("inf")
    report = CovarianceReport(
        t=t, names=[f"O{j + 1}" for j in range(sigma.shape[0])], vectors=[], sigma=sigma,
        norms=np.sqrt(np.abs(np.diag(sigma))), determinant=complex(np.linalg.det(sigma)),
        condition_number=condition, hermiticity_defect=float(np.linalg.norm(sigma - sigma.conj().T)),
    )
    if np.isfinite(condition) and condition < SINGULAR_CONDITION:
        report.inverse = np.linalg.inv(sigma)
    return report

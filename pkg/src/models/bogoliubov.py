"""
Bogoliubov Dynamics Models
Assembles the quadratic fluctuation generator from a kernel family, brings it into the
canonical form (h, P, c) and propagates the induced Bogoliubov pair (U, V)
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
from loguru import logger

from .base import PreconditionError, PropagationFailureError, StructuralError, TimeSeries
from .grid import (
    GridFunction, Kernel, Lattice, apply_multiplier_rows, displacement_lengths,
    free_flow_multiplier, gradient, gradient_matrices, laplacian, laplacian_matrix,
    midpoint_samples, refine,
)
from .kernels import KernelBuilder, KernelFamily

TERM_KINDS = ("+-", "++", "--", "scalar")
SCHEMES = ("cayley", "rk2")
SYMPLECTIC_TOLERANCE = 1e-6
HERMITICITY_TOLERANCE = 1e-10
SERIES_COLUMNS = ["t", "V_hs_sq", "sympl_defect", "U_opnorm", "intertwining_defect"]


# ============================================================================
# Generator terms
# ============================================================================

@dataclass
class GeneratorTerm:
    """
    One bilinear term Σ_{x,y} K_xy op(A_x) op(B_y) in operator-matrix form.

    A_x and B_x are the columns of `left` and `right`; kind "+-" means a*(A_x)a(B_y),
    "++" means a*(A_x)a*(B_y), "--" means a(A_x)a(B_y). A "scalar" term carries its
    value in `value`. With `hc` the Hermitian conjugate is added as well.
    """

    kind: str
    left: Optional[np.ndarray] = None
    middle: Optional[np.ndarray] = None
    right: Optional[np.ndarray] = None
    hc: bool = False
    label: str = ""
    value: complex = 0.0

    def __post_init__(self):
        if self.kind not in TERM_KINDS:
            raise StructuralError(f"Unknown generator term kind '{self.kind}'")
        if self.kind != "scalar":
            if self.left is None or self.middle is None or self.right is None:
                raise StructuralError(f"Term '{self.label}' needs left, middle and right matrices")
            if self.left.shape[1] != self.middle.shape[0] or self.middle.shape[1] != self.right.shape[1]:
                raise StructuralError(
                    f"Term '{self.label}' has incompatible shapes "
                    f"{self.left.shape}, {self.middle.shape}, {self.right.shape}"
                )

    def coefficient(self) -> np.ndarray:
        """Coefficient matrix of the term without its conjugate"""
        if self.kind == "+-":
            return self.left @ self.middle @ self.right.conj().T
        if self.kind == "++":
            return self.left @ self.middle @ self.right.T
        if self.kind == "--":
            return self.left.conj() @ self.middle @ self.right.conj().T
        raise StructuralError("Scalar terms have no coefficient matrix")


@dataclass
class GeneratorInputs:
    """Operator matrices entering the fluctuation generator at one time"""

    t: float
    lattice: Lattice
    b0: float
    ch: np.ndarray
    sh: np.ndarray
    eta: np.ndarray
    eta_dot: np.ndarray
    density: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    phi: np.ndarray
    phi_cubed: np.ndarray
    quartic: float
    pair_window: np.ndarray
    lap_p: np.ndarray
    lap_r: np.ndarray
    lap_mu: np.ndarray
    k: np.ndarray
    grad_k: Tuple[np.ndarray, ...]
    r: np.ndarray
    omega_laplace: np.ndarray
    omega_gradient: np.ndarray


def _midpoint_product(first: List[GridFunction], second: List[GridFunction], lattice: Lattice) -> np.ndarray:
    fine = sum(refine(f, 2) * refine(g, 2) for f, g in zip(first, second))
    return midpoint_samples(fine, lattice)


def generator_inputs(family: KernelFamily, ell: float, b0: float) -> GeneratorInputs:
    """Collect every operator matrix the term list needs from a complete family"""
    family.require_complete()
    if family.profile is None:
        raise StructuralError("Kernel family carries no correlation profile")
    lattice = family.lattice
    dv = lattice.cell_volume
    phi = family.phi
    lap = laplacian_matrix(lattice)

    omega = family.profile.values(lattice)
    phi_laplace = _midpoint_product([phi], [laplacian(phi)], lattice)
    phi_gradient = _midpoint_product(gradient(phi), gradient(phi), lattice)

    phi2_mid = midpoint_samples(refine(phi, 2) ** 2, lattice)
    window = (displacement_lengths(lattice) <= ell).astype(float)
    lambda_scale = 3.0 * b0 / (8.0 * np.pi * ell ** 3)

    k_matrix = family.k.matrix
    return GeneratorInputs(
        t=family.t,
        lattice=lattice,
        b0=b0,
        ch=family.ch.matrix,
        sh=family.sh.matrix,
        eta=family.eta.matrix,
        eta_dot=family.eta_dot.matrix,
        density=np.diag(b0 * np.abs(phi.values) ** 2).astype(complex),
        k1=family.k1.matrix,
        k2=family.k2.matrix,
        phi=phi.coefficients().reshape(-1, 1),
        phi_cubed=GridFunction(lattice, np.abs(phi.values) ** 2 * phi.values).coefficients().reshape(-1, 1),
        quartic=b0 * dv * float(np.sum(np.abs(phi.values) ** 4)),
        pair_window=dv * lambda_scale * window * phi2_mid,
        lap_p=family.p.matrix @ lap,
        lap_r=family.r.matrix @ lap,
        lap_mu=family.mu.matrix @ lap,
        k=k_matrix,
        grad_k=tuple(k_matrix @ d.T for d in gradient_matrices(lattice)),
        r=family.r.matrix,
        omega_laplace=0.5 * dv * omega * phi_laplace,
        omega_gradient=0.5 * dv * omega * phi_gradient,
    )


def pairing_flow_matrix(eta: np.ndarray) -> np.ndarray:
    """BdG matrix of i·B for B = ½Σ (η_xy a_x a_y − conj(η_xy) a_x* a_y*)"""
    zero = np.zeros_like(eta, dtype=complex)
    return np.block([[zero, -np.conj(eta)], [-eta, zero]])


def time_derivative_coefficients(eta: np.ndarray, eta_dot: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    One-body and pairing matrices (h, P) of (i∂ₜT)T* for T = exp(B(η)).

    T is the time-one propagator of i·B, so its pair map is Θ = exp(𝒜_B(η)) and the
    generator of t ↦ T has BdG matrix Θ⁻¹∂ₜΘ. The derivative is the Fréchet derivative
    of the exponential along 𝒜_B(∂ₜη). The c-number of (i∂ₜT)T* is a global phase and
    is dropped.
    """
    size = eta.shape[0]
    theta, dtheta = scipy.linalg.expm_frechet(pairing_flow_matrix(eta), pairing_flow_matrix(eta_dot))
    flow = np.linalg.solve(theta, dtheta)
    h = -1j * flow[:size, :size]
    pairing = 0.5j * flow[:size, size:]
    return 0.5 * (h + h.conj().T), _symmetrize(pairing)


def time_derivative_terms(eta: np.ndarray, eta_dot: np.ndarray) -> List[GeneratorTerm]:
    h, pairing = time_derivative_coefficients(eta, eta_dot)
    eye = np.eye(eta.shape[0], dtype=complex)
    return [
        GeneratorTerm("+-", eye, h, eye, label="time_derivative"),
        GeneratorTerm("++", eye, pairing, eye, hc=True, label="time_derivative"),
    ]


def generator_terms(inputs: GeneratorInputs) -> List[GeneratorTerm]:
    """The fluctuation generator minus the kinetic energy as an explicit term list"""
    ch, sh = inputs.ch, inputs.sh
    w, k1, k2 = inputs.density, inputs.k1, inputs.k2
    eye = np.eye(ch.shape[0], dtype=complex)
    T = GeneratorTerm

    # (i∂_t T) T*
    terms = time_derivative_terms(inputs.eta, inputs.eta_dot)
    terms += [
        # contact interaction with the condensate density
        T("+-", ch, w, ch, label="V1"),
        T("+-", sh, w, sh, label="V1"),
        T("++", ch, w, sh, label="V1"),
        T("--", ch, w, sh, label="V1"),
        # projected mean-field kernels
        T("+-", ch, k1, ch, label="V2"),
        T("+-", sh, k1, sh, label="V2"),
        T("++", ch, k1, sh, label="V2"),
        T("--", sh, k1, ch, label="V2"),
        T("+-", ch, k2, sh, hc=True, label="V3"),
        T("+-", ch, k2.T, sh, hc=True, label="V3"),
        T("++", ch, k2, ch, hc=True, label="V3"),
        T("--", sh, k2, sh, hc=True, label="V3"),
        # rank-two condensate corrections
        T("+-", inputs.phi, np.array([[0.5 * inputs.quartic]]), inputs.phi, hc=True, label="V4"),
        T("+-", inputs.phi, np.array([[-inputs.b0]]), inputs.phi_cubed, hc=True, label="V4"),
        # scattering eigenvalue pairing
        T("++", eye, inputs.pair_window, eye, hc=True, label="lambda"),
        # kinetic corrections
        T("+-", eye, eye, inputs.lap_p, label="kinetic"),
        T("+-", inputs.lap_p, eye, ch, label="kinetic"),
        T("+-", inputs.k, eye, inputs.lap_r, label="kinetic"),
        T("+-", inputs.lap_r, eye, inputs.r, label="kinetic"),
        T("++", eye, eye, inputs.lap_mu, label="kinetic"),
        T("++", eye, eye, inputs.lap_r, label="kinetic"),
        T("++", inputs.lap_p, eye, sh, label="kinetic"),
        T("--", inputs.lap_r, eye, eye, label="kinetic"),
        T("--", inputs.lap_mu, eye, eye, label="kinetic"),
        T("--", sh, eye, inputs.lap_p, label="kinetic"),
        T("+-", inputs.lap_r, eye, inputs.k, label="kinetic"),
        T("++", eye, inputs.omega_laplace, eye, hc=True, label="kinetic"),
        T("++", eye, inputs.omega_gradient, eye, hc=True, label="kinetic"),
    ]
    terms.extend(T("+-", g, eye, g, label="kinetic") for g in inputs.grad_k)
    return terms


# ============================================================================
# Canonical form
# ============================================================================

@dataclass
class QuadraticGenerator:
    """
    G = K + Σ h_ij a_i*a_j + Σ (P_ij a_i*a_j* + conj(P_ij) a_i a_j) + c

    `one_body` and `pairing` are operator matrices; the kinetic energy K is kept
    implicit when `kinetic` is set and must then be applied spectrally on `lattice`.
    """

    t: float
    one_body: np.ndarray
    pairing: np.ndarray
    scalar: complex = 0.0
    lattice: Optional[Lattice] = None
    kinetic: bool = False
    hermiticity_defect: float = 0.0
    parts: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def constant(cls, one_body: np.ndarray, pairing: np.ndarray, scalar: complex = 0.0,
                 t: float = 0.0) -> 'QuadraticGenerator':
        """Generator on abstract modes, kinetic energy included in `one_body`"""
        one_body = np.asarray(one_body, dtype=complex)
        pairing = np.asarray(pairing, dtype=complex)
        if one_body.shape != pairing.shape or one_body.shape[0] != one_body.shape[1]:
            raise StructuralError(f"Coefficient shapes {one_body.shape} and {pairing.shape} do not match")
        if np.linalg.norm(one_body - one_body.conj().T) > HERMITICITY_TOLERANCE:
            raise PreconditionError("One-body coefficient must be self-adjoint")
        if np.linalg.norm(pairing - pairing.T) > HERMITICITY_TOLERANCE:
            raise PreconditionError("Pairing coefficient must be symmetric")
        return cls(t=t, one_body=one_body, pairing=pairing, scalar=scalar)

    @property
    def size(self) -> int:
        return self.one_body.shape[0]

    @property
    def h1(self) -> Kernel:
        self._require_lattice()
        return Kernel.from_matrix(self.lattice, self.one_body)

    @property
    def h2(self) -> Kernel:
        self._require_lattice()
        return Kernel.from_matrix(self.lattice, self.pairing)

    def full_one_body(self) -> np.ndarray:
        """h including the kinetic energy"""
        if self.kinetic:
            self._require_lattice()
            return self.one_body + laplacian_matrix(self.lattice)
        return self.one_body

    def bdg_matrix(self, include_kinetic: bool = True) -> np.ndarray:
        """𝒜 = i[[h, −2P], [2 conj(P), −conj(h)]]"""
        h = self.full_one_body() if include_kinetic else self.one_body
        p = self.pairing
        return 1j * np.block([[h, -2.0 * p], [2.0 * p.conj(), -h.conj()]])

    def average(self, other: 'QuadraticGenerator') -> 'QuadraticGenerator':
        if self.one_body.shape != other.one_body.shape or self.kinetic != other.kinetic:
            raise StructuralError("Cannot average generators of different structure")
        return QuadraticGenerator(
            t=0.5 * (self.t + other.t),
            one_body=0.5 * (self.one_body + other.one_body),
            pairing=0.5 * (self.pairing + other.pairing),
            scalar=0.5 * (self.scalar + other.scalar),
            lattice=self.lattice,
            kinetic=self.kinetic,
            hermiticity_defect=max(self.hermiticity_defect, other.hermiticity_defect),
        )

    def _require_lattice(self) -> None:
        if self.lattice is None:
            raise StructuralError("Generator lives on abstract modes and has no lattice")


def normal_order(terms: List[GeneratorTerm], size: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, complex]:
    """
    Accumulate a term list into (h, Q, R, c) with G = Σh a*a + ΣQ a*a* + ΣR aa + c.

    All supported kinds are already normal ordered, so no commutator scalars arise.
    """
    h = np.zeros((size, size), dtype=complex)
    q = np.zeros((size, size), dtype=complex)
    r = np.zeros((size, size), dtype=complex)
    c = 0.0 + 0.0j
    for term in terms:
        if term.kind == "scalar":
            c += term.value + (np.conj(term.value) if term.hc else 0.0)
            continue
        coeff = term.coefficient()
        if coeff.shape != (size, size):
            raise StructuralError(f"Term '{term.label}' has shape {coeff.shape}, expected {(size, size)}")
        if term.kind == "+-":
            h += coeff
            if term.hc:
                h += coeff.conj().T
        elif term.kind == "++":
            q += coeff
            if term.hc:
                r += coeff.conj().T
        else:
            r += coeff
            if term.hc:
                q += coeff.conj().T
    return h, q, r, c


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def canonical_form(h: np.ndarray, q: np.ndarray, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    """Self-adjoint part (h₁, P) of a normal-ordered quadratic form and its defect"""
    q_sym = _symmetrize(q)
    r_sym = _symmetrize(r)
    defect = float(np.linalg.norm(h - h.conj().T) + np.linalg.norm(q_sym - r_sym.conj()))
    h1 = 0.5 * (h + h.conj().T)
    pairing = 0.5 * (q_sym + r_sym.conj())
    return h1, pairing, defect


def assemble_generator(family: KernelFamily, phi: GridFunction, ell: float, b0: float,
                       t: Optional[float] = None) -> QuadraticGenerator:
    """Fluctuation generator at the family's time in canonical form"""
    if t is not None and abs(t - family.t) > 1e-12 * max(1.0, abs(t)):
        raise StructuralError(f"Family time {family.t} does not match requested time {t}")
    if phi.lattice != family.lattice:
        raise StructuralError("Condensate and kernel family live on different lattices")
    inputs = generator_inputs(family, ell, b0)
    terms = generator_terms(inputs)
    size = family.lattice.size
    h, q, r, c = normal_order(terms, size)
    h1, pairing, defect = canonical_form(h, q, r)

    parts: Dict[str, float] = {}
    for label in sorted({term.label for term in terms if term.kind != "scalar"}):
        group = [term for term in terms if term.label == label]
        gh, gq, gr, _ = normal_order(group, size)
        parts[label] = float(np.linalg.norm(gh, 2) + np.linalg.norm(_symmetrize(gq)))

    if defect > HERMITICITY_TOLERANCE * max(1.0, np.linalg.norm(h)):
        logger.warning(f"Generator at t={family.t:g} has hermiticity defect {defect:.3e}; "
                       f"using its self-adjoint part")
    generator = QuadraticGenerator(
        t=family.t, one_body=h1, pairing=pairing, scalar=c, lattice=family.lattice,
        kinetic=True, hermiticity_defect=defect, parts=parts,
    )
    logger.debug(f"Assembled generator t={family.t:g}: |h1|_op={np.linalg.norm(h1, 2):.4g}, "
                 f"|P|_HS={np.linalg.norm(pairing):.4g}")
    return generator


class TrajectoryGenerators:
    """Generator source along a condensate trajectory, assembled at snapshot times"""

    def __init__(self, builder: KernelBuilder, ell: float, b0: float):
        self.builder = builder
        self.ell = ell
        self.b0 = b0
        self.hermiticity_defects: List[float] = []
        self.last_family: Optional[KernelFamily] = None

    def __call__(self, t: float) -> QuadraticGenerator:
        index = self.builder.trajectory.index_of(t)
        family = self.builder.family_at(index)
        self.last_family = family
        generator = assemble_generator(family, family.phi, self.ell, self.b0)
        self.hermiticity_defects.append(generator.hermiticity_defect)
        return generator


# ============================================================================
# Bogoliubov pairs
# ============================================================================

@dataclass
class BogoliubovPair:
    """Θ(t;s) = [[U, conj(V)], [V, conj(U)]] stored through its first column blocks"""

    t: float
    s: float
    u: np.ndarray
    v: np.ndarray
    lattice: Optional[Lattice] = None

    @classmethod
    def identity(cls, size: int, s: float = 0.0, lattice: Optional[Lattice] = None) -> 'BogoliubovPair':
        return cls(t=s, s=s, u=np.eye(size, dtype=complex), v=np.zeros((size, size), dtype=complex),
                   lattice=lattice)

    @property
    def size(self) -> int:
        return self.u.shape[0]

    @property
    def U(self) -> Kernel:
        self._require_lattice()
        return Kernel.from_matrix(self.lattice, self.u)

    @property
    def V(self) -> Kernel:
        self._require_lattice()
        return Kernel.from_matrix(self.lattice, self.v)

    def theta(self) -> np.ndarray:
        return np.block([[self.u, self.v.conj()], [self.v, self.u.conj()]])

    @classmethod
    def from_theta(cls, theta: np.ndarray, t: float, s: float,
                   lattice: Optional[Lattice] = None) -> 'BogoliubovPair':
        size = theta.shape[0] // 2
        return cls(t=t, s=s, u=theta[:size, :size].copy(), v=theta[size:, :size].copy(), lattice=lattice)

    def apply(self, f: np.ndarray, g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Θ(f, g) = (Uf + conj(V)g, Vf + conj(U)g) on mode coefficients"""
        return self.u @ f + self.v.conj() @ g, self.v @ f + self.u.conj() @ g

    def symplectic_defect(self) -> float:
        """‖U†U − V†V − I‖_HS"""
        gram = self.u.conj().T @ self.u - self.v.conj().T @ self.v
        return float(np.linalg.norm(gram - np.eye(self.size)))

    def intertwining_defect(self) -> float:
        """‖U† conj(V) − V† conj(U)‖_HS"""
        cross = self.u.conj().T @ self.v.conj() - self.v.conj().T @ self.u.conj()
        return float(np.linalg.norm(cross))

    def vacuum_number(self) -> float:
        """‖V‖²_HS, the excitation number of the evolved vacuum"""
        return float(np.linalg.norm(self.v) ** 2)

    def u_opnorm(self) -> float:
        return float(np.linalg.norm(self.u, 2))

    def _require_lattice(self) -> None:
        if self.lattice is None:
            raise StructuralError("Pair lives on abstract modes and has no lattice")

    def __repr__(self) -> str:
        return f"<BogoliubovPair(t={self.t:g}, s={self.s:g}, size={self.size})>"


def compose_pairs(first: BogoliubovPair, second: BogoliubovPair) -> BogoliubovPair:
    """Θ(t;s) = Θ(r;s)·Θ(t;r) for first = (r;s) and second = (t;r)"""
    if abs(first.t - second.s) > 1e-12 * max(1.0, abs(first.t)):
        raise StructuralError(f"Cannot compose pairs ending at {first.t} and starting at {second.s}")
    u = first.u @ second.u + first.v.conj() @ second.v
    v = first.v @ second.u + first.u.conj() @ second.v
    return BogoliubovPair(t=second.t, s=first.s, u=u, v=v, lattice=first.lattice)


def resymplectify(pair: BogoliubovPair) -> BogoliubovPair:
    """Polar-type correction Θ ← Θ (SΘ†SΘ)^{−1/2}"""
    size = pair.size
    theta = pair.theta()
    signature = np.diag(np.concatenate([np.ones(size), -np.ones(size)]))
    gram = signature @ theta.conj().T @ signature @ theta
    root = scipy.linalg.sqrtm(gram)
    corrected = theta @ np.linalg.inv(root)
    before = pair.symplectic_defect()
    out = BogoliubovPair.from_theta(corrected, pair.t, pair.s, pair.lattice)
    logger.debug(f"Resymplectified pair at t={pair.t:g}: defect {before:.3e} -> {out.symplectic_defect():.3e}")
    return out


# ============================================================================
# Propagation
# ============================================================================

def _kinetic_half_step(u: np.ndarray, w: np.ndarray, lattice: Lattice, tau: float) -> Tuple[np.ndarray, np.ndarray]:
    multiplier = free_flow_multiplier(lattice, tau)
    return (apply_multiplier_rows(u, lattice, multiplier),
            apply_multiplier_rows(w, lattice, np.conj(multiplier)))


def _interaction_step(u: np.ndarray, w: np.ndarray, generator: QuadraticGenerator,
                      dt: float, scheme: str, include_kinetic: bool) -> Tuple[np.ndarray, np.ndarray]:
    size = u.shape[0]
    a = generator.bdg_matrix(include_kinetic=include_kinetic)
    row = np.hstack([u, w])
    if scheme == "cayley":
        half = 0.5 * dt * a
        eye = np.eye(2 * size)
        lifted = row @ (eye + half)
        row = np.linalg.solve((eye - half).T, lifted.T).T
    else:
        step = row @ a * dt
        row = row + step + 0.5 * (step @ a) * dt
    return row[:, :size], row[:, size:]


def bdg_step(pair: BogoliubovPair, generator: QuadraticGenerator, dt: float,
             scheme: str = "cayley", end_generator: Optional[QuadraticGenerator] = None) -> BogoliubovPair:
    """
    Advance the pair from t to t + dt along dΘ/dt = Θ𝒜(t).

    The interaction part uses the average of `generator` and `end_generator`; a lattice
    generator with implicit kinetic energy is split in Strang fashion around it.
    """
    if scheme not in SCHEMES:
        raise PreconditionError(f"Unknown propagation scheme '{scheme}'")
    if generator.size != pair.size:
        raise StructuralError(f"Generator size {generator.size} does not match pair size {pair.size}")
    midpoint = generator.average(end_generator) if end_generator is not None else generator
    u, w = pair.u, pair.v.conj()
    if midpoint.kinetic:
        lattice = midpoint.lattice
        u, w = _kinetic_half_step(u, w, lattice, 0.5 * dt)
        u, w = _interaction_step(u, w, midpoint, dt, scheme, include_kinetic=False)
        u, w = _kinetic_half_step(u, w, lattice, 0.5 * dt)
    else:
        u, w = _interaction_step(u, w, midpoint, dt, scheme, include_kinetic=True)
    return BogoliubovPair(t=pair.t + dt, s=pair.s, u=u, v=w.conj(), lattice=pair.lattice)


def _record(series: TimeSeries, pair: BogoliubovPair) -> Tuple[float, float]:
    sympl = pair.symplectic_defect()
    inter = pair.intertwining_defect()
    series.append(t=pair.t, V_hs_sq=pair.vacuum_number(), sympl_defect=sympl,
                  U_opnorm=pair.u_opnorm(), intertwining_defect=inter)
    return sympl, inter


def propagate(source: Callable[[float], QuadraticGenerator], s: float, t: float, dt: float,
              scheme: str = "cayley", tolerance: float = SYMPLECTIC_TOLERANCE,
              resymplectify_every: int = 0, record_every: int = 1,
              on_step: Optional[Callable[[BogoliubovPair], None]] = None) -> Tuple[BogoliubovPair, TimeSeries]:
    """
    Propagate Θ(·;s) from s to t with fixed step dt.

    `source(τ)` returns the generator at time τ; it is evaluated once per step endpoint.
    Returns the final pair and a time series of ‖V‖²_HS, the symplectic and intertwining
    defects and ‖U‖_op.
    """
    if not dt > 0:
        raise PreconditionError(f"Propagation step must be positive, got {dt}")
    steps = int(round(abs(t - s) / dt))
    if abs(steps * dt - abs(t - s)) > 1e-9 * max(1.0, abs(t - s)):
        raise PreconditionError(f"Interval [{s}, {t}] is not a multiple of dt={dt}")
    step = dt if t >= s else -dt

    generator = source(s)
    pair = BogoliubovPair.identity(generator.size, s=s, lattice=generator.lattice)
    series = TimeSeries(SERIES_COLUMNS)
    _record(series, pair)

    for n in range(1, steps + 1):
        end_time = s + n * step
        end_generator = source(end_time)
        pair = bdg_step(pair, generator, step, scheme=scheme, end_generator=end_generator)
        pair.t = end_time
        if resymplectify_every and n % resymplectify_every == 0:
            pair = resymplectify(pair)
        generator = end_generator

        sympl = pair.symplectic_defect()
        if sympl > tolerance:
            raise PropagationFailureError(
                f"Symplectic defect {sympl:.3e} exceeds {tolerance:.1e} at t={end_time:g}; "
                f"reduce the time step (dt={dt:g})",
                details={'t': end_time, 'defect': sympl, 'dt': dt},
            )
        if n % record_every == 0 or n == steps:
            _record(series, pair)
        if on_step is not None:
            on_step(pair)

    last = series.last()
    logger.info(f"Propagated Bogoliubov pair over [{s:g}, {t:g}] in {steps} steps ({scheme}); "
                f"|V|^2={last['V_hs_sq']:.6g}, defect={last['sympl_defect']:.2e}")
    return pair, series


def free_pair(lattice: Lattice, t: float, s: float = 0.0) -> BogoliubovPair:
    """Exact pair of the free flow: U = e^{i(t−s)(−Δ)}, V = 0"""
    eye = np.eye(lattice.size, dtype=complex)
    u = apply_multiplier_rows(eye, lattice, free_flow_multiplier(lattice, t - s))
    return BogoliubovPair(t=t, s=s, u=u, v=np.zeros_like(u), lattice=lattice)

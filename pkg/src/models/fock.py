"""
Fock Oracle Models
Exact quantum mechanics on a truncated bosonic Fock space, used as a brute-force
reference for every second-quantized statement of the Bogoliubov layer
"""

from dataclasses import dataclass, field
from math import comb
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from loguru import logger
from scipy.sparse.linalg import norm as sparse_norm

from .base import ConfigurationError, InconclusiveVerdictError, PreconditionError, StructuralError
from .bogoliubov import BogoliubovPair, GeneratorTerm, QuadraticGenerator, propagate

DIMENSION_LIMIT = 20000
LEAKAGE_THRESHOLD = 1e-8
HERMITICITY_TOLERANCE = 1e-10


class FockBasis:
    """Occupation tuples (n_1, …, n_M) with Σn_i ≤ n_max in graded lexicographic order"""

    def __init__(self, modes: int, n_max: int, limit: int = DIMENSION_LIMIT):
        if modes < 1 or n_max < 1:
            raise ConfigurationError(f"Fock basis needs modes >= 1 and n_max >= 1, got {modes}, {n_max}")
        dimension = comb(n_max + modes, modes)
        if dimension > limit:
            raise ConfigurationError(
                f"Fock dimension {dimension} for M={modes}, n_max={n_max} exceeds limit {limit}",
                details={'dimension': dimension, 'limit': limit},
            )
        self.modes = modes
        self.n_max = n_max
        self.states: List[Tuple[int, ...]] = []
        for total in range(n_max + 1):
            self.states.extend(_compositions(total, modes))
        self.index: Dict[Tuple[int, ...], int] = {state: i for i, state in enumerate(self.states)}
        self.totals = np.array([sum(state) for state in self.states])

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def vacuum(self) -> np.ndarray:
        out = np.zeros(self.dimension, dtype=complex)
        out[0] = 1.0
        return out

    def sector(self, total: int) -> np.ndarray:
        return np.flatnonzero(self.totals == total)

    def below(self, total: int) -> np.ndarray:
        """Indices of states with at most `total` excitations"""
        return np.flatnonzero(self.totals <= total)

    def __repr__(self) -> str:
        return f"<FockBasis(M={self.modes}, n_max={self.n_max}, D={self.dimension})>"


def _compositions(total: int, parts: int) -> List[Tuple[int, ...]]:
    if parts == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        out.extend((first,) + rest for rest in _compositions(total - first, parts - 1))
    return out


def build_ccr(basis: FockBasis) -> List[sp.csr_matrix]:
    """Annihilation operators a_i as sparse matrices; a_i* is the matrix adjoint"""
    ladders = []
    for mode in range(basis.modes):
        rows, cols, data = [], [], []
        for col, state in enumerate(basis.states):
            n = state[mode]
            if n == 0:
                continue
            lowered = state[:mode] + (n - 1,) + state[mode + 1:]
            rows.append(basis.index[lowered])
            cols.append(col)
            data.append(np.sqrt(n))
        shape = (basis.dimension, basis.dimension)
        ladders.append(sp.csr_matrix((np.array(data, dtype=complex), (rows, cols)), shape=shape))
    return ladders


@dataclass
class FockOperator:
    """Operator on a truncated Fock space"""

    basis: FockBasis
    matrix: sp.csr_matrix

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def adjoint(self) -> 'FockOperator':
        return FockOperator(self.basis, self.matrix.conj().T.tocsr())

    def hermiticity_defect(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(sparse_norm(diff)) if diff.nnz else 0.0

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def __add__(self, other: 'FockOperator') -> 'FockOperator':
        return FockOperator(self.basis, (self.matrix + other.matrix).tocsr())

    def __sub__(self, other: 'FockOperator') -> 'FockOperator':
        return FockOperator(self.basis, (self.matrix - other.matrix).tocsr())

    def __mul__(self, scalar: complex) -> 'FockOperator':
        return FockOperator(self.basis, (self.matrix * scalar).tocsr())

    __rmul__ = __mul__

    def __matmul__(self, other: 'FockOperator') -> 'FockOperator':
        return FockOperator(self.basis, (self.matrix @ other.matrix).tocsr())


class FockSpace:
    """Truncated Fock space over abstract orthonormal modes with its ladder operators"""

    def __init__(self, modes: int, n_max: int, limit: int = DIMENSION_LIMIT):
        self.basis = FockBasis(modes, n_max, limit)
        self.ladders = build_ccr(self.basis)
        self._identity = sp.identity(self.basis.dimension, dtype=complex, format='csr')
        logger.debug(f"Built {self.basis}")

    @property
    def modes(self) -> int:
        return self.basis.modes

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def _wrap(self, matrix) -> FockOperator:
        return FockOperator(self.basis, sp.csr_matrix(matrix))

    def _check_vector(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=complex).reshape(-1)
        if f.size != self.modes:
            raise StructuralError(f"Mode vector has {f.size} entries, expected {self.modes}")
        return f

    def identity(self) -> FockOperator:
        return self._wrap(self._identity)

    def annihilation(self, f: np.ndarray) -> FockOperator:
        """a(f) = Σ conj(f_i) a_i"""
        f = self._check_vector(f)
        return self._wrap(sum(np.conj(fi) * a for fi, a in zip(f, self.ladders)))

    def creation(self, f: np.ndarray) -> FockOperator:
        """a*(f) = Σ f_i a_i*"""
        return self.annihilation(f).adjoint()

    def field(self, h: np.ndarray) -> FockOperator:
        """φ(h) = a*(h) + a(h)"""
        return self.creation(h) + self.annihilation(h)

    def pair_field(self, f: np.ndarray, g: np.ndarray) -> FockOperator:
        """A(f, g) = a*(f) + a(conj(g))"""
        return self.creation(f) + self.annihilation(np.conj(self._check_vector(g)))

    def number(self) -> FockOperator:
        return self._wrap(sp.diags(self.basis.totals.astype(complex), format='csr'))

    def quadratic(self, h: np.ndarray, q: np.ndarray, r: np.ndarray, c: complex = 0.0) -> FockOperator:
        """Σ h_ij a_i*a_j + Σ q_ij a_i*a_j* + Σ r_ij a_i a_j + c"""
        for name, matrix in (("h", h), ("q", q), ("r", r)):
            if np.shape(matrix) != (self.modes, self.modes):
                raise StructuralError(f"Coefficient {name} has shape {np.shape(matrix)}, "
                                      f"expected {(self.modes, self.modes)}")
        out = c * self._identity
        for i, ai in enumerate(self.ladders):
            ai_star = ai.conj().T
            for j, aj in enumerate(self.ladders):
                aj_star = aj.conj().T
                if h[i, j] != 0:
                    out = out + h[i, j] * (ai_star @ aj)
                if q[i, j] != 0:
                    out = out + q[i, j] * (ai_star @ aj_star)
                if r[i, j] != 0:
                    out = out + r[i, j] * (ai @ aj)
        return self._wrap(out)

    def second_quantize(self, h1: np.ndarray, h2: np.ndarray, c: complex = 0.0) -> FockOperator:
        """Σ h1_ij a_i*a_j + Σ (h2_ij a_i*a_j* + conj(h2_ij) a_i a_j) + c"""
        h2 = np.asarray(h2, dtype=complex)
        return self.quadratic(np.asarray(h1, dtype=complex), h2, h2.conj(), c)

    def from_generator(self, generator: QuadraticGenerator) -> FockOperator:
        if generator.kinetic:
            raise PreconditionError("Fock oracle needs a generator on abstract modes")
        return self.second_quantize(generator.one_body, generator.pairing, generator.scalar)

    def term_operator(self, term: GeneratorTerm) -> FockOperator:
        """Second quantization of one generator term, built directly from a(f), a*(f)"""
        if term.kind == "scalar":
            value = term.value + (np.conj(term.value) if term.hc else 0.0)
            return self.identity() * value
        left_op = self.creation if term.kind in ("+-", "++") else self.annihilation
        right_op = self.creation if term.kind == "++" else self.annihilation
        out = self._wrap(sp.csr_matrix((self.dimension, self.dimension), dtype=complex))
        for x in range(term.middle.shape[0]):
            for y in range(term.middle.shape[1]):
                weight = term.middle[x, y]
                if weight == 0:
                    continue
                out = out + (left_op(term.left[:, x]) @ right_op(term.right[:, y])) * weight
        return out + out.adjoint() if term.hc else out


# ============================================================================
# Exact evolution
# ============================================================================

GeneratorLike = Union[FockOperator, Callable[[float], FockOperator]]


class ExactPropagator:
    """exp(−iGt) for a constant Hermitian G, from a cached eigendecomposition"""

    def __init__(self, generator: FockOperator):
        _require_hermitian(generator)
        self.basis = generator.basis
        dense = generator.dense()
        self.eigenvalues, self.eigenvectors = scipy.linalg.eigh(0.5 * (dense + dense.conj().T))

    def matrix(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * t * self.eigenvalues)
        return (self.eigenvectors * phases) @ self.eigenvectors.conj().T

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        coeffs = self.eigenvectors.conj().T @ psi
        return self.eigenvectors @ (np.exp(-1j * t * self.eigenvalues) * coeffs)


def _require_hermitian(generator: FockOperator) -> None:
    defect = generator.hermiticity_defect()
    scale = max(1.0, float(sparse_norm(generator.matrix)) if generator.matrix.nnz else 1.0)
    if defect > HERMITICITY_TOLERANCE * scale:
        raise PreconditionError(f"Fock generator is not Hermitian (defect {defect:.3e})")


def evolve_exact(generator: GeneratorLike, psi0: np.ndarray, T: float, dt: Optional[float] = None) -> np.ndarray:
    """
    Solve i∂_tψ = G(t)ψ on [0, T].

    A constant generator is exponentiated once; a time-dependent one is stepped with its
    midpoint value and a fresh eigendecomposition per step.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if isinstance(generator, FockOperator):
        return ExactPropagator(generator).apply(psi0, T)
    if dt is None or not dt > 0:
        raise PreconditionError("Time-dependent exact evolution needs a positive dt")
    steps = max(1, int(round(abs(T) / dt)))
    step = T / steps
    psi = psi0.copy()
    for n in range(steps):
        psi = ExactPropagator(generator((n + 0.5) * step)).apply(psi, step)
    logger.debug(f"Exact evolution over {steps} steps, norm drift {abs(np.linalg.norm(psi) - np.linalg.norm(psi0)):.2e}")
    return psi


def sector_weights(basis: FockBasis, psi: np.ndarray) -> np.ndarray:
    """Weight of ψ in each total-occupation sector 0..n_max"""
    weights = np.zeros(basis.n_max + 1)
    np.add.at(weights, basis.totals, np.abs(psi) ** 2)
    return weights


def leakage(basis: FockBasis, psi: np.ndarray) -> float:
    """Weight of ψ in the two highest sectors"""
    weights = sector_weights(basis, psi)
    return float(np.sum(weights[-2:]))


def outside_sector_weight(basis: FockBasis, psi: np.ndarray, total: int) -> float:
    weights = sector_weights(basis, psi)
    return float(np.sum(weights) - weights[total])


def expectation(operator: FockOperator, psi: np.ndarray) -> complex:
    return complex(np.vdot(psi, operator.apply(psi)))


def vacuum_number(space: FockSpace, psi: np.ndarray) -> float:
    """⟨ψ, 𝒩ψ⟩"""
    return float(np.real(expectation(space.number(), psi)))


# ============================================================================
# Verifications
# ============================================================================

@dataclass
class OracleVerdict:
    """Outcome of one oracle comparison"""

    test: str
    modes: int
    n_max: int
    dt: float
    defect: float
    leakage: float
    tolerance: float = 1e-6
    details: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.defect <= self.tolerance)

    def to_dict(self) -> Dict[str, object]:
        return {
            'test': self.test,
            'M': self.modes,
            'n_max': self.n_max,
            'dt': self.dt,
            'defect': self.defect,
            'leakage': self.leakage,
            'pass': self.passed,
        }


def verify_bogoliubov_conjugation(space: FockSpace, pair: BogoliubovPair, propagator: np.ndarray,
                                  f: np.ndarray, g: np.ndarray, test_sector: int = 1,
                                  leakage_threshold: float = LEAKAGE_THRESHOLD) -> Tuple[float, float]:
    """
    ‖𝒰*A(f,g)𝒰 − A(Θ(f,g))‖ on the test states with at most `test_sector` excitations.

    Rows are restricted to sectors below n_max − 1. Returns (defect, leakage) and raises
    InconclusiveVerdictError when the evolved test states reach the top two sectors.
    """
    basis = space.basis
    if propagator.shape != (space.dimension, space.dimension):
        raise StructuralError("Propagator does not act on this Fock space")
    columns = basis.below(test_sector)
    rows = basis.below(basis.n_max - 2)

    evolved = propagator[:, columns]
    worst_leak = max(leakage(basis, evolved[:, i]) for i in range(evolved.shape[1]))
    if worst_leak > leakage_threshold:
        raise InconclusiveVerdictError(
            f"Cutoff leakage {worst_leak:.3e} exceeds {leakage_threshold:.1e}; raise n_max",
            details={'leakage': worst_leak, 'n_max': basis.n_max},
        )

    conjugated = propagator.conj().T @ (space.pair_field(f, g).matrix @ evolved)
    f_new, g_new = pair.apply(f, g)
    expected = space.pair_field(f_new, g_new).dense()[:, columns]
    difference = (conjugated - expected)[rows, :]
    defect = float(np.linalg.norm(difference, 2)) if difference.size else 0.0
    return defect, worst_leak


def characteristic_function_exact(space: FockSpace, psi: np.ndarray, h: np.ndarray, s: float,
                                  leakage_threshold: float = LEAKAGE_THRESHOLD) -> complex:
    """⟨ψ, exp(isφ(h))ψ⟩ by exact exponentiation of the truncated field operator"""
    leak = leakage(space.basis, psi)
    if leak > leakage_threshold:
        raise InconclusiveVerdictError(
            f"State leakage {leak:.3e} exceeds {leakage_threshold:.1e}; raise n_max",
            details={'leakage': leak},
        )
    values, vectors = scipy.linalg.eigh(space.field(h).dense())
    coeffs = vectors.conj().T @ psi
    return complex(np.sum(np.abs(coeffs) ** 2 * np.exp(1j * s * values)))


# ============================================================================
# Matched instances
# ============================================================================

def random_instance(rng: np.random.Generator, modes: int, one_body_scale: float = 1.0,
                    pairing_scale: float = 0.1) -> Tuple[np.ndarray, np.ndarray]:
    """Random self-adjoint h and symmetric P for oracle comparisons"""
    raw = rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes))
    h = one_body_scale * 0.5 * (raw + raw.conj().T)
    raw = rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes))
    p = pairing_scale * 0.5 * (raw + raw.T)
    return h, p


def random_mode_vector(rng: np.random.Generator, modes: int) -> np.ndarray:
    return rng.normal(size=modes) + 1j * rng.normal(size=modes)


def verify_matched_instance(rng: np.random.Generator, modes: int = 2, n_max: int = 14,
                            t: float = 0.5, dt: float = 1e-4, trials: int = 10,
                            pairing_scale: float = 0.1, tolerance: float = 1e-6,
                            test_sector: int = 1, scheme: str = "cayley",
                            leakage_threshold: float = LEAKAGE_THRESHOLD) -> OracleVerdict:
    """
    Propagate a random constant generator with the Bogoliubov integrator and compare the
    conjugation of A(f, g) against the exact Fock evolution for `trials` random (f, g).
    """
    h, p = random_instance(rng, modes, pairing_scale=pairing_scale)
    generator = QuadraticGenerator.constant(h, p)
    pair, series = propagate(lambda _t: generator, 0.0, t, dt, scheme=scheme)

    space = FockSpace(modes, n_max)
    propagator = ExactPropagator(space.from_generator(generator)).matrix(t)

    defects, leaks = [], []
    for _ in range(trials):
        f = random_mode_vector(rng, modes)
        g = random_mode_vector(rng, modes)
        defect, leak = verify_bogoliubov_conjugation(
            space, pair, propagator, f, g, test_sector=test_sector, leakage_threshold=leakage_threshold,
        )
        defects.append(defect)
        leaks.append(leak)

    vacuum = propagator[:, 0]
    number_gap = abs(vacuum_number(space, vacuum) - pair.vacuum_number())
    verdict = OracleVerdict(
        test="bogoliubov_conjugation", modes=modes, n_max=n_max, dt=dt,
        defect=max(defects), leakage=max(leaks), tolerance=tolerance,
        details={'vacuum_number_gap': number_gap, 'sympl_defect': series.last()['sympl_defect']},
    )
    logger.info(f"Oracle conjugation verdict: defect={verdict.defect:.3e}, "
                f"leakage={verdict.leakage:.3e}, pass={verdict.passed}")
    return verdict


def evolved_vacuum(space: FockSpace, generator: QuadraticGenerator, t: float) -> np.ndarray:
    """𝒰(t)Ω for a constant generator"""
    return ExactPropagator(space.from_generator(generator)).apply(space.basis.vacuum, t)


def one_particle_defect(space: FockSpace, propagator: np.ndarray, f: np.ndarray) -> float:
    """Weight of 𝒰*a*(f)𝒰Ω outside the one-particle sector"""
    state = propagator.conj().T @ (space.creation(f).matrix @ propagator[:, 0])
    return outside_sector_weight(space.basis, state, 1)


def sector_changes(operator: FockOperator) -> Sequence[int]:
    """Set of total-occupation changes produced by the operator's nonzero entries"""
    coo = operator.matrix.tocoo()
    totals = operator.basis.totals
    mask = np.abs(coo.data) > 0
    return sorted(set((totals[coo.row[mask]] - totals[coo.col[mask]]).tolist()))

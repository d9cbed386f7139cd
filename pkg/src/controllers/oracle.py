"""
Oracle Controller
Compares the Bogoliubov integrator against exact evolution on a truncated Fock space:
conjugation of pair fields, the quasi-free characteristic function, the vacuum excitation
number and the one-particle sector property
"""

from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from .base import BaseController
from .report import ReportController
from models.bogoliubov import BogoliubovPair, QuadraticGenerator, propagate
from models.clt import transform_mode
from models.fock import (
    ExactPropagator, FockSpace, OracleVerdict, characteristic_function_exact, one_particle_defect,
    random_instance, random_mode_vector, vacuum_number, verify_matched_instance
)
from utils import timed_stage

CHARACTERISTIC_TOLERANCE = 1e-5
CHARACTERISTIC_ARGUMENTS = np.linspace(-2.0, 2.0, 9)


def _check(test: str, defect: float, tolerance: float, **details: Any) -> Dict[str, Any]:
    return {'test': test, 'defect': defect, 'tolerance': tolerance, 'pass': bool(defect <= tolerance),
            **details}


class OracleController(BaseController):
    """Controller for the oracle-verify stage"""

    stage = "oracle"

    def __init__(self, *args, rng: Optional[np.random.Generator] = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.rng = rng if rng is not None else np.random.default_rng(self.settings.seed)
        self.verdict: Optional[OracleVerdict] = None
        self.checks: List[Dict[str, Any]] = []
        self.result: Dict[str, Any] = {}

    @property
    def passed(self) -> bool:
        return bool(self.result.get('pass', False))

    @timed_stage("oracle")
    def run(self, write: bool = True) -> Dict[str, Any]:
        """
        Run every oracle comparison and write oracle.json

        Returns:
            dict: verdict {test, M, n_max, dt, defect, leakage, pass} with the individual checks
        """
        return self.execute_stage(self._run, write)

    def _run(self, write: bool) -> Dict[str, Any]:
        config = self.settings.oracle
        self.verdict = verify_matched_instance(
            self.rng, modes=config.modes, n_max=config.n_max, t=config.t, dt=config.dt,
            trials=config.trials, pairing_scale=config.pairing_scale, tolerance=config.tolerance,
            test_sector=config.test_sector, scheme=self.settings.evolution.scheme,
            leakage_threshold=config.leakage_threshold,
        )
        self.checks = [_check(self.verdict.test, self.verdict.defect, config.tolerance,
                              leakage=self.verdict.leakage)]
        self.checks.extend(self.matched_checks())

        self.result = self.verdict.to_dict()
        self.result['checks'] = self.checks
        self.result['pass'] = all(check['pass'] for check in self.checks)
        for check in self.checks:
            if not check['pass']:
                self.record_warning(f"Oracle check {check['test']} failed: defect {check['defect']:.3e} "
                                    f"above {check['tolerance']:.1e}", "ORACLE")
        if write:
            ReportController(self.settings, self.resources).write_json("oracle", self.result)
        logger.info(f"Oracle verdict: pass={self.result['pass']} over {len(self.checks)} checks")
        return self.result

    def matched_checks(self) -> List[Dict[str, Any]]:
        """Characteristic function, vacuum number and one-particle sector on a fresh instance"""
        config = self.settings.oracle
        h, p = random_instance(self.rng, config.modes, pairing_scale=config.pairing_scale)
        generator = QuadraticGenerator.constant(h, p)
        pair, _ = propagate(lambda _t: generator, 0.0, config.t, config.dt,
                            scheme=self.settings.evolution.scheme)

        space = FockSpace(config.modes, config.n_max, limit=config.dimension_limit)
        propagator = ExactPropagator(space.from_generator(generator)).matrix(config.t)
        psi = propagator[:, 0]

        return [
            self.characteristic_check(space, pair, psi),
            _check("vacuum_number", abs(vacuum_number(space, psi) - pair.vacuum_number()),
                   config.tolerance, V_hs_sq=pair.vacuum_number()),
            self.one_particle_check(space, propagator),
        ]

    def characteristic_check(self, space: FockSpace, pair: BogoliubovPair, psi: np.ndarray) -> Dict[str, Any]:
        config = self.settings.oracle
        mode = random_mode_vector(self.rng, config.modes)
        mode /= np.linalg.norm(mode)
        nu = transform_mode(pair, mode)
        variance = float(np.linalg.norm(nu) ** 2)
        defect = 0.0
        for s in CHARACTERISTIC_ARGUMENTS:
            exact = characteristic_function_exact(space, psi, mode, s,
                                                  leakage_threshold=config.leakage_threshold)
            defect = max(defect, abs(exact - np.exp(-0.5 * s ** 2 * variance)))
        return _check("characteristic_function", defect, CHARACTERISTIC_TOLERANCE, variance=variance)

    def one_particle_check(self, space: FockSpace, propagator: np.ndarray) -> Dict[str, Any]:
        config = self.settings.oracle
        weight = 0.0
        for _ in range(config.trials):
            f = random_mode_vector(self.rng, config.modes)
            weight = max(weight, one_particle_defect(space, propagator, f / np.linalg.norm(f)))
        return _check("one_particle_sector", weight, config.leakage_threshold)

"""
Shared pytest fixtures for the fluctuation toolkit
"""

import sys
from pathlib import Path

import numpy as np
import pytest

SRC_DIR = Path(__file__).resolve().parent.parent / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from config.settings import RunSettings, parse_ini  # noqa: E402
from models.condensate import evolve_nls, gaussian_initial_state  # noqa: E402
from models.grid import Lattice  # noqa: E402
from models.kernels import KernelBuilder, LimitingProfile  # noqa: E402
from models.scattering import Potential  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long parameter sweeps (deselect with -m 'not slow')")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def lattice_1d() -> Lattice:
    return Lattice(d=1, m_axis=32, length=10.0)


@pytest.fixture
def lattice_2d() -> Lattice:
    return Lattice(d=2, m_axis=8, length=6.0)


@pytest.fixture
def bump() -> Potential:
    return Potential(profile="bump", amplitude=1.0, support_radius=1.0, beta=0.5, n_particles=1e4)


@pytest.fixture
def gaussian_1d(lattice_1d):
    return gaussian_initial_state(lattice_1d, width=1.2)


@pytest.fixture
def short_trajectory(gaussian_1d):
    """Cubic NLS trajectory over a few steps on the small 1D lattice"""
    return evolve_nls(gaussian_1d, sigma=1.0, T=0.02, dt=0.005)


@pytest.fixture
def limiting_builder(short_trajectory) -> KernelBuilder:
    profile = LimitingProfile(ell=2.5, b0=0.5)
    return KernelBuilder(short_trajectory, profile, b0=0.5)


@pytest.fixture
def small_settings(tmp_path) -> RunSettings:
    """Desk-scale run configuration writing into a temporary directory"""
    text = f"""
[run]
seed = 7

[lattice]
d = 1
m_axis = 16
length = 8.0

[potential]
n_particles = 10000.0

[scattering]
ell = 2.0
radial_points = 10000

[condensate]
width = 1.0
t_final = 0.01
dt = 0.005

[evolution]
record_every = 1

[observable.window]
kind = window
half_width = 1.5

[oracle]
n_max = 10
t = 0.1
dt = 0.001
trials = 3

[output]
directory = {tmp_path / 'out'}
"""
    return parse_ini(text)

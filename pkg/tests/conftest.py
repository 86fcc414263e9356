from pathlib import Path

import numpy as np
import pytest
import scipy.linalg

from dirac_jump_studio.solvers.linalg import ModelSpec
from dirac_jump_studio.solvers.reflection import DressedSpec
from dirac_jump_studio.solvers.spectral import HardySide, SpectralGrid, gaussian_packet
from dirac_jump_studio.utils.presets import resolve_matrix

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "data" / "configs" / "scenarios"

PAULI_X = resolve_matrix("pauli-x", 2)
PAULI_Z = resolve_matrix("pauli-z", 2)
ETA = np.array([0.8, 0.6], dtype=complex)


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture
def toy_grid() -> SpectralGrid:
    return SpectralGrid(16.0, 1024)


@pytest.fixture
def toy_model() -> ModelSpec:
    return ModelSpec(PAULI_Z, PAULI_X, np.zeros((2, 2)))


@pytest.fixture
def toy_packet(toy_grid):
    return gaussian_packet(toy_grid, 6.0, 1.0, 1.5, ETA)


@pytest.fixture
def reflect_grid() -> SpectralGrid:
    return SpectralGrid(32.0, 1024)


@pytest.fixture
def reflect_spec() -> DressedSpec:
    return DressedSpec(ModelSpec([[0.0]], [[1j]], [[1.0]]))


@pytest.fixture
def reflect_packet(reflect_grid):
    return gaussian_packet(reflect_grid, 4.0, 2.0, -3.0, np.ones(1), side=HardySide.MINUS)


@pytest.fixture
def sweep_grid() -> SpectralGrid:
    return SpectralGrid(64.0, 2048)


@pytest.fixture
def sweep_spec() -> DressedSpec:
    return DressedSpec(ModelSpec([[0.0]], [[-1.0]], [[1.0]], mass_bound=1.0))


@pytest.fixture
def sweep_packet(sweep_grid):
    return gaussian_packet(sweep_grid, 0.0, 8.0, 4.0, np.ones(1), side=HardySide.MINUS, cutoff=5.0)


def dense_mode_operator(grid: SpectralGrid, blocks: np.ndarray) -> np.ndarray:
    """Σ_m |e_m⟩⟨e_m| ⊗ B_m, e_m(z_j) = e^{ik_m z_j}/√N, 作用于按 (j, a) 展平的样本"""
    modes = np.exp(1j * np.outer(grid.z, grid.momenta)) / np.sqrt(grid.points)
    dim = blocks.shape[-1]
    dense = np.einsum("jm,lm,mab->jalb", modes, np.conj(modes), blocks)
    return dense.reshape(grid.points * dim, grid.points * dim)


def dense_pointwise(matrices: np.ndarray) -> np.ndarray:
    """逐点矩阵 M(z_j) 的块对角形式"""
    return scipy.linalg.block_diag(*matrices)


def dense_energy_exponential(grid: SpectralGrid, mass: np.ndarray, t: float, shift: float = 0.0, sign: float = 1.0):
    """逐模式 e^{−it(ε(shift + sign·k) − shift)}, ε(k) = sqrtm(k² + μ²)"""
    mass = np.asarray(mass, dtype=complex)
    identity = np.eye(mass.shape[0])
    blocks = []
    for k in grid.momenta:
        energy = scipy.linalg.sqrtm((shift + sign * k) ** 2 * identity + mass @ mass) - shift * identity
        blocks.append(scipy.linalg.expm(-1j * t * energy))
    return np.array(blocks)


def random_values(grid: SpectralGrid, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((grid.points, dim)) + 1j * rng.standard_normal((grid.points, dim))

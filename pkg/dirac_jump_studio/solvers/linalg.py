"""
内部空间 𝔥 = ℂⁿ 上的稠密线性代数

约定 ħ = 1, 哈密顿量以频率 ϰ = H/ħ 存储。矩阵函数一律通过完整的厄米特征分解计算。
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Callable, List, Optional, Tuple

import numpy as np
import scipy.linalg

from ..configs.config import config
from ..exceptions import NonHermitianInput, ShapeMismatch

if TYPE_CHECKING:
    from .spectral import SpectralGrid


def operator_norm(matrix: np.ndarray) -> float:
    """谱范数 (最大奇异值)"""
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0.0
    return float(np.linalg.norm(matrix, 2))


def hermitian_defect(matrix: np.ndarray) -> float:
    return operator_norm(matrix - np.conj(matrix).T)


def as_square(matrix, name: str = "A") -> np.ndarray:
    array = np.array(matrix, dtype=complex)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise ShapeMismatch(f"{name} 必须是方阵, 实际形状 {array.shape}")
    return array


def ensure_hermitian(matrix, name: str = "A") -> np.ndarray:
    """校验厄米性, 返回对称化后的矩阵

    Raises:
        NonHermitianInput: ‖A − A†‖ > HERMITIAN_RTOL·‖A‖
    """
    array = as_square(matrix, name)
    defect = hermitian_defect(array)
    if defect > config.NUMERICS.HERMITIAN_RTOL * operator_norm(array):
        raise NonHermitianInput(name, defect)
    return (array + np.conj(array).T) / 2


def _eigh(matrix, name: str) -> Tuple[np.ndarray, np.ndarray]:
    return scipy.linalg.eigh(ensure_hermitian(matrix, name))


def evolve(matrix, t: float) -> np.ndarray:
    """返回 e^{−itA}"""
    values, vectors = _eigh(matrix, "A")
    return (vectors * np.exp(-1j * t * values)) @ np.conj(vectors).T


def evolve_batch(matrix, times) -> np.ndarray:
    """对一组时间批量计算 e^{−itA}, 返回形状 (T, n, n)"""
    values, vectors = _eigh(matrix, "A")
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), values))
    return np.einsum("ij,tj,kj->tik", vectors, phases, np.conj(vectors))


def hermitian_function(matrix, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """通过特征分解计算 f(A), f 作用在实特征值数组上"""
    values, vectors = _eigh(matrix, "A")
    mapped = np.asarray(func(values), dtype=float)
    return (vectors * mapped) @ np.conj(vectors).T


def unitary_power(unitary: np.ndarray, power: int) -> np.ndarray:
    """幺正矩阵的整数次幂, 负幂用 U†"""
    if power >= 0:
        return np.linalg.matrix_power(unitary, power)
    return np.linalg.matrix_power(np.conj(unitary).T, -power)


def apply_matrices(matrices: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """逐点矩阵乘向量: (N, n, n) × (N, n) → (N, n)"""
    return np.einsum("jab,jb->ja", matrices, vectors)


def dagger(matrices: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(matrices, -1, -2))


@dataclass(frozen=True)
class InternalSpace:
    """内部空间 ℂⁿ, 带标准基下的逐项复共轭"""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ShapeMismatch(f"内部空间维度必须为正, 实际 {self.n}")

    def conj(self, vector) -> np.ndarray:
        return np.conj(np.asarray(vector, dtype=complex))

    def check_vector(self, vector) -> np.ndarray:
        array = np.asarray(vector, dtype=complex)
        if array.shape[-1] != self.n:
            raise ShapeMismatch(f"向量最后一维应为 {self.n}, 实际形状 {array.shape}")
        return array


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """有限维模型: 频率 ϰ, 跃迁幺正 σ, 质量算子 μ 以及界 m ≥ ‖μ‖"""

    kappa_op: np.ndarray
    sigma: np.ndarray
    mass_op: np.ndarray
    mass_bound: Optional[float] = None

    def __post_init__(self):
        kappa = as_square(self.kappa_op, "kappa_op")
        sigma = as_square(self.sigma, "sigma")
        mass = as_square(self.mass_op, "mass_op")
        if not (kappa.shape == sigma.shape == mass.shape):
            raise ShapeMismatch(
                f"ϰ, σ, μ 形状不一致: {kappa.shape}, {sigma.shape}, {mass.shape}",
            )
        for array in (kappa, sigma, mass):
            array.setflags(write=False)
        object.__setattr__(self, "kappa_op", kappa)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "mass_op", mass)
        if self.mass_bound is None:
            object.__setattr__(self, "mass_bound", operator_norm(mass))
        elif self.mass_bound < 0:
            raise ValueError(f"质量界 m 必须非负, 实际 {self.mass_bound}")

    @property
    def dim(self) -> int:
        return self.kappa_op.shape[0]

    @property
    def space(self) -> InternalSpace:
        return InternalSpace(self.dim)

    @cached_property
    def _mass_squared_spectrum(self) -> Tuple[np.ndarray, np.ndarray]:
        hermitian_mass = (self.mass_op + np.conj(self.mass_op).T) / 2
        values, vectors = scipy.linalg.eigh(hermitian_mass @ hermitian_mass)
        return np.clip(values, 0.0, None), vectors

    @property
    def mass_squared_eigenvalues(self) -> np.ndarray:
        return self._mass_squared_spectrum[0]

    def energy(self, momenta) -> np.ndarray:
        """相对论质量算子函数 ε(k) = (k² + μ²)^{1/2}, 返回 (K, n, n)"""
        values, vectors = self._mass_squared_spectrum
        momenta = np.atleast_1d(np.asarray(momenta, dtype=float))
        spectrum = np.sqrt(momenta[:, None] ** 2 + values[None, :])
        return np.einsum("ij,kj,lj->kil", vectors, spectrum, np.conj(vectors))

    def jump_operators(self, points, kappa: Optional[np.ndarray] = None) -> np.ndarray:
        """S(z) = e^{izϰ} σ e^{−izϰ}, 返回 (Z, n, n)"""
        generator = self.kappa_op if kappa is None else kappa
        forward = evolve_batch(generator, -np.asarray(points, dtype=float))
        return forward @ self.sigma @ dagger(forward)

    def with_mass(self, mass_op, mass_bound: Optional[float] = None) -> "ModelSpec":
        return ModelSpec(self.kappa_op, self.sigma, mass_op, mass_bound)


@dataclass
class InvariantCheck:
    name: str
    passed: bool
    defect: float
    tolerance: float


@dataclass
class ValidationReport:
    """validate_model 的结果, 每个不变量一项"""

    checks: List[InvariantCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def __getitem__(self, name: str) -> InvariantCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)


def commutator_defect(model: ModelSpec, momenta) -> float:
    """max_k ‖[σ, ε(k)]‖"""
    energies = model.energy(momenta)
    commutators = model.sigma @ energies - energies @ model.sigma
    if commutators.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(commutators, ord=2, axis=(1, 2))))


def validate_model(spec: ModelSpec, grid: "SpectralGrid") -> ValidationReport:
    """逐项检查 ModelSpec 的不变量, 从不抛出异常"""
    numerics = config.NUMERICS
    identity = np.eye(spec.dim)
    mass_eigenvalues = np.linalg.eigvalsh((spec.mass_op + np.conj(spec.mass_op).T) / 2)
    mass_norm = operator_norm(spec.mass_op)
    psd_defect = float(max(0.0, -mass_eigenvalues.min()))
    bound_defect = float(max(0.0, mass_norm - float(spec.mass_bound or 0.0)))
    unitary_defect = operator_norm(np.conj(spec.sigma).T @ spec.sigma - identity)

    candidates = [
        ("sigma_unitary", unitary_defect, numerics.UNITARY_TOL),
        ("kappa_hermitian", hermitian_defect(spec.kappa_op), numerics.HERMITIAN_TOL),
        ("mass_hermitian", hermitian_defect(spec.mass_op), numerics.HERMITIAN_TOL),
        ("mass_psd", psd_defect, numerics.HERMITIAN_TOL * max(1.0, mass_norm)),
        ("mass_bound", bound_defect, numerics.HERMITIAN_TOL * max(1.0, mass_norm)),
        ("sigma_commutes_energy", commutator_defect(spec, grid.momenta), numerics.COMMUTATOR_TOL),
    ]
    return ValidationReport(
        checks=[
            InvariantCheck(name=name, passed=bool(defect <= tolerance), defect=float(defect), tolerance=tolerance)
            for name, defect, tolerance in candidates
        ],
    )

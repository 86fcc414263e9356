"""
随机跃迁时刻的蒙特卡洛实现

跃迁时刻 s ~ ρ 由逆 CDF 采样, 随机数来自以 64 位种子为密钥的 Philox 计数器生成器。
第 c 个分块使用计数器 [0, 0, c, 0], 因此结果与并行线程数无关。
"""

import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Tuple

import numpy as np
import scipy.integrate
import scipy.stats

from ..configs.config import config
from ..exceptions import DegenerateDensity, InvalidStateVector
from ..utils.expression import compile_density
from ..utils.logger import logger
from ..utils.sync import run_parallel
from .linalg import ModelSpec, ensure_hermitian, evolve
from .spectral import SpectralGrid, WaveField
from .toy_dirac import Cocycle, cocycle_v, solve_toy_bvp

MAX_SEED = 2**64 - 1


@dataclass(frozen=True, eq=False)
class JumpDensity:
    """网格截断的跃迁时刻密度

    knots 为网格上 z_j ≥ 0 的样本, cell_masses[i] 为区间 (knots[i], knots[i+1]] 上的积分。
    """

    grid: SpectralGrid
    func: Callable[[float], float]
    knots: np.ndarray
    cell_masses: np.ndarray
    label: str = "rho"

    @classmethod
    def from_callable(cls, grid: SpectralGrid, func: Callable[[float], float], label: str = "rho") -> "JumpDensity":
        """按网格单元用自适应积分建立 CDF 表

        Raises:
            DegenerateDensity: 密度为负, 总质量为零或超过 1
        """
        knots = np.array(grid.z[grid.origin :])
        masses = np.empty(len(knots) - 1)
        for index, (lower, upper) in enumerate(zip(knots[:-1], knots[1:])):
            for point in (lower, 0.5 * (lower + upper), upper):
                if func(float(point)) < 0:
                    raise DegenerateDensity(f"密度 {label} 在 s = {point:.6g} 处为负")
            masses[index], _ = scipy.integrate.quad(func, lower, upper, epsabs=1e-14, epsrel=1e-12)
        if np.any(masses < 0):
            raise DegenerateDensity(f"密度 {label} 存在负的单元质量")
        total = float(np.sum(masses))
        if total <= 0:
            raise DegenerateDensity(f"密度 {label} 在网格上的支撑为空")
        if total > 1.0 + 1e-9:
            raise DegenerateDensity(f"密度 {label} 的网格质量 {total!r} 超过 1")
        knots.setflags(write=False)
        masses.setflags(write=False)
        return cls(grid=grid, func=func, knots=knots, cell_masses=masses, label=label)

    @classmethod
    def from_expression(cls, grid: SpectralGrid, expression: str) -> "JumpDensity":
        return cls.from_callable(grid, compile_density(expression), label=expression)

    @property
    def cdf(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.cell_masses)])

    @property
    def tail_mass(self) -> float:
        """网格右端之外的声明尾部质量"""
        return float(max(0.0, 1.0 - np.sum(self.cell_masses)))

    def inverse_cdf(self, uniforms) -> np.ndarray:
        """节点间线性插值的逆 CDF, 落入尾部的均匀数映射为 inf"""
        uniforms = np.asarray(uniforms, dtype=float)
        cdf = self.cdf
        cells = np.clip(np.searchsorted(cdf, uniforms, side="right") - 1, 0, len(self.cell_masses) - 1)
        masses = self.cell_masses[cells]
        fraction = np.divide(uniforms - cdf[cells], masses, out=np.zeros_like(uniforms), where=masses > 0)
        samples = self.knots[cells] + np.clip(fraction, 0.0, 1.0) * self.grid.dz
        return np.where(uniforms >= cdf[-1], np.inf, samples)

    def cdf_at(self, points) -> np.ndarray:
        """采样分布的 CDF, 在 inf 处为 1"""
        points = np.asarray(points, dtype=float)
        values = np.interp(points, self.knots, self.cdf, left=0.0, right=float(self.cdf[-1]))
        return np.where(np.isposinf(points), 1.0, values)


def philox_generator(seed: int, chunk: int = 0) -> np.random.Generator:
    """计数器分块的 Philox 生成器"""
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"种子必须是 64 位无符号整数, 实际 {seed!r}")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, chunk, 0]))


def sample_jump_time(density: JumpDensity, rng: np.random.Generator) -> float:
    """逆 CDF 采样单个跃迁时刻"""
    return float(density.inverse_cdf(rng.random()))


@dataclass(frozen=True, eq=False)
class TrajectoryEnsemble:
    """轨迹系综: 跃迁时刻与对应的 V(t, s)η"""

    seed: int
    jump_times: np.ndarray
    states: np.ndarray

    @property
    def count(self) -> int:
        return int(self.jump_times.shape[0])

    def norm_defect(self) -> float:
        if self.count == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.norm(self.states, axis=1) - 1.0)))


def check_state_vector(eta, dim: int) -> np.ndarray:
    """Raises: InvalidStateVector"""
    eta = np.asarray(eta, dtype=complex)
    if eta.shape != (dim,):
        raise InvalidStateVector(f"η 的形状应为 ({dim},), 实际 {eta.shape}")
    norm = float(np.linalg.norm(eta))
    if abs(norm - 1.0) > 1e-12:
        raise InvalidStateVector(f"η 未归一化: ‖η‖ = {norm!r}")
    return eta


def _chunk_trajectories(
    model: ModelSpec,
    density: JumpDensity,
    eta: np.ndarray,
    t: float,
    seed: int,
    chunk: int,
    size: int,
) -> Tuple[np.ndarray, np.ndarray]:
    uniforms = philox_generator(seed, chunk).random(size)
    jump_times = density.inverse_cdf(uniforms)
    states = Cocycle(model).batch(t, jump_times) @ eta
    return jump_times, states


def generate_ensemble(
    model: ModelSpec,
    density: JumpDensity,
    eta,
    t: float,
    samples: int,
    seed: int,
    jobs: int = 1,
) -> TrajectoryEnsemble:
    """按计数器分块生成 M 条轨迹, 分块顺序拼接"""
    eta = check_state_vector(eta, model.dim)
    chunk_size = config.RUNNER.MC_CHUNK_SIZE
    sizes = [min(chunk_size, samples - start) for start in range(0, samples, chunk_size)]
    calls = [
        partial(_chunk_trajectories, model, density, eta, t, seed, chunk, size) for chunk, size in enumerate(sizes)
    ]
    parts = run_parallel(calls, jobs=jobs)
    if not parts:
        return TrajectoryEnsemble(seed, np.empty(0), np.empty((0, model.dim), dtype=complex))
    return TrajectoryEnsemble(
        seed=seed,
        jump_times=np.concatenate([part[0] for part in parts]),
        states=np.concatenate([part[1] for part in parts]),
    )


@dataclass
class MonteCarloEstimate:
    mean: float
    stderr: float
    norm_defect: float
    ensemble: TrajectoryEnsemble

    def ks_statistic(self, density: JumpDensity) -> float:
        """跃迁时刻经验分布与目标 CDF 的 Kolmogorov 距离"""
        result = scipy.stats.kstest(self.ensemble.jump_times, density.cdf_at)
        return float(result.statistic)


def observable_values(states: np.ndarray, observable: np.ndarray) -> np.ndarray:
    """逐条轨迹的 ⟨v, Av⟩"""
    return np.real(np.einsum("mi,ij,mj->m", np.conj(states), observable, states))


def mc_expectation(
    model: ModelSpec,
    density: JumpDensity,
    observable,
    t: float,
    samples: int,
    seed: int,
    eta,
    jobs: int = 1,
) -> MonteCarloEstimate:
    """样本均值 E_s⟨V(t,s)η, A V(t,s)η⟩ 及其标准误差"""
    observable = ensure_hermitian(observable, "observable")
    ensemble = generate_ensemble(model, density, eta, t, samples, seed, jobs=jobs)
    values = observable_values(ensemble.states, observable)
    mean = float(np.mean(values)) if values.size else math.nan
    stderr = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    logger.debug(f"蒙特卡洛: M = {samples}, seed = {seed}, 均值 {mean:.6f} ± {stderr:.2e}")
    return MonteCarloEstimate(mean=mean, stderr=stderr, norm_defect=ensemble.norm_defect(), ensemble=ensemble)


def initial_amplitude(density: JumpDensity, eta) -> WaveField:
    """χ⁰(z_j) = (p_j/dz)^{1/2}·η, p_j 为单元 (z_{j−1}, z_j] 的质量, z ≤ 0 处为零"""
    grid = density.grid
    eta = np.asarray(eta, dtype=complex)
    values = np.zeros((grid.points, eta.shape[0]), dtype=complex)
    amplitude = np.sqrt(density.cell_masses / grid.dz)
    values[grid.origin + 1 :] = amplitude[:, None] * eta[None, :]
    return WaveField(grid, values)


@dataclass
class DeterministicExpectation:
    value: float
    initial_mass: float
    tail_mass: float


def deterministic_expectation(
    model: ModelSpec,
    density: JumpDensity,
    observable,
    t: float,
    eta,
) -> DeterministicExpectation:
    """以 χ⁰ = √ρ·η 求解边值问题, 返回 dz·Σ⟨χᵗ(z_j), Aχᵗ(z_j)⟩ 加上网格外尾部质量的无跃迁项

    尾部对应 s > L ≥ t 的跃迁时刻, 此时 V(t, s)η = e^{−itϰ}η。
    """
    observable = ensure_hermitian(observable, "observable")
    eta = check_state_vector(eta, model.dim)
    chi0 = initial_amplitude(density, eta)
    chi = solve_toy_bvp(model, chi0, t)
    value = density.grid.dz * float(np.sum(observable_values(chi.values, observable)))
    free_state = evolve(model.kappa_op, t) @ eta
    no_jump = float(np.real(np.vdot(free_state, observable @ free_state)))
    return DeterministicExpectation(
        value=value + density.tail_mass * no_jump,
        initial_mass=chi0.norm_sq(),
        tail_mass=density.tail_mass,
    )


def quadrature_expectation(
    model: ModelSpec,
    density: Callable[[float], float],
    observable,
    t: float,
    eta,
) -> float:
    """自适应积分: ∫₀ᵗρ(s)f(s)ds + (1 − ∫₀ᵗρ)·f_无跃迁"""
    observable = ensure_hermitian(observable, "observable")
    eta = check_state_vector(eta, model.dim)
    free_state = evolve(model.kappa_op, t) @ eta
    no_jump = float(np.real(np.vdot(free_state, observable @ free_state)))
    if t <= 0:
        return no_jump

    def weighted(s: float) -> float:
        state = cocycle_v(model, t, s) @ eta
        return density(s) * float(np.real(np.vdot(state, observable @ state)))

    jumped, _ = scipy.integrate.quad(weighted, 0.0, t, epsabs=1e-10, epsrel=1e-10, limit=200)
    mass, _ = scipy.integrate.quad(density, 0.0, t, epsabs=1e-12, epsrel=1e-12, limit=200)
    return jumped + (1.0 - mass) * no_jump


def agreement_limit(stderr: float, sigmas: float, dz: float, observable: np.ndarray) -> float:
    """一致性阈值 k·stderr + C·dz·max(1, ‖A‖)"""
    norm = float(np.linalg.norm(np.asarray(observable), 2))
    return sigmas * stderr + config.RUNNER.AGREEMENT_CONSTANT * dz * max(1.0, norm)

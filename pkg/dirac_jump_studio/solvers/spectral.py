"""
周期网格上的谱方法基础设施

网格 z_j = −L + j·dz (j = 0..N−1), dz = 2L/N, 原点位于下标 N/2。
动量按标准 DFT 顺序存储: k = 2π·fftfreq(N, dz), 即 0, dk, …, (N/2−1)dk, −N/2·dk, …, −dk, dk = π/L。

傅里叶约定 g(k) = ∫e^{−ikz}ψ(z)dz ≈ dz·Σ_j e^{−ikz_j}ψ_j,
范数 ‖ψ‖² = dz·Σ‖ψ_j‖² = (dk/2π)·Σ‖g_m‖²。
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
import scipy.fft

from ..configs.config import config
from ..exceptions import (
    GridMismatch,
    InvalidGrid,
    NonCommensurateShift,
    NonHermitianInput,
    ShapeMismatch,
    WrongRepresentation,
)
from ..utils.logger import logger
from .linalg import ModelSpec, apply_matrices, dagger, unitary_power


class Representation(Enum):
    """波场表象"""

    POSITION = "position"
    MOMENTUM = "momentum"


class Direction(Enum):
    """傅里叶变换方向"""

    TO_MOMENTUM = "to-momentum"
    TO_POSITION = "to-position"


class HardySide(Enum):
    """Hardy 类: MINUS 为输入类 (左行波), PLUS 为输出类"""

    MINUS = "minus"
    PLUS = "plus"


@dataclass(frozen=True)
class SpectralGrid:
    """均匀周期网格 z ∈ [−L, L)"""

    half_width: float
    points: int

    def __post_init__(self):
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise InvalidGrid(f"半宽 L 必须为正有限数, 实际 {self.half_width!r}")
        if self.points < 2 or self.points & (self.points - 1):
            raise InvalidGrid(f"点数 N 必须是不小于 2 的 2 的幂, 实际 {self.points!r}")

    @property
    def dz(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def dk(self) -> float:
        return math.pi / self.half_width

    @property
    def origin(self) -> int:
        """z = 0 所在下标"""
        return self.points // 2

    @cached_property
    def z(self) -> np.ndarray:
        values = self.half_width * (2.0 * np.arange(self.points) / self.points - 1.0)
        values.setflags(write=False)
        return values

    @cached_property
    def momenta(self) -> np.ndarray:
        values = 2.0 * np.pi * scipy.fft.fftfreq(self.points, self.dz)
        values.setflags(write=False)
        return values

    @cached_property
    def mode_signs(self) -> np.ndarray:
        # e^{ik_m L} = (−1)^m, m 为带符号的整数频率
        modes = np.rint(scipy.fft.fftfreq(self.points) * self.points).astype(np.int64)
        return np.where(modes % 2 == 0, 1.0, -1.0)

    def count_below(self, threshold: float) -> int:
        """满足 z_j < threshold 的样本数"""
        if threshold == math.inf:
            return self.points
        if threshold == -math.inf:
            return 0
        count = math.ceil((threshold + self.half_width) / self.dz - 1e-9)
        return int(min(max(count, 0), self.points))

    def steps(self, shift: float) -> int:
        """把平移量换算为整数步数

        Raises:
            NonCommensurateShift: shift/dz 偏离整数超过 SHIFT_TOL
        """
        ratio = shift / self.dz
        nearest = round(ratio)
        if not math.isfinite(ratio) or abs(ratio - nearest) > config.NUMERICS.SHIFT_TOL:
            raise NonCommensurateShift(shift, self.dz)
        return int(nearest)

    def is_commensurate(self, shift: float) -> bool:
        try:
            self.steps(shift)
        except NonCommensurateShift:
            return False
        return True


@dataclass(frozen=True, eq=False)
class WaveField:
    """网格上的 ℂⁿ 值波函数, values 形状为 (N, n)"""

    grid: SpectralGrid
    values: np.ndarray
    representation: Representation = Representation.POSITION

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != self.grid.points:
            raise ShapeMismatch(f"波场形状 {values.shape} 与网格点数 {self.grid.points} 不一致")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @classmethod
    def zeros(cls, grid: SpectralGrid, dim: int) -> "WaveField":
        return cls(grid, np.zeros((grid.points, dim), dtype=complex))

    @classmethod
    def from_function(cls, grid: SpectralGrid, func: Callable[[np.ndarray], np.ndarray]) -> "WaveField":
        """func 接收 z 数组, 返回 (N,) 或 (N, n) 数组"""
        return cls(grid, func(grid.z))

    @classmethod
    def from_momentum(cls, grid: SpectralGrid, amplitudes: np.ndarray) -> "WaveField":
        return cls(grid, amplitudes, Representation.MOMENTUM)

    def with_values(self, values: np.ndarray) -> "WaveField":
        return WaveField(self.grid, values, self.representation)

    def norm_sq(self) -> float:
        total = float(np.sum(np.abs(self.values) ** 2))
        if self.representation is Representation.POSITION:
            return self.grid.dz * total
        return total / (self.grid.points * self.grid.dz)

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def position(self) -> "WaveField":
        if self.representation is Representation.POSITION:
            return self
        return transform(self, Direction.TO_POSITION)

    def momentum(self) -> "WaveField":
        if self.representation is Representation.MOMENTUM:
            return self
        return transform(self, Direction.TO_MOMENTUM)

    def inner(self, other: "WaveField") -> complex:
        """位置表象下的内积 ⟨self, other⟩"""
        _check_same_grid(self.grid, other.grid)
        left, right = self.position().values, other.position().values
        return complex(self.grid.dz * np.vdot(left, right))

    def __add__(self, other: "WaveField") -> "WaveField":
        _check_same_grid(self.grid, other.grid)
        if self.representation is not other.representation:
            other = other.position() if self.representation is Representation.POSITION else other.momentum()
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "WaveField") -> "WaveField":
        return self + other.scaled(-1.0)

    def scaled(self, factor: Union[complex, float]) -> "WaveField":
        return self.with_values(factor * self.values)


@dataclass(frozen=True, eq=False)
class SymbolTable:
    """动量网格上的厄米矩阵族 s(k_j), entries 形状为 (N, n, n)"""

    grid: SpectralGrid
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim == 1:
            entries = entries[:, None, None]
        if entries.ndim != 3 or entries.shape[0] != self.grid.points or entries.shape[1] != entries.shape[2]:
            raise ShapeMismatch(f"符号表形状 {entries.shape} 与网格点数 {self.grid.points} 不一致")
        scale = max(1.0, float(np.max(np.abs(entries))) if entries.size else 1.0)
        defect = float(np.max(np.abs(entries - dagger(entries)))) if entries.size else 0.0
        if defect > config.NUMERICS.SYMBOL_HERMITIAN_TOL * scale:
            raise NonHermitianInput("symbol", defect)
        entries = (entries + dagger(entries)) / 2
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[1]

    @classmethod
    def zeros(cls, grid: SpectralGrid, dim: int) -> "SymbolTable":
        return cls(grid, np.zeros((grid.points, dim, dim), dtype=complex))

    @cached_property
    def _spectrum(self):
        return np.linalg.eigh(self.entries)

    def exponential(self, t: float) -> np.ndarray:
        """逐模式计算 e^{−it·s(k)}, 返回 (N, n, n)"""
        values, vectors = self._spectrum
        return np.einsum("kij,kj,klj->kil", vectors, np.exp(-1j * t * values), np.conj(vectors))

    def eigenvalues(self) -> np.ndarray:
        return self._spectrum[0]

    def phase_speed(self) -> np.ndarray:
        """相速度 ς_k = s(k)/|k|, k = 0 处为 NaN"""
        magnitude = np.abs(self.grid.momenta)[:, None, None]
        speed = np.full(self.entries.shape, np.nan, dtype=complex)
        np.divide(self.entries, magnitude, out=speed, where=magnitude > 0)
        return speed


def _check_same_grid(left: SpectralGrid, right: SpectralGrid) -> None:
    if left != right:
        raise GridMismatch(f"网格不一致: {left} 与 {right}")


def energy_symbol(model: ModelSpec, grid: SpectralGrid) -> SymbolTable:
    """相对论动能符号 ε(k) = (k² + μ²)^{1/2}"""
    return SymbolTable(grid, model.energy(grid.momenta))


def transform(field: WaveField, direction: Direction) -> WaveField:
    """离散傅里叶变换对

    Raises:
        WrongRepresentation: 波场已处于目标表象
    """
    grid = field.grid
    signs = grid.mode_signs[:, None]
    if direction is Direction.TO_MOMENTUM:
        if field.representation is Representation.MOMENTUM:
            raise WrongRepresentation("波场已在动量表象")
        amplitudes = grid.dz * signs * scipy.fft.fft(field.values, axis=0)
        return WaveField(grid, amplitudes, Representation.MOMENTUM)
    if field.representation is Representation.POSITION:
        raise WrongRepresentation("波场已在位置表象")
    samples = scipy.fft.ifft(signs * field.values, axis=0) / grid.dz
    return WaveField(grid, samples, Representation.POSITION)


def apply_propagator(field: WaveField, symbol: SymbolTable, t: float) -> WaveField:
    """动量振幅逐模式乘以 e^{−it·s(k)}, 保持输入的表象"""
    _check_same_grid(field.grid, symbol.grid)
    if symbol.dim != field.dim:
        raise ShapeMismatch(f"符号维度 {symbol.dim} 与波场维度 {field.dim} 不一致")
    if t == 0:
        return field
    amplitudes = field.momentum().values
    evolved = WaveField.from_momentum(field.grid, apply_matrices(symbol.exponential(t), amplitudes))
    if field.representation is Representation.POSITION:
        return evolved.position()
    return evolved


def apply_pointwise(field: WaveField, matrices: np.ndarray) -> WaveField:
    """位置表象下逐点乘以矩阵 M(z_j), matrices 形状 (N, n, n) 或 (n, n)"""
    values = field.position().values
    matrices = np.asarray(matrices, dtype=complex)
    if matrices.ndim == 2:
        return WaveField(field.grid, values @ matrices.T)
    if matrices.shape[0] != field.grid.points:
        raise ShapeMismatch(f"逐点矩阵数量 {matrices.shape[0]} 与网格点数不一致")
    return WaveField(field.grid, apply_matrices(matrices, values))


def hardy_momentum_mask(grid: SpectralGrid, side: HardySide, cutoff: float) -> np.ndarray:
    """Hardy 类在动量网格上的指示; κ° = 0 时 k = 0 归入 MINUS"""
    momenta = grid.momenta
    if side is HardySide.MINUS:
        mask = momenta < cutoff
        if cutoff == 0:
            mask |= momenta == 0
        return mask
    return momenta > -cutoff


def hardy_project(field: WaveField, side: HardySide, cutoff: float = 0.0) -> WaveField:
    """正交投影到 Hardy 类 𝓔∓_κ°, 保持输入的表象"""
    mask = hardy_momentum_mask(field.grid, side, cutoff)
    amplitudes = field.momentum().values * mask[:, None]
    projected = WaveField.from_momentum(field.grid, amplitudes)
    if field.representation is Representation.POSITION:
        return projected.position()
    return projected


def outside_hardy_mass(field: WaveField, side: HardySide, cutoff: float = 0.0) -> float:
    """Hardy 类之外的质量"""
    mask = hardy_momentum_mask(field.grid, side, cutoff)
    amplitudes = field.momentum().values[~mask]
    return float(np.sum(np.abs(amplitudes) ** 2)) / (field.grid.points * field.grid.dz)


def indicator_sigma_power(field: WaveField, threshold: float, sigma: np.ndarray, exponent: int = 1) -> WaveField:
    """z_j < threshold 的样本乘以 σ^exponent, 其余不变 (左闭约定)"""
    values = np.array(field.position().values)
    count = field.grid.count_below(threshold)
    if count:
        values[:count] = values[:count] @ unitary_power(np.asarray(sigma, dtype=complex), exponent).T
    return WaveField(field.grid, values)


def indicator_cut(field: WaveField, threshold: float, keep_below: bool = True) -> WaveField:
    """乘以指示函数 1̂_t (z < t); keep_below=False 时乘以其补"""
    values = np.array(field.position().values)
    count = field.grid.count_below(threshold)
    if keep_below:
        values[count:] = 0
    else:
        values[:count] = 0
    return WaveField(field.grid, values)


def grid_shift(field: WaveField, shift: float) -> WaveField:
    """精确平移 ψ'(z) = ψ(z + a), 即 out[j] = in[(j + a/dz) mod N]"""
    steps = field.grid.steps(shift)
    if steps == 0:
        return field.position()
    return WaveField(field.grid, np.roll(field.position().values, -steps, axis=0))


def reflect(field: WaveField) -> WaveField:
    """反射 z ↦ −z, 下标映射 j ↦ (N − j) mod N"""
    points = field.grid.points
    index = (points - np.arange(points)) % points
    return WaveField(field.grid, field.position().values[index])


def half_line_norm_sq(field: WaveField) -> float:
    """z ≥ 0 上的质量, z = 0 处按梯形权重 1/2 计入"""
    values = field.position().values
    origin = field.grid.origin
    weights = np.abs(values[origin:]) ** 2
    return field.grid.dz * float(np.sum(weights) - 0.5 * np.sum(weights[0]))


def guard_band_mask(grid: SpectralGrid) -> np.ndarray:
    return np.abs(grid.z) >= grid.half_width * (1.0 - config.NUMERICS.GUARD_FRACTION)


def guard_band_mass(field: WaveField) -> float:
    """接缝保护带内的相对质量"""
    values = field.position().values
    total = float(np.sum(np.abs(values) ** 2))
    if total == 0:
        return 0.0
    return float(np.sum(np.abs(values[guard_band_mask(field.grid)]) ** 2)) / total


def monitor_support(field: WaveField, label: str = "field") -> float:
    """支撑监视器: 保护带内质量超过阈值时输出警告"""
    mass = guard_band_mass(field)
    if mass > config.NUMERICS.GUARD_MASS_WARNING:
        logger.warning(f"波场 {label} 在周期接缝保护带内的相对质量为 {mass:.3e}, 结果可能受绕回污染")
    return mass


def support_outside(field: WaveField, mask: np.ndarray) -> float:
    """mask 之外的相对质量"""
    values = field.position().values
    total = float(np.sum(np.abs(values) ** 2))
    if total == 0:
        return 0.0
    return float(np.sum(np.abs(values[~mask]) ** 2)) / total


def gaussian_packet(
    grid: SpectralGrid,
    center: float,
    width: float,
    carrier: float,
    eta: np.ndarray,
    side: Optional[HardySide] = None,
    cutoff: float = 0.0,
    normalize: bool = True,
) -> WaveField:
    """高斯波包 η·exp(−(z−c)²/2w² + ik₀z), 可选投影到 Hardy 类并归一化"""
    eta = np.asarray(eta, dtype=complex)
    profile = np.exp(-((grid.z - center) ** 2) / (2.0 * width**2) + 1j * carrier * grid.z)
    field = WaveField(grid, profile[:, None] * eta[None, :])
    if side is not None:
        field = hardy_project(field, side, cutoff)
    if normalize:
        norm = field.norm()
        if norm > 0:
            field = field.scaled(1.0 / norm)
    return field


def split_at_origin(field: WaveField):
    """把截断波 χ 拆为 z ≥ 0 上的输入波与反射后的输出波

    输出波按 w ≥ 0 存储在同一网格上: out(0) = χ(z_{o−1}), out(w_j) = χ(−w_j), w < 0 处为零。
    """
    values = field.position().values
    grid = field.grid
    origin = grid.origin
    incoming = np.zeros_like(values)
    incoming[origin:] = values[origin:]
    outgoing = np.zeros_like(values)
    outgoing[origin] = values[origin - 1]
    index = np.arange(origin + 1, grid.points)
    outgoing[index] = values[grid.points - index]
    return WaveField(grid, incoming), WaveField(grid, outgoing)


def side_masses(field: WaveField):
    """返回 (z ≥ 0 上的质量, z < 0 上的质量), 二者之和等于 ‖χ‖²"""
    values = field.position().values
    origin = field.grid.origin
    dz = field.grid.dz
    return (
        dz * float(np.sum(np.abs(values[origin:]) ** 2)),
        dz * float(np.sum(np.abs(values[:origin]) ** 2)),
    )

"""
单跃迁玩具模型的闭式解

跃迁指示 Δ₀ᵗ(s) = 1[s < t] − 1[s < 0]: t ≥ 0 时为 1_{[0,t)}, t < 0 时为 −1_{[t,0)}。
余圈 V(t, s) = e^{−itϰ}·S(s)^{Δ₀ᵗ(s)}, S(s) = e^{isϰ}σe^{−isϰ}。
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..configs.config import config
from ..exceptions import SkippedPrecondition, UnsupportedInput
from .linalg import (
    ModelSpec,
    apply_matrices,
    dagger,
    evolve,
    evolve_batch,
    operator_norm,
    unitary_power,
)
from .spectral import (
    SpectralGrid,
    WaveField,
    apply_pointwise,
    grid_shift,
    half_line_norm_sq,
    reflect,
    side_masses,
    split_at_origin,
)


def jump_exponent(s, t: float) -> np.ndarray:
    """Δ₀ᵗ(s), 对 s = +∞ 取 0"""
    s = np.asarray(s, dtype=float)
    return (s < t).astype(np.int64) - (s < 0).astype(np.int64)


def grid_jump_exponent(grid: SpectralGrid, t: float, index: np.ndarray) -> np.ndarray:
    """按下标计算网格上的跃迁指示, 下标不取模"""
    return (index < grid.count_below(t)).astype(np.int64) - (index < grid.count_below(0.0)).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Cocycle:
    """两参数幺正族 V(t, s)"""

    model: ModelSpec

    def __call__(self, t: float, s: float) -> np.ndarray:
        return cocycle_v(self.model, t, s)

    def batch(self, t: float, jump_times: np.ndarray) -> np.ndarray:
        """对一组跃迁时刻批量计算 V(t, s_i), 返回 (M, n, n)"""
        jump_times = np.asarray(jump_times, dtype=float)
        exponents = jump_exponent(jump_times, t)
        finite = np.where(np.isfinite(jump_times), jump_times, 0.0)
        jumps = self.model.jump_operators(finite)
        identity = np.eye(self.model.dim, dtype=complex)
        factors = np.where(
            (exponents > 0)[:, None, None],
            jumps,
            np.where((exponents < 0)[:, None, None], dagger(jumps), identity),
        )
        return evolve(self.model.kappa_op, t) @ factors


def cocycle_v(model: ModelSpec, t: float, s: float) -> np.ndarray:
    """V(t, s) = e^{−itϰ}·S(s)^{Δ₀ᵗ(s)}; s = inf 表示窗口内无跃迁"""
    free = evolve(model.kappa_op, t)
    exponent = int(jump_exponent(s, t)) if math.isfinite(s) else 0
    if exponent == 0:
        return free
    jump = model.jump_operators([s])[0]
    return free @ unitary_power(jump, exponent)


@dataclass(frozen=True, eq=False)
class TruncatedState:
    """截断波 χ: z ≥ 0 处为输入波, z < 0 处为反射输出波"""

    chi: WaveField

    def split(self) -> Tuple[WaveField, WaveField]:
        return split_at_origin(self.chi)

    def norm_identity_defect(self) -> float:
        incoming, outgoing = side_masses(self.chi)
        return abs(incoming + outgoing - self.chi.norm_sq())


def _frame_out(model: ModelSpec, grid: SpectralGrid) -> np.ndarray:
    # e^{−izϰ}
    return evolve_batch(model.kappa_op, grid.z)


def solve_toy_bvp(model: ModelSpec, chi0: WaveField, t: float) -> WaveField:
    """χᵗ(z) = e^{izϰ}·χ_t(z + t), χ_t(s) = σ^{Δ₀ᵗ(s)}·e^{−isϰ}χ⁰(s)"""
    grid = chi0.grid
    steps = grid.steps(t)
    frame = _frame_out(model, grid)
    local = apply_matrices(frame, chi0.position().values)
    lower, upper = sorted((grid.count_below(0.0), grid.count_below(t)))
    if upper > lower:
        power = unitary_power(model.sigma, 1 if t > 0 else -1)
        local[lower:upper] = local[lower:upper] @ power.T
    shifted = np.roll(local, -steps, axis=0)
    return WaveField(grid, apply_matrices(dagger(frame), shifted))


def resolving_map(model: ModelSpec, t: float):
    """网格级解映射 Vᵗ: χ⁰ ↦ χᵗ"""
    return lambda field: solve_toy_bvp(model, field, t)


def cocycle_oracle(model: ModelSpec, chi0: WaveField, t: float) -> WaveField:
    """逐点解 V(t, s)χ⁰(s), 放置在 z = s − t"""
    grid = chi0.grid
    steps = grid.steps(t)
    cocycle = Cocycle(model)
    values = apply_matrices(cocycle.batch(t, grid.z), chi0.position().values)
    return WaveField(grid, np.roll(values, -steps, axis=0))


def toy_boundary_defect(model: ModelSpec, chi: WaveField) -> float:
    """边界条件 χ(0₋) = σχ(0) 的网格残差"""
    values = chi.position().values
    origin = chi.grid.origin
    return float(np.linalg.norm(values[origin - 1] - model.sigma @ values[origin]))


def toy_group_law_defect(model: ModelSpec, chi0: WaveField, r: float, t: float) -> float:
    """max_j ‖(VʳVᵗχ)_j − (V^{r+t}χ)_j‖"""
    composed = solve_toy_bvp(model, solve_toy_bvp(model, chi0, t), r)
    direct = solve_toy_bvp(model, chi0, r + t)
    return float(np.max(np.linalg.norm(composed.values - direct.values, axis=1)))


def indicator_cocycle_defect(grid: SpectralGrid, r: float, t: float) -> int:
    """整数指示的余圈恒等式 Δʳ(p − m_t) + Δᵗ(p) = Δ^{r+t}(p) 的最大偏差"""
    shift = grid.steps(t)
    index = np.arange(-grid.points, 2 * grid.points)
    left = grid_jump_exponent(grid, r, index - shift) + grid_jump_exponent(grid, t, index)
    right = grid_jump_exponent(grid, r + t, index)
    return int(np.max(np.abs(left - right)))


def ito_residual(model: ModelSpec, t: float, dt: float, s: float, eta: np.ndarray) -> float:
    """单跃迁 Ito 方程的离散残差

    ‖V(t+dt,s)η − V(t,s)η + iϰV(t,s)η·dt − (σ − I)V(t,s)η·1[t ≤ s < t+dt]‖
    """
    if dt <= 0:
        raise ValueError(f"dt 必须为正, 实际 {dt!r}")
    eta = np.asarray(eta, dtype=complex)
    current = cocycle_v(model, t, s) @ eta
    following = cocycle_v(model, t + dt, s) @ eta
    residual = following - current + 1j * dt * (model.kappa_op @ current)
    if t <= s < t + dt:
        residual -= (model.sigma - np.eye(model.dim)) @ current
    return float(np.linalg.norm(residual))


def initial_output(model: ModelSpec, psi0: WaveField) -> WaveField:
    """初始输出波 ψ̃⁰(−z) = S(z)ψ⁰(z)"""
    jumps = model.jump_operators(psi0.grid.z)
    return reflect(apply_pointwise(psi0, jumps))


@dataclass(frozen=True, eq=False)
class IOPair:
    """输入/输出波对, 均为全直线上的延拓"""

    psi_t: WaveField
    psi_tilde_t: WaveField
    initial_mass: float
    half_line_mass: float
    connection_defect: float

    @property
    def mass_drift(self) -> float:
        return abs(self.half_line_mass - self.initial_mass)

    def restricted(self) -> Tuple[WaveField, WaveField]:
        """截取 z ≥ 0 部分"""
        origin = self.psi_t.grid.origin
        pieces = []
        for field in (self.psi_t, self.psi_tilde_t):
            values = np.array(field.values)
            values[:origin] = 0
            pieces.append(WaveField(field.grid, values))
        return pieces[0], pieces[1]


def connection_defect(model: ModelSpec, psi: WaveField, psi_tilde: WaveField) -> float:
    """max_z ‖ψ̃(−z) − S(z)ψ(z)‖"""
    jumps = model.jump_operators(psi.grid.z)
    expected = apply_matrices(jumps, psi.position().values)
    return float(np.max(np.linalg.norm(reflect(psi_tilde).values - expected, axis=1)))


def _check_right_support(psi0: WaveField) -> None:
    values = psi0.position().values
    origin = psi0.grid.origin
    total = float(np.sum(np.abs(values) ** 2))
    outside = float(np.sum(np.abs(values[: origin + 1]) ** 2))
    if total > 0 and outside > config.NUMERICS.SUPPORT_TOL * total:
        raise UnsupportedInput(f"ψ⁰ 在 z ≤ 0 处的相对质量为 {outside / total:.3e}")


def _transport(model: ModelSpec, field: WaveField, t: float, shift: float) -> WaveField:
    return apply_pointwise(grid_shift(field, shift), evolve(model.kappa_op, t))


def io_reflection_pair(model: ModelSpec, psi0: WaveField, t: float) -> IOPair:
    """ψᵗ(z) = e^{−itϰ}ψ⁰(z + t), ψ̃ᵗ(z) = e^{−itϰ}ψ̃⁰(z − t)

    Raises:
        UnsupportedInput: ψ⁰ 在 z ≤ 0 处有质量
    """
    _check_right_support(psi0)
    psi_tilde0 = initial_output(model, psi0)
    psi_t = _transport(model, psi0, t, t)
    psi_tilde_t = _transport(model, psi_tilde0, t, -t)
    return IOPair(
        psi_t=psi_t,
        psi_tilde_t=psi_tilde_t,
        initial_mass=half_line_norm_sq(psi0) + half_line_norm_sq(psi_tilde0),
        half_line_mass=half_line_norm_sq(psi_t) + half_line_norm_sq(psi_tilde_t),
        connection_defect=connection_defect(model, psi_t, psi_tilde_t),
    )


@dataclass
class TimeReversalReport:
    """时间反演 (输入/输出交换) 的缺陷"""

    input_defect: float
    output_defect: float
    connection_defect: float

    @property
    def max_defect(self) -> float:
        return max(self.input_defect, self.output_defect, self.connection_defect)


def check_reversal_symmetry(model: ModelSpec) -> None:
    """检查 conj(σ) = σ⁻¹ 与 conj(ϰ) = ϰ

    Raises:
        SkippedPrecondition: 对称性前提不成立
    """
    tolerance = config.NUMERICS.PRECONDITION_TOL
    sigma_defect = operator_norm(np.conj(model.sigma) - dagger(model.sigma))
    kappa_defect = operator_norm(np.conj(model.kappa_op) - model.kappa_op)
    if sigma_defect > tolerance:
        raise SkippedPrecondition(f"conj(σ) ≠ σ⁻¹, 偏差 {sigma_defect:.3e}")
    if kappa_defect > tolerance:
        raise SkippedPrecondition(f"conj(ϰ) ≠ ϰ, 偏差 {kappa_defect:.3e}")


def _max_gap(left: WaveField, right: WaveField) -> float:
    return float(np.max(np.linalg.norm(left.values - right.values, axis=1)))


def time_reversal_check(model: ModelSpec, psi0: WaveField, t: float) -> TimeReversalReport:
    """时间箭头反转等价于输入/输出交换: ψ̄^{−t} ⇄ ψ̃ᵗ

    以 ψ'⁰ = conj(ψ̃⁰), ψ̃'⁰ = conj(ψ⁰) 为初值正向演化 t, 与原解逆向演化 t 后取共轭比较。
    """
    check_reversal_symmetry(model)
    _check_right_support(psi0)
    psi_tilde0 = initial_output(model, psi0)

    backward_input = _transport(model, psi0, -t, -t)
    backward_output = _transport(model, psi_tilde0, -t, t)

    reversed_input = psi_tilde0.with_values(np.conj(psi_tilde0.values))
    reversed_output = psi0.position().with_values(np.conj(psi0.position().values))
    forward_input = _transport(model, reversed_input, t, t)
    forward_output = _transport(model, reversed_output, t, -t)

    return TimeReversalReport(
        input_defect=_max_gap(forward_input, backward_output.with_values(np.conj(backward_output.values))),
        output_defect=_max_gap(forward_output, backward_input.with_values(np.conj(backward_input.values))),
        connection_defect=connection_defect(model, forward_input, forward_output),
    )

"""
超相对论极限: 载波动量 κ 附近重新定心的动能 ω_κ(k) = ε(κ + k) − κ

输入波按 ω̃_κ 传播 (网格模式 k 乘以 e^{−itω̃_κ(k)}), 输出波按 ω_κ 传播, 二者都经过 ε_ϰ 共轭。
无质量时输入传播恰为平移 ψ(z + t)。
"""

import math
import time
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..configs.config import config
from ..exceptions import (
    NonpositiveTolerance,
    NotInInductiveClass,
    StudioError,
    SupportViolation,
    UnnormalizedAmplitudes,
)
from ..schemas.records import ConvergenceRecord, LimitSweepConfig
from ..utils.logger import logger
from ..utils.sync import run_parallel
from .linalg import ModelSpec, apply_matrices, evolve
from .reflection import DressedSpec, WaveDirection
from .spectral import (
    HardySide,
    SpectralGrid,
    SymbolTable,
    WaveField,
    apply_pointwise,
    apply_propagator,
    grid_shift,
    outside_hardy_mass,
)


def omega_symbol(spec: DressedSpec, grid: SpectralGrid, kappa: float) -> Tuple[SymbolTable, SymbolTable]:
    """(ω_κ, ω̃_κ): ω_κ(k) = ε(κ + k) − κ, ω̃_κ(k) = ε(κ − k) − κ"""
    momenta = grid.momenta
    shift = kappa * np.eye(spec.dim)[None, :, :]
    omega = spec.model.energy(kappa + momenta) - shift
    omega_tilde = spec.model.energy(kappa - momenta) - shift
    return SymbolTable(grid, omega), SymbolTable(grid, omega_tilde)


def _conjugator(spec: DressedSpec, grid: SpectralGrid, direction: WaveDirection) -> np.ndarray:
    if direction is WaveDirection.INPUT:
        return spec.input_conjugator(grid)
    return spec.output_conjugator(grid)


def check_inductive_class(
    spec: DressedSpec,
    psi: WaveField,
    kappa: float,
    kappa_base: float,
    direction: WaveDirection = WaveDirection.INPUT,
) -> None:
    """检查 κ > κ° 以及共轭后的动量支撑

    Raises:
        NotInInductiveClass: κ ≤ κ° 或支撑超出 κ° 子空间
    """
    if kappa <= kappa_base:
        raise NotInInductiveClass(f"κ = {kappa} 必须大于 κ° = {kappa_base}")
    conjugated = apply_pointwise(psi, _conjugator(spec, psi.grid, direction))
    side = HardySide.MINUS if direction is WaveDirection.INPUT else HardySide.PLUS
    total = conjugated.norm_sq()
    outside = outside_hardy_mass(conjugated, side, kappa_base)
    if total > 0 and outside > config.NUMERICS.HARDY_TOL * total:
        raise NotInInductiveClass(f"κ° = {kappa_base} 子空间之外的质量 {outside:.3e} (总质量 {total:.3e})")


def dressed_propagate(
    spec: DressedSpec,
    psi: WaveField,
    t: float,
    kappa: float,
    kappa_base: float,
    direction: WaveDirection = WaveDirection.INPUT,
) -> WaveField:
    """按共轭后的 ω̂_{ϰ,κ} 幺正传播, 保持 κ° 子空间不变"""
    check_inductive_class(spec, psi, kappa, kappa_base, direction)
    if t == 0:
        return psi.position()
    omega, omega_tilde = omega_symbol(spec, psi.grid, kappa)
    symbol = omega_tilde if direction is WaveDirection.INPUT else omega
    conjugator = _conjugator(spec, psi.grid, direction)
    inner = apply_pointwise(psi, conjugator)
    evolved = apply_propagator(inner, symbol, t)
    return apply_pointwise(evolved, np.conj(np.swapaxes(conjugator, -1, -2)))


def phase_eigenvalues(spec: DressedSpec, grid: SpectralGrid, kappa: float) -> np.ndarray:
    """k + ω_κ(−k) 的特征值 k − κ + ((κ − k)² + w_i)^{1/2}, 形状 (N, n)"""
    momenta = grid.momenta[:, None]
    weights = spec.model.mass_squared_eigenvalues[None, :]
    return momenta - kappa + np.sqrt((kappa - momenta) ** 2 + weights)


def phase_factors(spec: DressedSpec, grid: SpectralGrid, t: float, kappa: float) -> np.ndarray:
    """逐模式的 e^{−ikt}·e^{−itω̃_κ(k)}, 形状 (N, n, n)"""
    _, omega_tilde = omega_symbol(spec, grid, kappa)
    return np.exp(-1j * grid.momenta * t)[:, None, None] * omega_tilde.exponential(t)


def limit_error_integral(
    spec: DressedSpec,
    amplitudes: np.ndarray,
    grid: SpectralGrid,
    t: float,
    kappa: float,
    kappa_base: float,
) -> float:
    """I(κ°, κ) = (1/2π)∫_{k<κ°}‖(e^{−i(k + ω_κ(−k))t} − 1)g(k)‖²dk, 在动量网格上求和

    Raises:
        UnnormalizedAmplitudes: ‖g‖² 偏离 1
        SupportViolation: g 在 k ≥ κ° 处有质量
    """
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if amplitudes.ndim == 1:
        amplitudes = amplitudes[:, None]
    scale = 1.0 / (grid.points * grid.dz)
    norm_sq = scale * float(np.sum(np.abs(amplitudes) ** 2))
    if abs(norm_sq - 1.0) > config.NUMERICS.NORMALIZATION_TOL:
        raise UnnormalizedAmplitudes(norm_sq)
    inside = grid.momenta < kappa_base
    outside = scale * float(np.sum(np.abs(amplitudes[~inside]) ** 2))
    if outside > config.NUMERICS.SUPPORT_TOL:
        raise SupportViolation(f"g 在 k ≥ κ° = {kappa_base} 处的质量为 {outside:.3e}")
    identity = np.eye(amplitudes.shape[1])[None, :, :]
    factors = phase_factors(spec, grid, t, kappa) - identity
    gaps = apply_matrices(factors[inside], amplitudes[inside])
    return scale * float(np.sum(np.abs(gaps) ** 2))


def limit_error_distance(
    spec: DressedSpec,
    psi: WaveField,
    t: float,
    kappa: float,
    kappa_base: float,
) -> float:
    """在 ε_ϰ 共轭标架下直接计算 ‖shift(−t)∘propagate(t)g − g‖²"""
    frame = apply_pointwise(psi, spec.input_conjugator(psi.grid))
    plain = DressedSpec(spec.model, np.zeros((spec.dim, spec.dim)))
    propagated = dressed_propagate(plain, frame, t, kappa, kappa_base)
    return (grid_shift(propagated, -t) - frame).norm_sq()


def sup_phase_factor(spec: DressedSpec, grid: SpectralGrid, t: float, kappa: float, kappa_base: float) -> float:
    """max_{k<κ°} ‖e^{−i(k + ω_κ(−k))t} − 1‖"""
    phases = phase_eigenvalues(spec, grid, kappa)[grid.momenta < kappa_base]
    if phases.size == 0:
        return 0.0
    return float(np.max(np.abs(np.exp(-1j * t * phases) - 1.0)))


def phase_monotonicity_defect(spec: DressedSpec, grid: SpectralGrid, kappa: float, kappa_base: float) -> float:
    """k ↦ k + ω_κ(−k) 在 k < κ° 上逐特征值单调不减的最大违反量"""
    order = np.argsort(grid.momenta)
    momenta = grid.momenta[order]
    phases = phase_eigenvalues(spec, grid, kappa)[order][momenta < kappa_base]
    if phases.shape[0] < 2:
        return 0.0
    return float(max(0.0, -np.min(np.diff(phases, axis=0))))


def gap_inequality(varkappa, w):
    """√(ϰ² + w²) − ϰ 与 w²/2ϰ, 左端以 w²/(√(ϰ² + w²) + ϰ) 稳定计算

    Returns:
        (lhs, rhs, holds)
    """
    varkappa = np.asarray(varkappa, dtype=float)
    w = np.asarray(w, dtype=float)
    lhs = w**2 / (np.sqrt(varkappa**2 + w**2) + varkappa)
    rhs = w**2 / (2.0 * varkappa)
    return lhs, rhs, lhs < rhs


def kappa_threshold(kappa_base: float, m: float, t: float, eps: float) -> float:
    """κ′ = κ° + max{m, |t|m²/ε}"""
    if eps <= 0:
        raise NonpositiveTolerance(f"容差 ε 必须为正, 实际 {eps!r}")
    return kappa_base + max(m, abs(t) * m**2 / eps)


def error_bound(t: float, m: float, varkappa: float) -> float:
    """(|t|m²/ϰ)²"""
    return (abs(t) * m**2 / varkappa) ** 2


def _kappa_shift(model: ModelSpec, kappa_shift: Optional[np.ndarray]) -> np.ndarray:
    return model.kappa_op if kappa_shift is None else np.asarray(kappa_shift, dtype=complex)


def limit_truncated_chi(
    model: ModelSpec,
    psi: WaveField,
    t: float,
    kappa_shift: Optional[np.ndarray] = None,
) -> WaveField:
    """极限截断波 χᵗ(z) = ε_ϰ(t)χ_t(z + t), χ_t = ψ + (σ_ϰ − 1)1̂_tψ"""
    grid = psi.grid
    steps = grid.steps(t)
    generator = _kappa_shift(model, kappa_shift)
    values = np.array(psi.position().values)
    count = grid.count_below(t)
    if count:
        jumps = model.jump_operators(grid.z[:count], kappa=generator)
        values[:count] = apply_matrices(jumps, values[:count])
    shifted = np.roll(values, -steps, axis=0)
    return WaveField(grid, shifted @ evolve(generator, t).T)


def dressed_truncated_chi(
    spec: DressedSpec,
    psi: WaveField,
    t: float,
    kappa: float,
    kappa_base: float,
) -> WaveField:
    """κ 截断波 e^{−itω̂}[ψ + (σ_ϰ − 1)π̂_κᵗψ], π̂_κᵗ = e^{itω̂}1̂₀e^{−itω̂}"""
    grid = psi.grid
    forward = dressed_propagate(spec, psi, t, kappa, kappa_base)
    jumps = spec.sigma_kappa(grid)
    count = grid.count_below(0.0)
    values = np.array(forward.values)
    values[:count] = apply_matrices(jumps[:count], values[:count])
    return WaveField(grid, values)


def jump_equation_residual(
    model: ModelSpec,
    psi: WaveField,
    t: float,
    dt: float,
    kappa_shift: Optional[np.ndarray] = None,
) -> np.ndarray:
    """相互作用表象 χ(τ, z) = e^{−iϰτ}[ψ + (σ_ϰ − 1)1_{z<τ}ψ](z) 下跃迁方程的逐点残差

    ‖χ(t+dt) − χ(t) + iϰχ(t)dt − (σ − 1)χ(t)·d1_t(z)‖, d1_t(z) = 1[t ≤ z < t + dt]
    """
    grid = psi.grid
    grid.steps(dt)
    grid.steps(t)
    generator = _kappa_shift(model, kappa_shift)
    values = psi.position().values
    jumps = model.jump_operators(grid.z, kappa=generator)
    jumped = apply_matrices(jumps, values)

    def interaction(tau: float) -> np.ndarray:
        below = (np.arange(grid.points) < grid.count_below(tau))[:, None]
        return np.where(below, jumped, values) @ evolve(generator, tau).T

    current = interaction(t)
    following = interaction(t + dt)
    increment = np.zeros(grid.points)
    increment[grid.count_below(t) : grid.count_below(t + dt)] = 1.0
    identity = np.eye(model.dim)
    residual = (
        following
        - current
        + 1j * dt * current @ generator.T
        - increment[:, None] * (current @ (model.sigma - identity).T)
    )
    return np.linalg.norm(residual, axis=1)


def fit_convergence_rate(varkappas, errors) -> float:
    """log I 对 log ϰ 的最小二乘斜率, 仅使用 I > 0 的记录"""
    varkappas = np.asarray(varkappas, dtype=float)
    errors = np.asarray(errors, dtype=float)
    usable = np.isfinite(errors) & (errors > 0) & (varkappas > 0)
    if np.count_nonzero(usable) < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(varkappas[usable]), np.log(errors[usable]), 1)
    return float(slope)


@dataclass
class SweepReport:
    """κ 扫描结果"""

    records: List[ConvergenceRecord] = field(default_factory=list)

    @property
    def slope(self) -> float:
        usable = [record for record in self.records if record.status == "ok"]
        return fit_convergence_rate([r.varkappa for r in usable], [r.error_I for r in usable])

    @property
    def monotone(self) -> bool:
        errors = [record.error_I for record in self.records if record.status == "ok"]
        return all(b <= a for a, b in zip(errors, errors[1:]))

    def within_bound(self, slack: float = 0.0) -> bool:
        return all(record.error_I <= record.bound + slack for record in self.records if record.status == "ok")

    @property
    def failed(self) -> List[ConvergenceRecord]:
        return [record for record in self.records if record.status == "failed"]


def _sweep_record(
    sweep: LimitSweepConfig,
    spec: DressedSpec,
    psi0: WaveField,
    kappa: float,
    timings: bool,
) -> ConvergenceRecord:
    started = time.perf_counter()
    varkappa = kappa - sweep.kappa_base
    bound = error_bound(sweep.t, sweep.mass_bound, varkappa)
    try:
        frame = apply_pointwise(psi0, spec.input_conjugator(psi0.grid)).momentum()
        error = limit_error_integral(spec, frame.values, psi0.grid, sweep.t, kappa, sweep.kappa_base)
        distance = limit_error_distance(spec, psi0, sweep.t, kappa, sweep.kappa_base)
        dressed = dressed_truncated_chi(spec, psi0, sweep.t, kappa, sweep.kappa_base)
        limit = limit_truncated_chi(spec.model, psi0, sweep.t, spec.kappa_shift)
        gap = (dressed - limit).norm_sq()
        factor = sup_phase_factor(spec, psi0.grid, sweep.t, kappa, sweep.kappa_base)
    except StudioError as e:
        logger.warning(f"κ = {kappa} 的扫描记录失败: {e}")
        return ConvergenceRecord(
            kappa=kappa,
            varkappa=varkappa,
            error_I=math.nan,
            bound=bound,
            status="failed",
            message=str(e),
        )
    return ConvergenceRecord(
        kappa=kappa,
        varkappa=varkappa,
        error_I=error,
        bound=bound,
        runtime_s=time.perf_counter() - started if timings else 0.0,
        distance_sq=distance,
        truncated_gap_sq=gap,
        sup_factor=factor,
    )


def run_kappa_sweep(
    sweep: LimitSweepConfig,
    spec: DressedSpec,
    psi0: WaveField,
    jobs: int = 1,
    timings: bool = False,
) -> SweepReport:
    """逐个 κ 计算误差积分; 单条记录失败时标记并继续"""
    calls: List[Callable[[], ConvergenceRecord]] = [
        partial(_sweep_record, sweep, spec, psi0, kappa, timings) for kappa in sweep.kappa_list
    ]
    records = run_parallel(calls, jobs=jobs)

    varkappas: List[float] = []
    errors: List[float] = []
    for record in records:
        if record.status == "ok":
            varkappas.append(record.varkappa)
            errors.append(record.error_I)
        record.slope_running = fit_convergence_rate(varkappas, errors)
    logger.info(f"κ 扫描完成: {len(records)} 条记录, 失败 {sum(r.status == 'failed' for r in records)} 条")
    return SweepReport(records=records)


def massless_shift_defect(spec: DressedSpec, psi: WaveField, t: float, kappa: float, kappa_base: float) -> float:
    """μ = 0 时 dressed_propagate 与 ε_ϰ(t)·平移的最大偏差"""
    propagated = dressed_propagate(spec, psi, t, kappa, kappa_base)
    expected = grid_shift(psi, t).values @ evolve(spec.kappa_shift, t).T
    return float(np.max(np.abs(propagated.values - expected)))


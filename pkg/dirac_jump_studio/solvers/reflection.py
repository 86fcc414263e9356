"""
相对论反射模型: 正动能边值问题的谱解

输入共轭为乘以 ε_ϰ(z) = e^{−iϰz}, 输出共轭为乘以 ε_ϰ(−z) = e^{iϰz}。
标量 ϰ = c 时, 共轭后的输入算子作用在网格模式 e^{ikz} 上为 ε(k − c)。
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from ..configs.config import config
from ..exceptions import GridMismatch, NotInHardyClass, ShapeMismatch, SkippedPrecondition
from .linalg import ModelSpec, apply_matrices, as_square, dagger, evolve_batch, operator_norm
from .spectral import (
    HardySide,
    SpectralGrid,
    SymbolTable,
    WaveField,
    apply_pointwise,
    apply_propagator,
    energy_symbol,
    hardy_project,
    indicator_cut,
    outside_hardy_mass,
    reflect,
    side_masses,
    split_at_origin,
)
from .toy_dirac import TimeReversalReport, check_reversal_symmetry


class WaveDirection(Enum):
    """共轭方向"""

    INPUT = "input"
    OUTPUT = "output"


@dataclass(frozen=True, eq=False)
class DressedSpec:
    """带共轭生成元 ϰ 的相对论模型"""

    model: ModelSpec
    kappa_shift: Optional[np.ndarray] = None

    def __post_init__(self):
        shift = self.model.kappa_op if self.kappa_shift is None else as_square(self.kappa_shift, "kappa_shift")
        if shift.shape != self.model.kappa_op.shape:
            raise ShapeMismatch(f"kappa_shift 形状 {shift.shape} 与模型维度 {self.model.dim} 不一致")
        object.__setattr__(self, "kappa_shift", np.array(shift))

    @property
    def dim(self) -> int:
        return self.model.dim

    def symbol(self, grid: SpectralGrid) -> SymbolTable:
        return energy_symbol(self.model, grid)

    def input_conjugator(self, grid: SpectralGrid) -> np.ndarray:
        """ε_ϰ(z) = e^{−iϰz}"""
        return evolve_batch(self.kappa_shift, grid.z)

    def output_conjugator(self, grid: SpectralGrid) -> np.ndarray:
        """ε_ϰ(−z) = e^{iϰz}"""
        return evolve_batch(self.kappa_shift, -grid.z)

    def sigma_kappa(self, grid: SpectralGrid) -> np.ndarray:
        """σ_ϰ(z) = ε_ϰ*(z)σε_ϰ(z)"""
        return self.model.jump_operators(grid.z, kappa=self.kappa_shift)

    def energy_defects(self, grid: SpectralGrid) -> Tuple[float, float]:
        """返回 (ε(k) 的负特征值幅度, max‖ε(−k) − ε(k)‖)"""
        symbol = self.symbol(grid)
        psd = float(max(0.0, -np.min(symbol.eigenvalues())))
        mirrored = symbol.entries[(grid.points - np.arange(grid.points)) % grid.points]
        symmetric = float(np.max(np.abs(mirrored - symbol.entries)))
        return psd, symmetric


@dataclass(frozen=True, eq=False)
class ConjugatedPropagator:
    """共轭传播子 e^{−itε̂_ϰ} = E†·e^{−itε̂}·E, E 为逐点乘法"""

    spec: DressedSpec
    base: SymbolTable
    direction: WaveDirection = WaveDirection.INPUT

    @cached_property
    def conjugator(self) -> np.ndarray:
        if self.direction is WaveDirection.INPUT:
            return self.spec.input_conjugator(self.base.grid)
        return self.spec.output_conjugator(self.base.grid)

    def __call__(self, field: WaveField, t: float) -> WaveField:
        if t == 0:
            return field.position()
        inner = apply_pointwise(field, self.conjugator)
        evolved = apply_propagator(inner, self.base, t)
        return apply_pointwise(evolved, dagger(self.conjugator))


def conjugated_symbol(
    spec: DressedSpec,
    base: SymbolTable,
    direction: WaveDirection = WaveDirection.INPUT,
) -> ConjugatedPropagator:
    return ConjugatedPropagator(spec, base, direction)


@dataclass(frozen=True, eq=False)
class FieldProjector:
    """π̂ᵗ = e^{itε̂_ϰ}·1̂₀·e^{−itε̂_ϰ}"""

    propagator: ConjugatedPropagator
    t: float

    def __call__(self, field: WaveField) -> WaveField:
        forward = self.propagator(field, self.t)
        return self.propagator(indicator_cut(forward, 0.0), -self.t)

    def idempotence_defect(self, field: WaveField) -> float:
        once = self(field)
        twice = self(once)
        return float(np.max(np.abs(twice.values - once.values)))

    def self_adjointness_defect(self, left: WaveField, right: WaveField) -> float:
        return abs(self(left).inner(right) - left.inner(self(right)))


def projector_pi(spec: DressedSpec, grid: SpectralGrid, t: float) -> FieldProjector:
    return FieldProjector(conjugated_symbol(spec, spec.symbol(grid)), t)


@dataclass(frozen=True, eq=False)
class ReflectionSolution:
    phi_input: WaveField
    phi_output: WaveField
    chi: WaveField
    initial_norm_sq: float
    boundary_residual: float

    @property
    def norm_drift(self) -> float:
        return abs(self.chi.norm_sq() - self.initial_norm_sq)

    @property
    def half_line_masses(self) -> Tuple[float, float]:
        return side_masses(self.chi)

    def norm_identity_defect(self) -> float:
        incoming, outgoing = self.half_line_masses
        return abs(incoming + outgoing - self.initial_norm_sq)

    def boundary_current(self) -> float:
        return probability_current(self.phi_input, self.phi_output, 0.0)


def check_hardy_input(spec: DressedSpec, phi0: WaveField) -> None:
    """ε_ϰ 共轭后检查输入 Hardy 类成员

    Raises:
        NotInHardyClass: 类外质量超过 HARDY_TOL
    """
    conjugated = apply_pointwise(phi0, spec.input_conjugator(phi0.grid))
    total = conjugated.norm_sq()
    outside = outside_hardy_mass(conjugated, HardySide.MINUS, 0.0)
    if total > 0 and outside > config.NUMERICS.HARDY_TOL * total:
        raise NotInHardyClass(outside, total)


def reflection_boundary_residual(spec: DressedSpec, chi: WaveField) -> float:
    """‖φ̃ᵗ(0) − σφᵗ(0)‖, φ̃ᵗ(0) 取原点左侧样本"""
    values = chi.position().values
    origin = chi.grid.origin
    return float(np.linalg.norm(values[origin - 1] - spec.model.sigma @ values[origin]))


def solve_reflect_bvp(spec: DressedSpec, phi0: WaveField, t: float) -> ReflectionSolution:
    """φ_t = φ⁰ + (σ_ϰ − 1)π̂ᵗφ⁰, φᵗ = e^{−itε̂_ϰ}φ_t

    Raises:
        NotInHardyClass: φ⁰ 不在输入类中
        NonCommensurateShift: t 不是 dz 的整数倍
    """
    grid = phi0.grid
    grid.steps(t)
    check_hardy_input(spec, phi0)
    phi0 = phi0.position()
    propagator = conjugated_symbol(spec, spec.symbol(grid))
    projected = FieldProjector(propagator, t)(phi0)
    jump = spec.sigma_kappa(grid) - np.eye(spec.dim)[None, :, :]
    truncated = phi0 + apply_pointwise(projected, jump)
    chi = propagator(truncated, t)
    phi_input, phi_output = split_at_origin(chi)
    return ReflectionSolution(
        phi_input=phi_input,
        phi_output=phi_output,
        chi=chi,
        initial_norm_sq=phi0.norm_sq(),
        boundary_residual=reflection_boundary_residual(spec, chi),
    )


def initial_output(spec: DressedSpec, phi0: WaveField) -> WaveField:
    """φ̃⁰(−z) = σ_ϰ(z)φ⁰(z)"""
    return reflect(apply_pointwise(phi0, spec.sigma_kappa(phi0.grid)))


def _pair_connection_defect(spec: DressedSpec, phi: WaveField, phi_tilde: WaveField) -> float:
    expected = apply_matrices(spec.sigma_kappa(phi.grid), phi.position().values)
    return float(np.max(np.linalg.norm(reflect(phi_tilde).values - expected, axis=1)))


def _extended_pair(spec: DressedSpec, phi: WaveField, phi_tilde: WaveField, t: float) -> Tuple[WaveField, WaveField]:
    base = spec.symbol(phi.grid)
    incoming = conjugated_symbol(spec, base, WaveDirection.INPUT)
    outgoing = conjugated_symbol(spec, base, WaveDirection.OUTPUT)
    return incoming(phi, t), outgoing(phi_tilde, t)


def reflection_connection_defect(spec: DressedSpec, phi0: WaveField, t: float) -> float:
    """φ̃ᵗ(−z) = σ_ϰ(z)φᵗ(z) 对延拓波在时刻 t 的最大偏差"""
    phi_t, phi_tilde_t = _extended_pair(spec, phi0.position(), initial_output(spec, phi0), t)
    return _pair_connection_defect(spec, phi_t, phi_tilde_t)


def _conj(field: WaveField) -> WaveField:
    position = field.position()
    return position.with_values(np.conj(position.values))


def _max_gap(left: WaveField, right: WaveField) -> float:
    return float(np.max(np.linalg.norm(left.values - right.values, axis=1)))


def reflection_time_reversal_check(spec: DressedSpec, phi0: WaveField, t: float) -> TimeReversalReport:
    """conj + (t ↦ −t) + 输入/输出交换后的解集不变性

    Raises:
        SkippedPrecondition: conj(σ) ≠ σ⁻¹, conj(ϰ) ≠ ϰ 或 conj(μ²) ≠ μ²
    """
    check_reversal_symmetry(ModelSpec(spec.kappa_shift, spec.model.sigma, spec.model.mass_op))
    mass_sq = spec.model.mass_op @ spec.model.mass_op
    mass_defect = operator_norm(np.conj(mass_sq) - mass_sq)
    if mass_defect > config.NUMERICS.PRECONDITION_TOL * max(1.0, operator_norm(mass_sq)):
        raise SkippedPrecondition(f"conj(μ²) ≠ μ², 偏差 {mass_defect:.3e}")

    phi0 = phi0.position()
    phi_tilde0 = initial_output(spec, phi0)
    backward_input, backward_output = _extended_pair(spec, phi0, phi_tilde0, -t)
    forward_input, forward_output = _extended_pair(spec, _conj(phi_tilde0), _conj(phi0), t)
    return TimeReversalReport(
        input_defect=_max_gap(forward_input, _conj(backward_output)),
        output_defect=_max_gap(forward_output, _conj(backward_input)),
        connection_defect=_pair_connection_defect(spec, forward_input, forward_output),
    )


def _nearest_index(grid: SpectralGrid, z: float) -> int:
    return int(round((z + grid.half_width) / grid.dz)) % grid.points


def probability_current(phi: WaveField, phi_tilde: WaveField, z: float) -> float:
    """j(z) = ‖φ̃(z)‖² − ‖φ(z)‖², 取最近的网格样本"""
    if phi.grid != phi_tilde.grid:
        raise GridMismatch("φ 与 φ̃ 不在同一网格上")
    index = _nearest_index(phi.grid, z)
    return float(
        np.sum(np.abs(phi_tilde.position().values[index]) ** 2) - np.sum(np.abs(phi.position().values[index]) ** 2),
    )


def current_profile(phi: WaveField, phi_tilde: WaveField) -> np.ndarray:
    """所有网格点上的 j(z)"""
    if phi.grid != phi_tilde.grid:
        raise GridMismatch("φ 与 φ̃ 不在同一网格上")
    return np.sum(np.abs(phi_tilde.position().values) ** 2, axis=1) - np.sum(np.abs(phi.position().values) ** 2, axis=1)


def massless_transport_defect(spec: DressedSpec, field: WaveField, t: float) -> float:
    """无质量左行波上 π̂ᵗ 与平移后截断 1̂_t 的一致性

    比较 Π⁻(π̂ᵗf) 与 Π⁻(1̂_t f), 以及二次型 ⟨f, π̂ᵗf⟩ 与 ⟨f, 1̂_t f⟩。
    """
    projector = projector_pi(spec, field.grid, t)
    projected = projector(field)
    cut = indicator_cut(field, t)
    left_movers = hardy_project(projected, HardySide.MINUS) - hardy_project(cut, HardySide.MINUS)
    form = abs(field.inner(projected) - field.inner(cut))
    return max(float(np.max(np.abs(left_movers.values))), form)

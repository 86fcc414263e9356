from typing import List

import numpy as np
import scipy.stats

from ...schemas.records import ItoRecord, ToyRecord
from ...solvers.linalg import ModelSpec, operator_norm
from ...solvers.spectral import WaveField, gaussian_packet, monitor_support
from ...solvers.stochastic import philox_generator
from ...solvers.toy_dirac import (
    TruncatedState,
    cocycle_oracle,
    cocycle_v,
    indicator_cocycle_defect,
    io_reflection_pair,
    ito_residual,
    solve_toy_bvp,
    time_reversal_check,
    toy_boundary_defect,
    toy_group_law_defect,
)
from ...solvers.ultra_limit import jump_equation_residual
from ...utils.logger import logger
from ..base_scenario import BaseScenario, ScenarioOutcome


def random_model(rng: np.random.Generator, dim: int) -> ModelSpec:
    """随机厄米 ϰ 与 Haar 随机幺正 σ"""
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    kappa = (raw + np.conj(raw).T) / 2
    if dim == 1:
        sigma = np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    else:
        sigma = scipy.stats.unitary_group.rvs(dim, random_state=rng)
    return ModelSpec(kappa, sigma, np.zeros((dim, dim)))


def refinement_ratios(values: List[float]) -> List[float]:
    return [coarse / fine if fine > 0 else float("nan") for coarse, fine in zip(values, values[1:])]


class ToyEquivalenceScenario(BaseScenario):
    """玩具模型: 闭式解与逐点余圈、群律、Ito 阶数、输入/输出对与时间反演"""

    name = "toy-equivalence"

    def execute(self) -> ScenarioOutcome:
        grid = self.config.GRID.build()
        model = self.config.MODEL.build()
        if not self.validate(model, grid):
            return self.outcome
        eta = self.config.eta()
        run = self.config.RUN
        tol = self.tolerances
        chi0 = run.PACKET.build(grid, eta)
        monitor_support(chi0, "χ⁰")

        self._check_oracle(model, chi0)
        self._check_random_models(chi0)
        self._check_ito(model, eta)
        self._check_io_pair(model, chi0)

        worst = max((record.oracle_defect for record in self.outcome.records if isinstance(record, ToyRecord)), default=0.0)
        self.outcome.summary.update(
            {
                "points": grid.points,
                "half_width": grid.half_width,
                "times": list(run.TIMES),
                "max_oracle_defect": worst,
                "oracle_tolerance": tol.ORACLE_DEFECT,
            },
        )
        return self.outcome

    def _check_oracle(self, model: ModelSpec, chi0: WaveField) -> None:
        tol = self.tolerances
        for t in self.config.RUN.TIMES:
            chi = solve_toy_bvp(model, chi0, t)
            oracle = cocycle_oracle(model, chi0, t)
            defect = float(np.max(np.linalg.norm(chi.values - oracle.values, axis=1)))
            drift = abs(chi.norm_sq() - chi0.norm_sq())
            record = ToyRecord(
                case="configured",
                t=t,
                oracle_defect=defect,
                norm_drift=drift,
                boundary_defect=toy_boundary_defect(model, chi),
                group_law_defect=toy_group_law_defect(model, chi0, t, t),
            )
            self.outcome.records.append(record)
            self.check(f"oracle_t={t:g}", "AC-1", defect, tol.ORACLE_DEFECT)
            self.check(f"norm_identity_t={t:g}", "AC-1", TruncatedState(chi).norm_identity_defect(), tol.UNITARITY)
            self.check(f"group_law_t={t:g}", "AC-2", record.group_law_defect, tol.COCYCLE)
            self.outcome.fields[f"chi_t={t:g}"] = chi

        r, t = self.config.RUN.TIMES[0], self.config.RUN.TIMES[-1]
        self.check("indicator_cocycle", "AC-2", indicator_cocycle_defect(chi0.grid, r, t), 0.0)

    def _check_random_models(self, chi0: WaveField) -> None:
        """随机模型上的余圈律 V(r, s−t)V(t, s) = V(r+t, s) 与幺正性"""
        run = self.config.RUN
        tol = self.tolerances
        rng = philox_generator(run.SEED)
        times = run.TIMES
        samples = np.linspace(-1.0, 3.0, 33)
        worst_law, worst_unitarity = 0.0, 0.0
        for case in range(run.RANDOM_CASES):
            model = random_model(rng, chi0.dim)
            r, t = times[case % len(times)], times[(case + 1) % len(times)]
            for s in samples:
                composed = cocycle_v(model, r, s - t) @ cocycle_v(model, t, s)
                worst_law = max(worst_law, operator_norm(composed - cocycle_v(model, r + t, s)))
            chi = solve_toy_bvp(model, chi0, t)
            worst_unitarity = max(worst_unitarity, abs(chi.norm() / chi0.norm() - 1.0))
            self.outcome.records.append(
                ToyRecord(
                    case=f"random-{case}",
                    t=t,
                    oracle_defect=float(np.max(np.linalg.norm(chi.values - cocycle_oracle(model, chi0, t).values, axis=1))),
                    norm_drift=abs(chi.norm_sq() - chi0.norm_sq()),
                    boundary_defect=toy_boundary_defect(model, chi),
                    group_law_defect=toy_group_law_defect(model, chi0, r, t),
                ),
            )
        self.check("random_cocycle_law", "AC-2", worst_law, tol.COCYCLE, detail=f"{run.RANDOM_CASES} 个随机模型")
        self.check("random_unitarity", "AC-2", worst_unitarity, tol.UNITARITY)

    def _check_ito(self, model: ModelSpec, eta: np.ndarray) -> None:
        run = self.config.RUN
        tol = self.tolerances
        t = run.ITO_TIME
        off_jump = [ito_residual(model, t, dt, run.ITO_OFF_JUMP, eta) for dt in run.DT_LIST]
        at_jump = [ito_residual(model, t, dt, t, eta) for dt in run.DT_LIST]
        off_ratios = refinement_ratios(off_jump)
        jump_ratios = refinement_ratios(at_jump)
        for index, dt in enumerate(run.DT_LIST):
            self.outcome.tables.setdefault("ito", []).append(
                ItoRecord(
                    dt=dt,
                    off_jump_residual=off_jump[index],
                    jump_residual=at_jump[index],
                    off_jump_ratio=off_ratios[index - 1] if index else float("nan"),
                    jump_ratio=jump_ratios[index - 1] if index else float("nan"),
                ),
            )
        worst_off = max(abs(ratio - tol.RATIO_OFF_JUMP) for ratio in off_ratios)
        worst_jump = max(abs(ratio - tol.RATIO_JUMP) for ratio in jump_ratios)
        self.check("ito_off_jump_order", "AC-3", worst_off, tol.RATIO_WIDTH, detail=f"比值 {off_ratios}")
        self.check("ito_jump_order", "AC-3", worst_jump, tol.RATIO_WIDTH, detail=f"比值 {jump_ratios}")

        # 网格版本: 波包中心放在 t 处, 窗口外的最大残差点与 dt 无关; 跃迁处取 z = t 的样本
        ito_grid = run.ITO_GRID.build()
        psi = gaussian_packet(ito_grid, t, 0.5, 0.0, eta)
        jump_index = ito_grid.count_below(t)
        grid_off: List[float] = []
        grid_jump: List[float] = []
        for dt in run.DT_LIST:
            residual = jump_equation_residual(model, psi, t, dt)
            window = np.zeros(ito_grid.points, dtype=bool)
            window[jump_index : ito_grid.count_below(t + dt)] = True
            grid_off.append(float(np.max(residual[~window])))
            grid_jump.append(float(residual[jump_index]))
        grid_ratios = refinement_ratios(grid_off)
        grid_jump_ratios = refinement_ratios(grid_jump)
        self.check(
            "jump_equation_off_jump_order",
            "AC-3",
            max(abs(ratio - tol.RATIO_OFF_JUMP) for ratio in grid_ratios),
            tol.RATIO_WIDTH,
            detail=f"比值 {grid_ratios}",
        )
        self.check(
            "jump_equation_jump_order",
            "AC-3",
            max(abs(ratio - tol.RATIO_JUMP) for ratio in grid_jump_ratios),
            tol.RATIO_WIDTH,
            detail=f"比值 {grid_jump_ratios}",
        )
        self.outcome.summary["jump_equation_jump_residuals"] = grid_jump

    def _check_io_pair(self, model: ModelSpec, psi0: WaveField) -> None:
        tol = self.tolerances
        for t in self.config.RUN.TIMES:
            pair = self.guard(f"io_pair_t={t:g}", "AC-1", lambda t=t: io_reflection_pair(model, psi0, t))
            if pair is not None:
                self.check(f"io_mass_t={t:g}", "AC-1", pair.mass_drift, tol.UNITARITY)
                self.check(f"io_connection_t={t:g}", "AC-1", pair.connection_defect, tol.ORACLE_DEFECT)
            report = self.guard(f"time_reversal_t={t:g}", "AC-10", lambda t=t: time_reversal_check(model, psi0, t))
            if report is not None:
                self.check(f"time_reversal_t={t:g}", "AC-10", report.max_defect, tol.TIME_REVERSAL)
        logger.info(f"[{self.name}] 完成 {len(self.config.RUN.TIMES)} 个时间点的输入/输出检验")

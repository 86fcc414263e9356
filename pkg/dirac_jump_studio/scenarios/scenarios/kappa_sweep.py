import math

import numpy as np

from ...solvers.linalg import ModelSpec
from ...solvers.reflection import DressedSpec
from ...solvers.spectral import WaveField, indicator_cut, monitor_support
from ...solvers.toy_dirac import solve_toy_bvp
from ...solvers.ultra_limit import (
    SweepReport,
    gap_inequality,
    kappa_threshold,
    limit_truncated_chi,
    massless_shift_defect,
    phase_monotonicity_defect,
    run_kappa_sweep,
    sup_phase_factor,
)
from ...utils.logger import logger
from ...utils.presets import resolve_matrix
from ..base_scenario import BaseScenario, ScenarioOutcome

PAULI_ETA = np.array([0.8, 0.6], dtype=complex)


class KappaSweepScenario(BaseScenario):
    """超相对论极限: κ 扫描、阈值公式、标量不等式与极限/玩具一致性"""

    name = "kappa-sweep"

    def execute(self) -> ScenarioOutcome:
        grid = self.config.GRID.build()
        model = self.config.MODEL.build()
        if not self.validate(model, grid):
            return self.outcome
        spec = DressedSpec(model, self.config.MODEL.kappa_shift())
        run = self.config.RUN
        psi0 = run.PACKET.build(grid, self.config.eta())
        monitor_support(psi0, "ψ⁰")

        sweep = self.config.sweep_config()
        report = run_kappa_sweep(sweep, spec, psi0, jobs=self.jobs, timings=self.config.OUTPUT.TIMINGS)
        self.outcome.records.extend(report.records)
        self._check_sweep(report, spec, psi0)
        self._check_massless(spec, psi0)
        self._check_threshold(spec, psi0)
        self._check_scalar_inequality()
        self._check_toy_consistency(spec, psi0)

        self.outcome.summary.update(
            {
                "kappa_base": run.KAPPA_BASE,
                "kappa_list": list(run.KAPPA_LIST),
                "t": run.TIME,
                "mass_bound": sweep.mass_bound,
                "slope": report.slope,
            },
        )
        return self.outcome

    def _check_sweep(self, report: SweepReport, spec: DressedSpec, psi0: WaveField) -> None:
        tol = self.tolerances
        run = self.config.RUN
        self.check("records_ok", "AC-6", len(report.failed), 0, detail=", ".join(r.message for r in report.failed))
        if self.config.sweep_config().mass_bound == 0:
            # 无质量模型: 界为零, I 只剩舍入误差, 斜率无意义
            errors = [r.error_I for r in report.records if r.status == "ok"]
            self.check("error_bound", "AC-6", max(errors, default=0.0), tol.MASSLESS, passed=report.within_bound(tol.MASSLESS))
            return
        worst = max((r.error_I / r.bound for r in report.records if r.status == "ok" and r.bound > 0), default=0.0)
        self.check("error_bound", "AC-6", worst, 1.0, passed=report.within_bound(), detail="max I/bound")
        self.check("error_monotone", "AC-6", 0.0, 0.0, passed=report.monotone)
        self.check("convergence_slope", "AC-6", report.slope, tol.SLOPE)
        for record in report.records:
            if record.status != "ok":
                continue
            scale = max(1.0, record.error_I)
            self.check(f"distance_κ={record.kappa:g}", "AC-6", abs(record.distance_sq - record.error_I) / scale, tol.CROSS)
            self.check(f"truncated_gap_κ={record.kappa:g}", "AC-8", abs(record.truncated_gap_sq - record.error_I) / scale, tol.CROSS)
            monotonicity = phase_monotonicity_defect(spec, psi0.grid, record.kappa, run.KAPPA_BASE)
            self.check(f"phase_monotone_κ={record.kappa:g}", "AC-6", monotonicity, 1e-12)

    def _check_massless(self, spec: DressedSpec, psi0: WaveField) -> None:
        """无质量对照: I 只剩舍入误差, 输入传播恰为平移"""
        tol = self.tolerances
        model = spec.model
        massless = DressedSpec(model.with_mass(np.zeros_like(model.mass_op), 0.0), spec.kappa_shift)
        report = run_kappa_sweep(self.config.sweep_config(mass_bound=0.0), massless, psi0, jobs=self.jobs)
        errors = [record.error_I for record in report.records]
        self.check("massless_error", "AC-6", max(errors, default=math.nan), tol.MASSLESS)
        self.check("massless_bound", "AC-6", 0.0, 0.0, passed=report.within_bound(slack=tol.MASSLESS))
        kappa = self.config.RUN.KAPPA_LIST[0]
        defect = massless_shift_defect(massless, psi0, self.config.RUN.TIME, kappa, self.config.RUN.KAPPA_BASE)
        self.check("massless_shift", "AC-6", defect, tol.CROSS)

    def _check_threshold(self, spec: DressedSpec, psi0: WaveField) -> None:
        run = self.config.RUN
        sweep = self.config.sweep_config()
        threshold = kappa_threshold(run.KAPPA_BASE, sweep.mass_bound, run.TIME, run.EPSILON)
        above = math.floor(threshold) + 1.0
        factor = sup_phase_factor(spec, psi0.grid, run.TIME, above, run.KAPPA_BASE)
        self.outcome.summary.update({"kappa_threshold": threshold, "kappa_above_threshold": above, "sup_factor": factor})
        self.check("sup_factor_above_threshold", "AC-7", factor, run.EPSILON, passed=factor < run.EPSILON)

    def _check_scalar_inequality(self) -> None:
        """10×10 网格上的 √(ϰ² + w²) − ϰ < w²/2ϰ, 所有点满足 ϰ > w > 0"""
        varkappa = np.linspace(1.0, 10.0, 10)[:, None]
        fractions = np.linspace(0.05, 0.95, 10)[None, :]
        lhs, rhs, holds = gap_inequality(varkappa, fractions * varkappa)
        self.check("scalar_inequality", "AC-5", float(np.max(lhs - rhs)), 0.0, passed=bool(np.all(holds)))
        spot_lhs, spot_rhs, spot_holds = gap_inequality(10.0, 1.0)
        self.check(
            "scalar_inequality_spot",
            "AC-5",
            abs(float(spot_lhs) - 0.0498756),
            1e-7,
            passed=bool(spot_holds) and abs(float(spot_lhs) - 0.0498756) < 1e-7 and float(spot_rhs) == 0.05,
        )

    def _check_toy_consistency(self, spec: DressedSpec, psi0: WaveField) -> None:
        """极限截断波等于玩具解, 初值只在 z ≥ 0 上, 跃迁全部由动力学产生"""
        t = self.config.RUN.TIME
        grid = psi0.grid
        models = [(ModelSpec(spec.kappa_shift, spec.model.sigma, spec.model.mass_op), psi0)]
        # n = 2 的非对易情形
        pauli = ModelSpec(resolve_matrix("pauli-z", 2), resolve_matrix("pauli-x", 2), np.zeros((2, 2)))
        models.append((pauli, self.config.RUN.PACKET.build(grid, PAULI_ETA)))
        worst = 0.0
        for model, psi in models:
            chi0 = indicator_cut(psi, 0.0, keep_below=False)
            limit = limit_truncated_chi(model, chi0, t)
            toy = solve_toy_bvp(model, chi0, t)
            worst = max(worst, float(np.max(np.linalg.norm(limit.values - toy.values, axis=1))))
        self.check("limit_toy_consistency", "AC-8", worst, self.tolerances.CROSS, detail="n = 1 与 n = 2 (pauli)")
        logger.debug(f"[{self.name}] 极限/玩具偏差 {worst:.3e}")

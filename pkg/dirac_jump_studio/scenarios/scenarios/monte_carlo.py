import numpy as np

from ...schemas.records import EnsembleSummary
from ...solvers.stochastic import (
    JumpDensity,
    agreement_limit,
    deterministic_expectation,
    generate_ensemble,
    mc_expectation,
    quadrature_expectation,
)
from ...utils.expression import compile_density
from ...utils.logger import logger
from ..base_scenario import BaseScenario, ScenarioOutcome


class MonteCarloScenario(BaseScenario):
    """随机跃迁时刻的蒙特卡洛期望与确定性边值解、自适应积分的一致性"""

    name = "monte-carlo"

    def execute(self) -> ScenarioOutcome:
        grid = self.config.GRID.build()
        model = self.config.MODEL.build()
        if not self.validate(model, grid):
            return self.outcome
        run = self.config.RUN
        tol = self.tolerances
        eta = self.config.eta()
        observable = self.config.observable()

        density = self.guard("density", "AC-9", lambda: JumpDensity.from_expression(grid, run.DENSITY))
        if density is None:
            return self.outcome
        estimate = mc_expectation(model, density, observable, run.TIME, run.SAMPLES, run.SEED, eta, jobs=self.jobs)
        deterministic = deterministic_expectation(model, density, observable, run.TIME, eta)
        quadrature = quadrature_expectation(model, compile_density(run.DENSITY), observable, run.TIME, eta)

        self.check(
            "mc_vs_quadrature",
            "AC-9",
            abs(estimate.mean - quadrature),
            run.SIGMAS * estimate.stderr,
            detail=f"均值 {estimate.mean:.6f}, 积分 {quadrature:.6f}",
        )
        self.check(
            "mc_vs_deterministic",
            "AC-9",
            abs(estimate.mean - deterministic.value),
            agreement_limit(estimate.stderr, run.SIGMAS, grid.dz, observable),
        )
        self.check("trajectory_norms", "AC-9", estimate.norm_defect, tol.STATE_NORM)

        # A = I 时网格质量与尾部质量合计为 1
        unit = deterministic_expectation(model, density, np.eye(model.dim), run.TIME, eta)
        self.check(
            "deterministic_unitarity",
            "AC-9",
            abs(unit.value - 1.0),
            tol.NORM,
            detail=f"尾部质量 {unit.tail_mass:.3e}",
        )

        # 不同的工作线程数必须给出逐位相同的系综
        replay = generate_ensemble(model, density, eta, run.TIME, run.SAMPLES, run.SEED, jobs=max(2, self.jobs + 1))
        identical = bool(
            np.array_equal(replay.jump_times, estimate.ensemble.jump_times)
            and np.array_equal(replay.states, estimate.ensemble.states),
        )
        self.check("seed_reproducibility", "AC-9", 0.0 if identical else 1.0, 0.0, passed=identical)

        summary = EnsembleSummary(
            seed=run.SEED,
            M=run.SAMPLES,
            mean=estimate.mean,
            stderr=estimate.stderr,
            deterministic=deterministic.value,
            tail_mass=density.tail_mass,
            quadrature=quadrature,
            norm_defect=estimate.norm_defect,
            ks_statistic=estimate.ks_statistic(density),
        )
        self.outcome.records.append(summary)
        self.outcome.summary.update(summary.model_dump())
        logger.info(f"[{self.name}] 均值 {estimate.mean:.6f} ± {estimate.stderr:.2e}, 积分 {quadrature:.6f}")
        return self.outcome

import math
from typing import List

import numpy as np

from ...schemas.records import RefinementRecord
from ...solvers.reflection import (
    DressedSpec,
    ReflectionSolution,
    massless_transport_defect,
    projector_pi,
    reflection_connection_defect,
    reflection_time_reversal_check,
    solve_reflect_bvp,
)
from ...solvers.spectral import SpectralGrid, monitor_support
from ...utils.logger import logger
from ..base_scenario import BaseScenario, ScenarioOutcome


class ReflectScenario(BaseScenario):
    """相对论反射模型: 投影算子、范数守恒、边界残差的网格收敛与时间反演"""

    name = "reflect"

    def execute(self) -> ScenarioOutcome:
        grid = self.config.GRID.build()
        model = self.config.MODEL.build()
        if not self.validate(model, grid):
            return self.outcome
        spec = DressedSpec(model, self.config.MODEL.kappa_shift())
        eta = self.config.eta()
        t = self.config.RUN.TIME
        tol = self.tolerances

        phi0 = self.config.RUN.PACKET.build(grid, eta)
        monitor_support(phi0, "φ⁰")
        projector = projector_pi(spec, grid, t)
        mirrored = self.config.RUN.PACKET.model_copy(update={"CENTER": -self.config.RUN.PACKET.CENTER}).build(grid, eta)
        self.check("projector_idempotence", "AC-4", projector.idempotence_defect(phi0), tol.PROJECTOR)
        self.check("projector_self_adjoint", "AC-4", projector.self_adjointness_defect(phi0, mirrored), tol.PROJECTOR)

        solution = self.guard("solve_reflect_bvp", "AC-4", lambda: solve_reflect_bvp(spec, phi0, t))
        if solution is not None:
            self._check_solution(solution)
            self.outcome.fields["chi"] = solution.chi

        connection = self.guard("connection", "AC-4", lambda: reflection_connection_defect(spec, phi0, t))
        if connection is not None:
            self.check("connection_persistence", "AC-4", connection, tol.PROJECTOR)

        report = self.guard("time_reversal", "AC-10", lambda: reflection_time_reversal_check(spec, phi0, t))
        if report is not None:
            self.check("time_reversal", "AC-10", report.max_defect, tol.TIME_REVERSAL)

        massless = DressedSpec(model.with_mass(np.zeros_like(model.mass_op), 0.0), spec.kappa_shift)
        self.check("massless_transport", "AC-4", massless_transport_defect(massless, phi0, t), tol.PROJECTOR)

        self._refine(spec)
        self.outcome.summary.update({"points": grid.points, "half_width": grid.half_width, "t": t})
        return self.outcome

    def _check_solution(self, solution: ReflectionSolution) -> None:
        tol = self.tolerances
        self.check("norm_conservation", "AC-4", solution.norm_drift, tol.NORM)
        self.check("norm_identity", "AC-4", solution.norm_identity_defect(), tol.NORM)
        incoming, outgoing = solution.half_line_masses
        self.outcome.summary.update(
            {
                "initial_norm_sq": solution.initial_norm_sq,
                "incoming_mass": incoming,
                "outgoing_mass": outgoing,
                "boundary_residual": solution.boundary_residual,
                "boundary_current": solution.boundary_current(),
            },
        )

    def _refine(self, spec: DressedSpec) -> None:
        run = self.config.RUN
        tol = self.tolerances
        eta = self.config.eta()
        residuals: List[float] = []
        for points in run.REFINE_POINTS:
            grid = SpectralGrid(self.config.GRID.HALF_WIDTH, points)
            phi0 = run.PACKET.build(grid, eta)
            solution = self.guard(f"refine_N={points}", "AC-4", lambda phi0=phi0: solve_reflect_bvp(spec, phi0, run.TIME))
            if solution is None:
                return
            current = solution.boundary_current()
            ratio = residuals[-1] / solution.boundary_residual if residuals and solution.boundary_residual > 0 else math.nan
            residuals.append(solution.boundary_residual)
            self.outcome.records.append(
                RefinementRecord(
                    points=points,
                    dz=grid.dz,
                    boundary_residual=solution.boundary_residual,
                    norm_drift=solution.norm_drift,
                    boundary_current=current,
                    halving_ratio=ratio,
                ),
            )
            # 边界条件精确成立时 j(0) = 0, 残差为 r 时 |j(0)| = O(r²)
            bound = tol.CURRENT_FACTOR * solution.boundary_residual**2
            self.check(f"current_bound_N={points}", "AC-4", abs(current), bound + 1e-15, detail=f"r = {solution.boundary_residual:.3e}")
            if not math.isnan(ratio):
                self.check(f"halving_N={points}", "AC-4", abs(ratio / 2.0 - 1.0), tol.HALVING, detail=f"比值 {ratio:.4f}")
        logger.info(f"[{self.name}] 边界残差细化序列: {residuals}")

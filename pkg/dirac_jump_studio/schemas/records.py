import math
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator


class AssertionResult(BaseModel):
    """单条数值断言"""

    name: str = Field(description="断言名称")
    criterion: str = Field(description="对应的验收条目编号, 如 AC-1")
    passed: bool = Field(description="是否通过")
    measured: Optional[float] = Field(default=None, description="测得值")
    limit: Optional[float] = Field(default=None, description="阈值")
    detail: str = Field(default="", description="补充说明")


class ScenarioReport(BaseModel):
    """场景运行报告, 写出为 report.json"""

    scenario: str
    passed: bool
    assertions: List[AssertionResult] = Field(default_factory=list)
    failed: List[str] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)


class LimitSweepConfig(BaseModel):
    """κ 扫描参数"""

    kappa_base: float = Field(gt=0, description="初值的 Hardy 截断 κ°")
    kappa_list: List[float] = Field(min_length=1, description="递增的 κ 序列, 均大于 κ°")
    t: float = Field(description="传播时间")
    mass_bound: float = Field(ge=0, description="质量界 m")
    tolerance: float = Field(default=0.01, gt=0, description="阈值公式中的容差 ε")

    @model_validator(mode="after")
    def _check_kappa_order(self) -> "LimitSweepConfig":
        if any(kappa <= self.kappa_base for kappa in self.kappa_list):
            raise ValueError(f"kappa_list 中的所有 κ 必须大于 κ° = {self.kappa_base}")
        if any(b <= a for a, b in zip(self.kappa_list, self.kappa_list[1:])):
            raise ValueError("kappa_list 必须严格递增")
        return self


class ConvergenceRecord(BaseModel):
    """κ 扫描的单条记录, 字段顺序即 CSV 列顺序"""

    kappa: float
    varkappa: float = Field(description="ϰ = κ − κ°")
    error_I: float = Field(description="误差积分 I(κ°, κ)")
    bound: float = Field(description="(|t|m²/ϰ)²")
    slope_running: float = Field(default=math.nan, description="截至本条记录的 log I 对 log ϰ 拟合斜率")
    runtime_s: float = Field(default=0.0)
    distance_sq: float = Field(default=math.nan, description="‖shift(−t)∘propagate − id‖² 的直接计算值")
    truncated_gap_sq: float = Field(default=math.nan, description="κ 截断波与极限截断波距离的平方")
    sup_factor: float = Field(default=math.nan, description="被积因子的上确界")
    status: Literal["ok", "failed"] = "ok"
    message: str = ""


class ToyRecord(BaseModel):
    """玩具模型等价性检验记录"""

    case: str
    t: float
    oracle_defect: float
    norm_drift: float
    boundary_defect: float
    group_law_defect: float = math.nan


class ItoRecord(BaseModel):
    """Ito 残差细化记录"""

    dt: float
    off_jump_residual: float
    jump_residual: float
    off_jump_ratio: float = math.nan
    jump_ratio: float = math.nan


class RefinementRecord(BaseModel):
    """反射模型网格细化记录"""

    points: int
    dz: float
    boundary_residual: float
    norm_drift: float
    boundary_current: float
    halving_ratio: float = math.nan


class EnsembleSummary(BaseModel):
    """蒙特卡洛系综摘要"""

    seed: int
    M: int
    mean: float
    stderr: float
    deterministic: float
    tail_mass: float
    quadrature: float = math.nan
    norm_defect: float = math.nan
    ks_statistic: float = math.nan

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, ClassVar, Dict, List, Optional, TypeVar

import numpy as np
from pydantic import BaseModel

from ..configs.scenario import ScenarioConfig
from ..exceptions import StudioError
from ..schemas.records import AssertionResult
from ..solvers.linalg import ModelSpec, validate_model
from ..solvers.spectral import SpectralGrid, WaveField
from ..utils.logger import logger

R = TypeVar("R")


@dataclass
class ScenarioOutcome:
    """场景执行结果, 由运行器写出为报告与记录文件"""

    assertions: List[AssertionResult] = field(default_factory=list)
    records: List[BaseModel] = field(default_factory=list)
    tables: Dict[str, List[BaseModel]] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    fields: Dict[str, WaveField] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(assertion.passed for assertion in self.assertions)

    @property
    def failed(self) -> List[str]:
        return [assertion.name for assertion in self.assertions if not assertion.passed]


class BaseScenario(ABC):
    """命名实验的基类, 子类放在 scenarios/scenarios/ 下自动注册"""

    name: ClassVar[str]
    description: ClassVar[str] = ""

    def __init__(self, scenario_config: ScenarioConfig, jobs: int = 1):
        self.config = scenario_config
        self.jobs = jobs
        self.outcome = ScenarioOutcome()

    @property
    def tolerances(self):
        return self.config.TOLERANCES

    def check(
        self,
        name: str,
        criterion: str,
        measured: float,
        limit: float,
        passed: Optional[bool] = None,
        detail: str = "",
    ) -> bool:
        """记录一条断言; passed 缺省为 measured ≤ limit (NaN 视为失败)"""
        measured = float(measured)
        if passed is None:
            passed = bool(np.isfinite(measured) and measured <= limit)
        self.outcome.assertions.append(
            AssertionResult(name=name, criterion=criterion, passed=passed, measured=measured, limit=limit, detail=detail),
        )
        if not passed:
            logger.warning(f"[{self.name}] 断言 {name} ({criterion}) 未通过: 测得 {measured:.6g}, 阈值 {limit:.6g}")
        return passed

    def guard(self, name: str, criterion: str, call: Callable[[], R]) -> Optional[R]:
        """执行一步计算; StudioError 记为失败断言而不中断整个场景"""
        try:
            return call()
        except StudioError as e:
            logger.warning(f"[{self.name}] {name} 执行失败: {e}")
            self.outcome.assertions.append(
                AssertionResult(name=name, criterion=criterion, passed=False, detail=f"{type(e).__name__}: {e}"),
            )
            return None

    def validate(self, model: ModelSpec, grid: SpectralGrid) -> bool:
        """模型不变量校验, 失败时断言详情列出违反的不变量"""
        report = validate_model(model, grid)
        failures = report.failures()
        worst = max((check.defect for check in report.checks if not check.passed), default=0.0)
        self.outcome.assertions.append(
            AssertionResult(
                name="model_valid",
                criterion="VALIDATION",
                passed=report.passed,
                measured=worst,
                limit=0.0 if failures else None,
                detail=", ".join(failures),
            ),
        )
        if failures:
            logger.warning(f"[{self.name}] 模型不变量不成立: {', '.join(failures)}")
        return report.passed

    @abstractmethod
    def execute(self) -> ScenarioOutcome:
        """执行实验并填充 self.outcome"""

"""
自检: 以缺省配置运行全部验收场景, 外加两个必须失败的模型校验配置
"""

import time
from collections import OrderedDict
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from ..configs.config import config
from ..configs.scenario import SCENARIO_NAMES, ScenarioConfig, default_scenario, validate_scenario
from ..schemas.records import ScenarioReport
from ..utils.logger import logger
from .scenario_runner import EXIT_ASSERTION, EXIT_OK, execute_scenario, write_artifacts

# (矩阵中的行名, 场景配置, 必须被点名的不变量)
NEGATIVE_CASES: List[Tuple[str, Dict, str]] = [
    (
        "NEG-sigma-unitary",
        {"SCENARIO": "toy-equivalence", "MODEL": {"SIGMA": [[1.0, 0.0], [0.0, 1.1]]}},
        "sigma_unitary",
    ),
    (
        "NEG-sigma-commutes",
        {
            "SCENARIO": "reflect",
            "MODEL": {"DIM": 2, "KAPPA": 0.0, "SIGMA": "pauli-x", "MASS": "diag(1, 2)"},
            "RUN": {"ETA": [1.0, 0.0]},
        },
        "sigma_commutes_energy",
    ),
]


class SelfTestMatrix:
    """按验收条目编号汇总的通过/失败矩阵"""

    def __init__(self):
        self.rows: "OrderedDict[str, Tuple[bool, str]]" = OrderedDict()

    def add(self, key: str, passed: bool, detail: str = ""):
        if key in self.rows:
            previous, previous_detail = self.rows[key]
            detail = "; ".join(part for part in (previous_detail, detail) if part)
            passed = previous and passed
        self.rows[key] = (passed, detail)

    def add_report(self, report: ScenarioReport):
        for assertion in report.assertions:
            detail = "" if assertion.passed else f"{report.scenario}/{assertion.name}"
            self.add(assertion.criterion, assertion.passed, detail)

    @property
    def passed(self) -> bool:
        return all(passed for passed, _ in self.rows.values())

    def render(self) -> str:
        def order(key: str) -> Tuple[int, int, str]:
            if key.startswith("AC-"):
                return (0, int(key[3:]), key)
            return (1, 0, key)

        lines = [f"{'criterion':<22}{'result':<8}detail"]
        for key in sorted(self.rows, key=order):
            passed, detail = self.rows[key]
            lines.append(f"{key:<22}{'PASS' if passed else 'FAIL':<8}{detail}")
        return "\n".join(lines)


def _run_negative(name: str, data: Dict, invariant: str, jobs: int) -> Tuple[bool, str]:
    scenario_config = validate_scenario(data)
    report, _ = execute_scenario(scenario_config, jobs=jobs)
    named = [
        assertion
        for assertion in report.assertions
        if assertion.name == "model_valid" and not assertion.passed and invariant in assertion.detail
    ]
    if report.passed:
        return False, f"{name} 未能触发失败"
    if not named:
        return False, f"{name} 失败但未点名 {invariant}"
    return True, named[0].detail


def self_test(
    jobs: Optional[int] = None,
    out_dir: Optional[Path] = None,
    echo: Callable[[str], None] = print,
) -> int:
    """运行验收套件并输出矩阵

    Returns:
        全部通过且总耗时不超过 SELF_TEST_BUDGET 时返回 0, 否则返回 1
    """
    jobs = jobs or config.RUNNER.JOBS
    started = time.perf_counter()
    matrix = SelfTestMatrix()

    for name in SCENARIO_NAMES:
        if name == "full-suite":
            continue
        scenario_config: ScenarioConfig = default_scenario(name)
        report, outcome = execute_scenario(scenario_config, jobs=jobs)
        if out_dir is not None:
            write_artifacts(report, outcome, scenario_config, out_dir / name)
        matrix.add_report(report)

    for name, data, invariant in NEGATIVE_CASES:
        passed, detail = _run_negative(name, data, invariant, jobs)
        matrix.add(name, passed, detail)

    elapsed = time.perf_counter() - started
    budget = config.RUNNER.SELF_TEST_BUDGET
    matrix.add("AC-11", matrix.passed and elapsed <= budget, f"耗时 {elapsed:.1f} 秒 (上限 {budget:.0f} 秒)")

    echo(matrix.render())
    logger.info(f"自检{'通过' if matrix.passed else '未通过'}, 耗时 {elapsed:.1f} 秒")
    return EXIT_OK if matrix.passed else EXIT_ASSERTION

"""
场景运行: 执行命名实验, 写出结果文件, 映射退出码

退出码: 0 全部断言通过, 1 存在失败断言 (NumericalAssertionFailure), 2 配置无效 (ConfigError)。
"""

from pathlib import Path
from typing import Optional, Tuple

from ..configs.config import config
from ..configs.scenario import ScenarioConfig
from ..exceptions import ConfigError, NumericalAssertionFailure, StudioError
from ..scenarios.base_scenario import ScenarioOutcome
from ..schemas.records import AssertionResult, ScenarioReport
from ..utils.logger import current_log_sequence, get_log_records, logger
from .field_io import export_field_csv, save_field
from .report_emitter import emit_records, write_json
from .scenario_manager import scenario_manager

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2


def output_directory(scenario_config: ScenarioConfig, override: Optional[Path] = None) -> Path:
    if override is not None:
        return Path(override)
    if scenario_config.OUTPUT.DIRECTORY:
        return Path(scenario_config.OUTPUT.DIRECTORY)
    return Path(config.RUNNER.OUTPUT_DIR) / scenario_config.SCENARIO


def execute_scenario(scenario_config: ScenarioConfig, jobs: Optional[int] = None) -> Tuple[ScenarioReport, ScenarioOutcome]:
    """执行场景并汇总报告, 不写文件"""
    jobs = jobs or config.RUNNER.JOBS
    since = current_log_sequence()
    scenario = scenario_manager.create(scenario_config.SCENARIO, scenario_config, jobs=jobs)
    logger.info(f"开始运行场景 {scenario_config.SCENARIO} (jobs = {jobs})")
    try:
        outcome = scenario.execute()
    except ConfigError:
        raise
    except StudioError as e:
        logger.error(f"场景 {scenario_config.SCENARIO} 运行中断: {e}")
        outcome = scenario.outcome
        outcome.assertions.append(
            AssertionResult(name="scenario_error", criterion="RUN", passed=False, detail=f"{type(e).__name__}: {e}"),
        )

    warnings = [record["message"] for record in get_log_records(min_level="WARNING", since=since)]
    report = ScenarioReport(
        scenario=scenario_config.SCENARIO,
        passed=outcome.passed,
        assertions=outcome.assertions,
        failed=outcome.failed,
        warnings=warnings,
        summary=outcome.summary,
    )
    status = "通过" if report.passed else f"未通过 ({', '.join(report.failed)})"
    logger.info(f"场景 {scenario_config.SCENARIO} {status}")
    return report, outcome


def write_artifacts(
    report: ScenarioReport,
    outcome: ScenarioOutcome,
    scenario_config: ScenarioConfig,
    directory: Path,
) -> Path:
    """写出 report.json、summary.json、scenario.yaml 以及记录文件"""
    write_json(report, directory / "report.json")
    write_json(report.summary, directory / "summary.json")
    scenario_config.dump_config(directory / "scenario.yaml")
    if outcome.records:
        emit_records(outcome.records, directory, scenario_config.OUTPUT.FORMATS)
    for table, records in outcome.tables.items():
        if records:
            emit_records(records, directory, scenario_config.OUTPUT.FORMATS, stem=f"records_{table}")
    if scenario_config.OUTPUT.FIELDS:
        for name, field in outcome.fields.items():
            save_field(field, directory / "fields" / f"{name}.bin")
            export_field_csv(field, directory / "fields" / f"{name}.csv")
    logger.info(f"结果已写出到 {directory}")
    return directory


def run_scenario(
    scenario_config: ScenarioConfig,
    jobs: Optional[int] = None,
    out_dir: Optional[Path] = None,
) -> ScenarioReport:
    """执行场景并写出结果文件

    Raises:
        ConfigError: 场景未注册或配置无效
        NumericalAssertionFailure: 存在未通过的断言, 结果文件已写出
    """
    report, outcome = execute_scenario(scenario_config, jobs=jobs)
    write_artifacts(report, outcome, scenario_config, output_directory(scenario_config, out_dir))
    if not report.passed:
        raise NumericalAssertionFailure(report, report.failed)
    return report


def exit_code(error: Optional[BaseException]) -> int:
    """异常到退出码的映射"""
    if error is None:
        return EXIT_OK
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    # NumericalAssertionFailure 以及场景内未被捕获的数值异常
    return EXIT_ASSERTION

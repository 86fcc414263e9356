import argparse
from pathlib import Path
from typing import List, Optional

from .configs.config import config
from .configs.scenario import SCENARIO_NAMES, ScenarioConfig, default_scenario, load_scenario
from .exceptions import ConfigError, NumericalAssertionFailure
from .services.scenario_runner import EXIT_OK, exit_code, run_scenario
from .services.self_test import self_test
from .solvers.stochastic import MAX_SEED
from .utils.logger import logger


def seed_type(value: str) -> int:
    """64 位无符号整数, 支持 0x 前缀"""
    try:
        seed = int(value, 0)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"无效的种子: {value!r}") from e
    if not 0 <= seed <= MAX_SEED:
        raise argparse.ArgumentTypeError(f"种子超出 64 位无符号整数范围: {value}")
    return seed


def jobs_type(value: str) -> int:
    jobs = int(value)
    if jobs < 1:
        raise argparse.ArgumentTypeError("--jobs 至少为 1")
    return jobs


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="场景配置文件 (YAML / JSON / JSON5)")
    common.add_argument("--out", type=Path, default=None, help="结果输出目录")
    common.add_argument("--seed", type=seed_type, default=None, help="覆盖配置中的 64 位随机种子")
    common.add_argument("--jobs", type=jobs_type, default=None, help=f"工作线程数, 缺省 {config.RUNNER.JOBS}")

    parser = argparse.ArgumentParser(
        prog="dirac-jump-studio",
        description="单跃迁量子随机演化与半直线 Dirac 边值问题的谱方法模拟与验证",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in SCENARIO_NAMES:
        subparsers.add_parser(name, parents=[common], help=f"运行场景 {name}")
    subparsers.add_parser("run", parents=[common], help="运行 --config 中 SCENARIO 指定的场景")
    subparsers.add_parser("self-test", parents=[common], help="运行完整验收套件并输出通过/失败矩阵")
    return parser


def resolve_config(command: str, config_path: Optional[Path], seed: Optional[int]) -> ScenarioConfig:
    """Raises: ConfigError"""
    if config_path is None:
        if command == "run":
            raise ConfigError("run 子命令需要 --config")
        scenario_config = default_scenario(command)
    else:
        scenario_config = load_scenario(config_path)
        if command != "run" and scenario_config.SCENARIO != command:
            raise ConfigError(f"配置文件中的场景 {scenario_config.SCENARIO} 与子命令 {command} 不一致")
    return scenario_config.with_overrides(seed=seed)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "self-test":
        return self_test(jobs=args.jobs, out_dir=args.out)

    try:
        scenario_config = resolve_config(args.command, args.config, args.seed)
        run_scenario(scenario_config, jobs=args.jobs, out_dir=args.out)
    except ConfigError as e:
        logger.error(f"配置错误: {e}")
        return exit_code(e)
    except NumericalAssertionFailure as e:
        logger.error(f"{e}")
        return exit_code(e)
    return EXIT_OK

# 用于自动搜索和注册场景
import importlib
import inspect
from pathlib import Path
from typing import Dict, List, Optional, Type

from ..configs.scenario import ScenarioConfig
from ..exceptions import ConfigError
from ..scenarios.base_scenario import BaseScenario
from ..utils.logger import logger


class ScenarioManager:
    """管理所有命名实验"""

    def __init__(self):
        self.scenarios: Dict[str, Type[BaseScenario]] = {}
        self._discovered = False

    def register_scenario(self, scenario_class: Type[BaseScenario]):
        """按场景名注册一个场景类"""
        name = scenario_class.name
        if name in self.scenarios and self.scenarios[name] is not scenario_class:
            logger.warning(f"场景名 {name} 重复注册, 保留 {self.scenarios[name].__name__}")
            return
        self.scenarios[name] = scenario_class

    def auto_discover_and_register_scenarios(self):
        """自动搜索并注册所有场景"""
        logger.debug("开始自动搜索和注册场景...")

        scenarios_package = "dirac_jump_studio.scenarios.scenarios"
        scenarios_path = Path(__file__).parent.parent / "scenarios" / "scenarios"

        if not scenarios_path.exists():
            logger.error(f"场景目录不存在: {scenarios_path}")
            return

        registered_count = 0

        for file_path in sorted(scenarios_path.glob("*.py")):
            if file_path.name.startswith("__") or file_path.name.startswith("test_"):
                continue

            module_name = file_path.stem
            full_module_name = f"{scenarios_package}.{module_name}"

            try:
                module = importlib.import_module(full_module_name)

                # 只注册在该模块中定义的 BaseScenario 子类
                for name, obj in inspect.getmembers(module, inspect.isclass):
                    if (
                        obj is not BaseScenario
                        and issubclass(obj, BaseScenario)
                        and obj.__module__ == full_module_name
                        and not inspect.isabstract(obj)
                    ):
                        self.register_scenario(obj)
                        registered_count += 1
                        logger.debug(f"自动注册场景: {obj.name} ({name}, 来自 {module_name})")

            except Exception as e:
                logger.error(f"导入模块 {full_module_name} 时出错: {e}", exc_info=True)

        self._discovered = True
        logger.debug(f"自动搜索和注册完成, 共注册了 {registered_count} 个场景")

    def _ensure_discovered(self):
        if not self._discovered:
            self.auto_discover_and_register_scenarios()

    def get_scenario_class(self, scenario_name: str) -> Optional[Type[BaseScenario]]:
        """通过场景名获取场景类

        Returns:
            匹配的场景类, 没有找到则返回 None
        """
        self._ensure_discovered()
        scenario_class = self.scenarios.get(scenario_name)
        if scenario_class is None:
            logger.warning(f"没有找到场景: {scenario_name}")
        return scenario_class

    def list_scenarios(self) -> List[str]:
        self._ensure_discovered()
        return sorted(self.scenarios)

    def create(self, scenario_name: str, scenario_config: ScenarioConfig, jobs: int = 1) -> BaseScenario:
        """实例化场景

        Raises:
            ConfigError: 场景未注册
        """
        scenario_class = self.get_scenario_class(scenario_name)
        if scenario_class is None:
            raise ConfigError(f"未注册的场景: {scenario_name}")
        return scenario_class(scenario_config, jobs=jobs)


# 创建一个全局单例
scenario_manager = ScenarioManager()

import time

from ...configs.scenario import SCENARIO_NAMES, default_scenario
from ...services.scenario_manager import scenario_manager
from ...utils.logger import logger
from ..base_scenario import BaseScenario, ScenarioOutcome


class FullSuiteScenario(BaseScenario):
    """以缺省配置依次运行其余全部场景"""

    name = "full-suite"

    def execute(self) -> ScenarioOutcome:
        for name in SCENARIO_NAMES:
            if name == self.name:
                continue
            started = time.perf_counter()
            sub_config = default_scenario(name).with_overrides(seed=self.config.RUN.SEED)
            scenario = scenario_manager.create(name, sub_config, jobs=self.jobs)
            outcome = scenario.execute()
            for assertion in outcome.assertions:
                prefixed = assertion.model_copy(update={"name": f"{name}/{assertion.name}"})
                self.outcome.assertions.append(prefixed)
                self.outcome.records.append(prefixed)
            self.outcome.summary[name] = {"passed": outcome.passed, "failed": outcome.failed, **outcome.summary}
            elapsed = time.perf_counter() - started
            logger.info(f"[{self.name}] {name} {'通过' if outcome.passed else '未通过'}, 耗时 {elapsed:.1f} 秒")
        return self.outcome

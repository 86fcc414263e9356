import pytest

from dirac_jump_studio.configs.scenario import default_scenario, load_scenario, validate_scenario
from dirac_jump_studio.exceptions import ConfigError, NonCommensurateShift
from dirac_jump_studio.scenarios.base_scenario import BaseScenario
from dirac_jump_studio.schemas.records import ConvergenceRecord, ItoRecord, RefinementRecord
from dirac_jump_studio.services.scenario_manager import scenario_manager
from dirac_jump_studio.services.scenario_runner import execute_scenario
from dirac_jump_studio.services.self_test import NEGATIVE_CASES, SelfTestMatrix, self_test


def test_all_scenarios_discovered():
    assert scenario_manager.list_scenarios() == [
        "full-suite",
        "kappa-sweep",
        "monte-carlo",
        "reflect",
        "toy-equivalence",
    ]
    with pytest.raises(ConfigError):
        scenario_manager.create("missing", default_scenario("reflect"))


def test_toy_equivalence_passes():
    report, outcome = execute_scenario(default_scenario("toy-equivalence"))
    assert report.passed, report.failed
    criteria = {assertion.criterion for assertion in report.assertions}
    assert {"AC-1", "AC-2", "AC-3", "AC-10"} <= criteria
    assert len(outcome.tables["ito"]) == 6
    assert all(isinstance(record, ItoRecord) for record in outcome.tables["ito"])
    assert "chi_t=1" in outcome.fields


def test_reflect_passes():
    report, outcome = execute_scenario(default_scenario("reflect"))
    assert report.passed, report.failed
    refinement = [record for record in outcome.records if isinstance(record, RefinementRecord)]
    assert [record.points for record in refinement] == [256, 512, 1024, 2048]
    assert report.summary["outgoing_mass"] > 0


def test_kappa_sweep_passes():
    report, outcome = execute_scenario(default_scenario("kappa-sweep"))
    assert report.passed, report.failed
    assert len(outcome.records) == 5
    assert all(isinstance(record, ConvergenceRecord) for record in outcome.records)
    assert report.summary["kappa_threshold"] == pytest.approx(105.0)
    assert report.summary["kappa_above_threshold"] == 106.0
    assert report.summary["slope"] <= -1.7


def test_massless_sweep_passes(scenario_dir):
    report, outcome = execute_scenario(load_scenario(scenario_dir / "kappa-sweep-massless.yaml"))
    assert report.passed, report.failed
    assert all(record.error_I <= 1e-12 for record in outcome.records)


def test_monte_carlo_passes():
    report, outcome = execute_scenario(default_scenario("monte-carlo"), jobs=2)
    assert report.passed, report.failed
    summary = outcome.records[0]
    assert summary.M == 100_000
    assert summary.seed == 7


@pytest.mark.parametrize(("name", "data", "invariant"), NEGATIVE_CASES)
def test_invalid_models_name_the_invariant(name, data, invariant):
    report, _ = execute_scenario(validate_scenario(data))
    assert not report.passed
    assert report.failed == ["model_valid"]
    assert invariant in report.assertions[0].detail


def test_numerical_errors_become_failed_assertions():
    class Exploding(BaseScenario):
        name = "exploding"

        def execute(self):
            self.check("fine", "AC-0", 0.0, 1.0)
            self.config.GRID.build().steps(0.001)
            return self.outcome

    scenario = Exploding(default_scenario("reflect"))
    with pytest.raises(NonCommensurateShift):
        scenario.execute()
    assert scenario.outcome.passed
    assert scenario.guard("guarded", "AC-0", lambda: scenario.config.GRID.build().steps(0.001)) is None
    assert scenario.outcome.failed == ["guarded"]
    assert not scenario.check("nan", "AC-0", float("nan"), 1.0)


def test_self_test_matrix_merges_rows():
    matrix = SelfTestMatrix()
    matrix.add("AC-10", True)
    matrix.add("AC-2", True)
    matrix.add("AC-2", False, "toy-equivalence/oracle")
    assert not matrix.passed
    lines = matrix.render().splitlines()
    assert lines[1].startswith("AC-2") and "FAIL" in lines[1]
    assert lines[2].startswith("AC-10")


@pytest.mark.slow
def test_self_test_passes(tmp_path):
    lines = []
    assert self_test(jobs=2, out_dir=tmp_path, echo=lines.append) == 0
    rendered = "\n".join(lines)
    for index in range(1, 12):
        assert f"AC-{index} " in rendered
    assert (tmp_path / "monte-carlo" / "records.csv").exists()

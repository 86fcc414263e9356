import numpy as np
import pytest
from simpleeval import InvalidExpression

from dirac_jump_studio.configs.scenario import (
    SCENARIO_NAMES,
    default_scenario,
    load_scenario,
    validate_scenario,
)
from dirac_jump_studio.exceptions import ConfigError
from dirac_jump_studio.utils.expression import compile_density
from dirac_jump_studio.utils.presets import parse_complex, resolve_matrix, resolve_vector, shift_cycle


@pytest.mark.parametrize("name", SCENARIO_NAMES)
def test_default_scenarios_validate(name):
    scenario = default_scenario(name)
    assert scenario.SCENARIO == name
    assert scenario.RUN.SEED == 7


def test_scenario_defaults_are_merged():
    reflect = validate_scenario({"SCENARIO": "reflect", "RUN": {"PACKET": {"WIDTH": 3.0}}})
    assert reflect.GRID.HALF_WIDTH == 32.0
    assert reflect.MODEL.DIM == 1
    assert reflect.RUN.PACKET.WIDTH == 3.0
    assert reflect.RUN.PACKET.CARRIER == -3.0
    assert reflect.RUN.PACKET.HARDY == "minus"


def test_sweep_config_from_scenario():
    sweep = default_scenario("kappa-sweep").sweep_config()
    assert sweep.kappa_base == 5.0
    assert sweep.mass_bound == 1.0
    assert sweep.kappa_list == [10.0, 20.0, 40.0, 80.0, 160.0]
    assert default_scenario("kappa-sweep").sweep_config(mass_bound=0.0).mass_bound == 0.0


@pytest.mark.parametrize(
    "data",
    [
        {"SCENARIO": "toy-equivalence", "GRID": {"POINTS": 1000}},
        {"SCENARIO": "reflect", "RUN": {"TIME": 0.01}},
        {"SCENARIO": "toy-equivalence", "RUN": {"ETA": [1.0, 1.0]}},
        {"SCENARIO": "toy-equivalence", "MODEL": {"SIGMA": "pauli-q"}},
        {"SCENARIO": "toy-equivalence", "RUN": {"DT_LIST": [0.1]}},
        {"SCENARIO": "kappa-sweep", "RUN": {"KAPPA_LIST": [4.0, 10.0]}},
        {"SCENARIO": "monte-carlo", "RUN": {"DENSITY": "exp(-s"}},
        {"SCENARIO": "monte-carlo", "RUN": {"SEED": -1}},
        {"SCENARIO": "unknown"},
    ],
)
def test_invalid_scenarios_raise_config_error(data):
    with pytest.raises(ConfigError):
        validate_scenario(data)


def test_with_overrides_revalidates():
    scenario = default_scenario("monte-carlo").with_overrides(seed=0xDEADBEEF, directory="out/mc")
    assert scenario.RUN.SEED == 0xDEADBEEF
    assert scenario.OUTPUT.DIRECTORY == "out/mc"
    with pytest.raises(ConfigError):
        default_scenario("monte-carlo").with_overrides(seed=2**64)


@pytest.mark.parametrize(
    "file_name",
    [
        "toy-equivalence.yaml",
        "reflect.yaml",
        "kappa-sweep.yaml",
        "kappa-sweep-massless.yaml",
        "monte-carlo.yaml",
        "full-suite.json5",
        "broken-sigma.yaml",
    ],
)
def test_example_configs_load(scenario_dir, file_name):
    scenario = load_scenario(scenario_dir / file_name)
    assert scenario.SCENARIO in SCENARIO_NAMES


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "missing.yaml")
    unsupported = tmp_path / "scenario.toml"
    unsupported.write_text("SCENARIO = 'reflect'\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_scenario(unsupported)


def test_dumped_config_reloads(tmp_path):
    scenario = default_scenario("reflect")
    scenario.dump_config(tmp_path / "scenario.yaml")
    reloaded = load_scenario(tmp_path / "scenario.yaml")
    assert reloaded.model_dump() == scenario.model_dump()


def test_matrix_presets():
    assert np.array_equal(resolve_matrix("pauli-x", 2), [[0, 1], [1, 0]])
    assert np.array_equal(resolve_matrix("diag(1, 2j)", 2), np.diag([1, 2j]))
    assert np.array_equal(resolve_matrix("projector(1)", 3), np.diag([0, 1, 0]))
    assert np.array_equal(resolve_matrix("1j", 1), [[1j]])
    assert np.array_equal(resolve_matrix(2.0, 2), 2 * np.eye(2))
    assert np.array_equal(resolve_matrix([[0, [0, -1]], [[0, 1], 0]], 2), resolve_matrix("pauli-y", 2))
    assert np.array_equal(resolve_matrix("shift-cycle(3)", 3), shift_cycle(3))
    assert np.array_equal(shift_cycle(3) @ np.array([1, 0, 0]), [0, 1, 0])
    for bad in ("pauli-x", "unknown", "projector(3)", "diag(1)"):
        with pytest.raises(ValueError):
            resolve_matrix(bad, 3)


def test_vectors_and_entries():
    assert parse_complex([0.5, -1.0]) == 0.5 - 1j
    assert parse_complex("1 + 2j") == 1 + 2j
    assert np.array_equal(resolve_vector([0.6, "0.8j"], 2), [0.6, 0.8j])
    with pytest.raises(ValueError):
        resolve_vector([1.0], 2)


def test_density_expression_sandbox():
    density = compile_density("exp(-s) * s")
    assert density(1.0) == pytest.approx(np.exp(-1.0))
    with pytest.raises(InvalidExpression):
        compile_density("__import__('os')")(0.0)

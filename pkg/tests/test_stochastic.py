import math

import numpy as np
import pytest

from dirac_jump_studio.exceptions import DegenerateDensity, InvalidStateVector, NonHermitianInput
from dirac_jump_studio.solvers.spectral import SpectralGrid
from dirac_jump_studio.solvers.stochastic import (
    MAX_SEED,
    JumpDensity,
    agreement_limit,
    check_state_vector,
    deterministic_expectation,
    generate_ensemble,
    initial_amplitude,
    mc_expectation,
    philox_generator,
    quadrature_expectation,
    sample_jump_time,
)
from dirac_jump_studio.utils.expression import compile_density
from dirac_jump_studio.utils.presets import resolve_matrix

from .conftest import ETA

PROJECTOR = resolve_matrix("projector(0)", 2)
EXPECTED = 0.64 - 0.28 * (1.0 - math.exp(-1.0))


@pytest.fixture(scope="module")
def density() -> JumpDensity:
    return JumpDensity.from_expression(SpectralGrid(16.0, 1024), "exp(-s)")


def test_philox_streams_are_reproducible():
    first = philox_generator(7).random(5)
    assert np.array_equal(first, philox_generator(7).random(5))
    assert not np.array_equal(first, philox_generator(8).random(5))
    assert not np.array_equal(first, philox_generator(7, chunk=1).random(5))
    philox_generator(MAX_SEED)
    with pytest.raises(ValueError):
        philox_generator(-1)
    with pytest.raises(ValueError):
        philox_generator(MAX_SEED + 1)


def test_density_table(density):
    grid = density.grid
    assert density.knots[0] == 0.0
    assert np.all(np.diff(density.cdf) >= 0)
    assert density.tail_mass == pytest.approx(math.exp(-(grid.half_width - grid.dz)), abs=1e-9)
    assert float(density.cdf_at(1.0)) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-9)
    assert float(density.cdf_at(np.inf)) == 1.0


@pytest.mark.parametrize("expression", ["-1", "0", "2", "s - 1"])
def test_degenerate_density(expression):
    with pytest.raises(DegenerateDensity):
        JumpDensity.from_expression(SpectralGrid(16.0, 256), expression)


def test_inverse_cdf(density):
    samples = density.inverse_cdf([0.0, 0.5, 1.0])
    assert samples[0] == 0.0
    assert samples[1] == pytest.approx(math.log(2.0), abs=density.grid.dz)
    assert samples[2] == np.inf
    assert 0.0 <= sample_jump_time(density, philox_generator(3)) < density.grid.half_width


def test_state_vector_checked():
    with pytest.raises(InvalidStateVector):
        check_state_vector([1.0, 1.0], 2)
    with pytest.raises(InvalidStateVector):
        check_state_vector([1.0], 2)
    assert np.array_equal(check_state_vector(ETA, 2), ETA)


def test_ensemble_independent_of_jobs(toy_model, density):
    serial = generate_ensemble(toy_model, density, ETA, 1.0, 20_000, seed=11, jobs=1)
    threaded = generate_ensemble(toy_model, density, ETA, 1.0, 20_000, seed=11, jobs=3)
    assert serial.count == 20_000
    assert np.array_equal(serial.jump_times, threaded.jump_times)
    assert np.array_equal(serial.states, threaded.states)
    assert serial.norm_defect() <= 1e-12


def test_quadrature_matches_closed_form(toy_model):
    value = quadrature_expectation(toy_model, compile_density("exp(-s)"), PROJECTOR, 1.0, ETA)
    assert value == pytest.approx(EXPECTED, abs=1e-8)
    assert quadrature_expectation(toy_model, compile_density("exp(-s)"), PROJECTOR, 0.0, ETA) == pytest.approx(0.64)


def test_monte_carlo_agrees_with_quadrature(toy_model, density):
    estimate = mc_expectation(toy_model, density, PROJECTOR, 1.0, 100_000, seed=7, eta=ETA)
    assert abs(estimate.mean - EXPECTED) <= 4.0 * estimate.stderr
    assert estimate.norm_defect <= 1e-12
    assert estimate.ks_statistic(density) < 0.01


def test_observable_must_be_hermitian(toy_model, density):
    with pytest.raises(NonHermitianInput):
        mc_expectation(toy_model, density, [[0.0, 1.0], [0.0, 0.0]], 1.0, 10, seed=1, eta=ETA)


def test_deterministic_expectation(toy_model, density):
    chi0 = initial_amplitude(density, ETA)
    assert np.all(chi0.values[: density.grid.origin + 1] == 0)
    identity = deterministic_expectation(toy_model, density, np.eye(2), 1.0, ETA)
    assert abs(identity.value - 1.0) < 1e-9
    assert identity.initial_mass == pytest.approx(1.0 - density.tail_mass, abs=1e-12)
    assert identity.tail_mass == density.tail_mass
    assert density.tail_mass > 1e-9

    projected = deterministic_expectation(toy_model, density, PROJECTOR, 1.0, ETA)
    limit = agreement_limit(0.0, 4.0, density.grid.dz, PROJECTOR)
    assert abs(projected.value - EXPECTED) <= limit

import math

import numpy as np
import pytest

from dirac_jump_studio.exceptions import NonCommensurateShift, SkippedPrecondition, UnsupportedInput
from dirac_jump_studio.solvers.linalg import ModelSpec, evolve, operator_norm
from dirac_jump_studio.solvers.spectral import gaussian_packet
from dirac_jump_studio.solvers.toy_dirac import (
    Cocycle,
    TruncatedState,
    check_reversal_symmetry,
    cocycle_oracle,
    cocycle_v,
    indicator_cocycle_defect,
    io_reflection_pair,
    ito_residual,
    jump_exponent,
    resolving_map,
    solve_toy_bvp,
    time_reversal_check,
    toy_group_law_defect,
)
from dirac_jump_studio.utils.presets import resolve_matrix

from .conftest import ETA, PAULI_X, PAULI_Z


def test_jump_exponent():
    s = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    assert list(jump_exponent(s, 1.0)) == [0, 1, 1, 0, 0]
    assert list(jump_exponent(s, -1.5)) == [-1, 0, 0, 0, 0]
    assert int(jump_exponent(0.3, 0.0)) == 0


def test_cocycle_cases(toy_model):
    free = evolve(PAULI_Z, 1.0)
    assert np.allclose(cocycle_v(toy_model, 1.0, math.inf), free)
    assert np.allclose(cocycle_v(toy_model, 1.0, 1.5), free)
    jump = toy_model.jump_operators([0.4])[0]
    assert np.allclose(cocycle_v(toy_model, 1.0, 0.4), free @ jump)
    backward = evolve(PAULI_Z, -1.0) @ np.conj(toy_model.jump_operators([-0.4])[0]).T
    assert np.allclose(cocycle_v(toy_model, -1.0, -0.4), backward)


def test_cocycle_batch_matches_pointwise(toy_model):
    times = np.array([-0.5, 0.0, 0.3, 0.99, 1.0, np.inf])
    batch = Cocycle(toy_model).batch(1.0, times)
    for index, s in enumerate(times):
        assert np.allclose(batch[index], cocycle_v(toy_model, 1.0, s))


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, -1.0])
def test_closed_form_matches_pointwise_cocycle(toy_model, toy_packet, t):
    chi = solve_toy_bvp(toy_model, toy_packet, t)
    oracle = cocycle_oracle(toy_model, toy_packet, t)
    assert np.max(np.abs(chi.values - oracle.values)) < 1e-10
    assert chi.norm_sq() == pytest.approx(toy_packet.norm_sq(), abs=1e-12)
    assert TruncatedState(chi).norm_identity_defect() < 1e-12


def test_resolving_map_is_solver(toy_model, toy_packet):
    mapped = resolving_map(toy_model, 1.0)(toy_packet)
    assert np.array_equal(mapped.values, solve_toy_bvp(toy_model, toy_packet, 1.0).values)


def test_non_commensurate_time_rejected(toy_model, toy_packet):
    with pytest.raises(NonCommensurateShift):
        solve_toy_bvp(toy_model, toy_packet, 0.01)


def test_group_law(toy_model, toy_packet):
    assert toy_group_law_defect(toy_model, toy_packet, 0.5, 1.0) < 1e-12
    assert toy_group_law_defect(toy_model, toy_packet, -1.0, 2.0) < 1e-12
    assert indicator_cocycle_defect(toy_packet.grid, 0.5, 2.0) == 0
    assert indicator_cocycle_defect(toy_packet.grid, -1.0, 1.5) == 0


def test_pointwise_cocycle_law(toy_model):
    r, t = 0.5, 1.25
    for s in np.linspace(-1.0, 3.0, 17):
        composed = cocycle_v(toy_model, r, s - t) @ cocycle_v(toy_model, t, s)
        assert operator_norm(composed - cocycle_v(toy_model, r + t, s)) < 1e-12


def test_ito_residual_orders(toy_model):
    steps = [2.0**-power for power in range(4, 9)]
    off_jump = [ito_residual(toy_model, 1.0, dt, 0.5, ETA) for dt in steps]
    at_jump = [ito_residual(toy_model, 1.0, dt, 1.0, ETA) for dt in steps]
    for coarse, fine in zip(off_jump, off_jump[1:]):
        assert coarse / fine == pytest.approx(4.0, abs=0.5)
    for coarse, fine in zip(at_jump, at_jump[1:]):
        assert coarse / fine == pytest.approx(2.0, abs=0.5)
    with pytest.raises(ValueError):
        ito_residual(toy_model, 1.0, 0.0, 0.5, ETA)


def test_io_pair_conserves_mass_and_connection(toy_model, toy_packet):
    pair = io_reflection_pair(toy_model, toy_packet, 2.0)
    assert pair.mass_drift < 1e-10
    assert pair.connection_defect < 1e-12
    incoming, outgoing = pair.restricted()
    assert np.all(incoming.values[: toy_packet.grid.origin] == 0)
    assert np.all(outgoing.values[: toy_packet.grid.origin] == 0)


def test_io_pair_requires_right_support(toy_model, toy_grid):
    centred = gaussian_packet(toy_grid, 0.0, 1.0, 0.0, ETA)
    with pytest.raises(UnsupportedInput):
        io_reflection_pair(toy_model, centred, 1.0)


def test_time_reversal_swaps_input_and_output(toy_model, toy_packet):
    report = time_reversal_check(toy_model, toy_packet, 1.0)
    assert report.max_defect < 1e-10


def test_time_reversal_precondition():
    model = ModelSpec(PAULI_Z, resolve_matrix("pauli-y", 2), np.zeros((2, 2)))
    with pytest.raises(SkippedPrecondition):
        check_reversal_symmetry(model)
    complex_kappa = ModelSpec(resolve_matrix("pauli-y", 2), PAULI_X, np.zeros((2, 2)))
    with pytest.raises(SkippedPrecondition):
        check_reversal_symmetry(complex_kappa)

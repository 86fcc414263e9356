import numpy as np
import pytest
import scipy.linalg

from dirac_jump_studio.exceptions import GridMismatch, NonCommensurateShift, NotInHardyClass, ShapeMismatch
from dirac_jump_studio.solvers.linalg import ModelSpec
from dirac_jump_studio.solvers.reflection import (
    DressedSpec,
    WaveDirection,
    conjugated_symbol,
    current_profile,
    initial_output,
    massless_transport_defect,
    probability_current,
    projector_pi,
    reflection_connection_defect,
    reflection_time_reversal_check,
    solve_reflect_bvp,
)
from dirac_jump_studio.solvers.spectral import HardySide, SpectralGrid, WaveField, apply_pointwise, gaussian_packet

from .conftest import ETA, PAULI_X, PAULI_Z, dense_energy_exponential, dense_mode_operator, dense_pointwise


def test_dressed_spec_defaults_shift_to_kappa():
    model = ModelSpec([[0.5]], [[1j]], [[1.0]])
    assert np.allclose(DressedSpec(model).kappa_shift, [[0.5]])
    with pytest.raises(ShapeMismatch):
        DressedSpec(model, np.eye(2))


def test_energy_symbol_is_even_and_positive(reflect_spec, reflect_grid):
    psd, symmetric = reflect_spec.energy_defects(reflect_grid)
    assert psd == 0.0
    assert symmetric < 1e-12


def test_conjugated_propagator_is_unitary(reflect_grid, reflect_packet):
    spec = DressedSpec(ModelSpec([[0.0]], [[1j]], [[1.0]]), [[2.0]])
    for direction in WaveDirection:
        propagator = conjugated_symbol(spec, spec.symbol(reflect_grid), direction)
        evolved = propagator(reflect_packet, 1.0)
        assert evolved.norm_sq() == pytest.approx(1.0, abs=1e-12)
        back = propagator(evolved, -1.0)
        assert np.allclose(back.values, reflect_packet.values, atol=1e-12)


@pytest.mark.parametrize("direction", list(WaveDirection))
def test_conjugated_propagator_matches_dense_oracle(direction):
    grid = SpectralGrid(2.0, 8)
    mass = np.array([[1.0, 0.5], [0.5, 2.0]])
    spec = DressedSpec(ModelSpec(PAULI_Z, PAULI_X, mass))
    propagator = conjugated_symbol(spec, spec.symbol(grid), direction)
    sign = 1.0 if direction is WaveDirection.INPUT else -1.0
    conjugator = dense_pointwise([scipy.linalg.expm(-1j * sign * z * PAULI_Z) for z in grid.z])
    oracle = np.conj(conjugator).T @ dense_mode_operator(grid, dense_energy_exponential(grid, mass, 0.7)) @ conjugator
    columns = []
    for column in np.eye(grid.points * 2):
        columns.append(propagator(WaveField(grid, column.reshape(grid.points, 2)), 0.7).values.reshape(-1))
    assert np.max(np.abs(np.array(columns).T - oracle)) < 1e-10


def test_scalar_shift_moves_symbol_argument():
    grid = SpectralGrid(8.0, 64)
    k, c = 3 * grid.dk, 2 * grid.dk
    spec = DressedSpec(ModelSpec([[0.0]], [[1j]], [[1.0]]), [[c]])
    mode = WaveField.from_function(grid, lambda z: np.exp(1j * k * z))
    for direction, argument in ((WaveDirection.INPUT, k - c), (WaveDirection.OUTPUT, k + c)):
        evolved = conjugated_symbol(spec, spec.symbol(grid), direction)(mode, 1.3)
        phase = np.exp(-1.3j * np.sqrt(argument**2 + 1.0))
        assert np.allclose(evolved.values, mode.values * phase, atol=1e-12)


def test_projector_is_orthogonal(reflect_spec, reflect_grid, reflect_packet):
    projector = projector_pi(reflect_spec, reflect_grid, 1.0)
    mirrored = gaussian_packet(reflect_grid, -4.0, 2.0, 1.0, np.ones(1))
    assert projector.idempotence_defect(reflect_packet) < 1e-10
    assert projector.self_adjointness_defect(reflect_packet, mirrored) < 1e-10


def test_solution_conserves_norm(reflect_spec, reflect_packet):
    solution = solve_reflect_bvp(reflect_spec, reflect_packet, 1.0)
    assert solution.norm_drift < 1e-9
    assert solution.norm_identity_defect() < 1e-9
    incoming, outgoing = solution.half_line_masses
    assert outgoing > 0
    assert incoming + outgoing == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize(
    ("model", "kappa_shift", "eta"),
    [
        (ModelSpec([[0.0]], [[1j]], [[1.0]]), [[0.5]], np.ones(1)),
        (ModelSpec(PAULI_Z, PAULI_X, np.eye(2)), None, ETA),
        (ModelSpec(PAULI_Z, PAULI_X, [[1.0, 0.5], [0.5, 1.0]]), [[0.3, 0.2], [0.2, -0.4]], ETA),
    ],
)
def test_conjugated_solution_conserves_norm(reflect_grid, model, kappa_shift, eta):
    spec = DressedSpec(model, kappa_shift)
    # 在 ε_ϰ 共轭标架内构造输入类波包
    frame = gaussian_packet(reflect_grid, 4.0, 2.0, -3.0, eta, side=HardySide.MINUS)
    phi0 = apply_pointwise(frame, spec.output_conjugator(reflect_grid))
    solution = solve_reflect_bvp(spec, phi0, 1.0)
    assert solution.norm_drift < 1e-9
    assert solution.norm_identity_defect() < 1e-9
    assert solution.half_line_masses[1] > 0
    projector = projector_pi(spec, reflect_grid, 1.0)
    other = apply_pointwise(gaussian_packet(reflect_grid, -4.0, 2.0, 1.0, eta), spec.output_conjugator(reflect_grid))
    assert projector.idempotence_defect(phi0) < 1e-10
    assert projector.self_adjointness_defect(phi0, other) < 1e-10


@pytest.mark.parametrize("points", [512, 1024, 2048])
def test_boundary_current_quadratic_in_residual(reflect_spec, points):
    grid = SpectralGrid(32.0, points)
    packet = gaussian_packet(grid, 4.0, 2.0, -3.0, np.ones(1), side=HardySide.MINUS)
    solution = solve_reflect_bvp(reflect_spec, packet, 1.0)
    assert solution.boundary_residual > 0
    assert abs(solution.boundary_current()) < 10 * solution.boundary_residual**2


def test_boundary_current_vanishes_when_condition_holds(reflect_packet, toy_grid):
    rotated = WaveField(reflect_packet.grid, 1j * reflect_packet.position().values)
    assert probability_current(reflect_packet, rotated, 0.0) == 0.0
    phi = gaussian_packet(toy_grid, 0.5, 1.0, 2.0, ETA)
    swapped = WaveField(toy_grid, phi.position().values @ PAULI_X.T)
    assert probability_current(phi, swapped, 0.0) == 0.0
    assert np.all(current_profile(phi, swapped) == 0)


def test_boundary_residual_shrinks_under_refinement(reflect_spec):
    residuals = []
    for points in (512, 1024, 2048):
        grid = SpectralGrid(32.0, points)
        packet = gaussian_packet(grid, 4.0, 2.0, -3.0, np.ones(1), side=HardySide.MINUS)
        residuals.append(solve_reflect_bvp(reflect_spec, packet, 1.0).boundary_residual)
    assert residuals[0] > residuals[1] > residuals[2]


def test_rejects_input_outside_hardy_class(reflect_spec, reflect_grid):
    right_mover = gaussian_packet(reflect_grid, 4.0, 2.0, 3.0, np.ones(1))
    with pytest.raises(NotInHardyClass):
        solve_reflect_bvp(reflect_spec, right_mover, 1.0)


def test_rejects_non_commensurate_time(reflect_spec, reflect_packet):
    with pytest.raises(NonCommensurateShift):
        solve_reflect_bvp(reflect_spec, reflect_packet, 0.01)


def test_connection_persists(reflect_spec, reflect_packet):
    assert reflection_connection_defect(reflect_spec, reflect_packet, 1.0) < 1e-10
    output = initial_output(reflect_spec, reflect_packet)
    assert output.norm_sq() == pytest.approx(1.0, abs=1e-12)


def test_massless_projector_is_a_shifted_cut(reflect_grid, reflect_packet):
    massless = DressedSpec(ModelSpec([[0.0]], [[1j]], [[0.0]]))
    assert massless_transport_defect(massless, reflect_packet, 1.0) < 1e-10


def test_time_reversal(reflect_spec, reflect_packet):
    assert reflection_time_reversal_check(reflect_spec, reflect_packet, 1.0).max_defect < 1e-8


def test_current_requires_same_grid(reflect_packet):
    other = gaussian_packet(SpectralGrid(16.0, 256), 4.0, 2.0, -3.0, np.ones(1))
    with pytest.raises(GridMismatch):
        probability_current(reflect_packet, other, 0.0)
    profile = current_profile(reflect_packet, reflect_packet)
    assert np.all(profile == 0)

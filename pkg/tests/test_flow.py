import time

import numpy as np
import pytest
from numpy.testing import assert_allclose

from christoffel_minkowski_pde.model.flow import Breakdown, FlowParams, FlowState, TerminalStatus, \
    TrajectoryRecord, flow_for, rescale_factor, rescale_snapshot, rhs_normalized, run_flow, stable_dt, \
    stage_speed, step
from christoffel_minkowski_pde.model.functionals import integrate_sphere
from christoffel_minkowski_pde.model.grid import build_grid
from christoffel_minkowski_pde.model.radial_profile import Parity, RadialProfile, value_at_equator
from christoffel_minkowski_pde.model.scenarios import make_scenario, phi_family, spheroid_profile
from christoffel_minkowski_pde.utils.exceptions import BreakdownError, GridMismatchError, ParameterError


def _params(n=2, k=1, p=3., num_points=32, **kwargs):
    grid = build_grid(n, num_points)
    return FlowParams(n, k, p, phi_family(grid, "constant"), **kwargs)


def _weighted_power(h, params):
    return integrate_sphere(h.with_values(h.values ** params.p / params.phi.values))


def test_params_validation():
    grid = build_grid(2, 32)
    with pytest.raises(ParameterError, match="k must satisfy"):
        FlowParams(2, 3, 3., phi_family(grid, "constant"))
    with pytest.raises(ParameterError):
        FlowParams(2, 1, 3., phi_family(grid, "tilted", delta=0.3))
    with pytest.raises(GridMismatchError):
        FlowParams(3, 1, 3., phi_family(grid, "constant"))
    with pytest.raises(ParameterError):
        FlowParams(2, 1, 3., phi_family(grid, "constant"), cfl=0.)
    with pytest.raises(ParameterError):
        FlowParams(2, 1, 3., phi_family(grid, "constant"), normalization="sometimes")
    params = FlowParams(2, 2, 4., phi_family(grid, "tilted", delta=0.3))
    with pytest.raises(AttributeError):
        params.p = 2.


def test_stable_dt_of_round_sphere():
    params = _params(num_points=256)
    state = FlowState.from_profile(0., RadialProfile(params.grid, np.ones(256)), params)
    assert_allclose(stable_dt(state, params), 0.2 * params.grid.dtheta ** 2 / 0.5, rtol=1e-12)
    late = FlowState.from_profile(params.t_max - 1e-9, state.h, params)
    assert_allclose(stable_dt(late, params), 1e-9, rtol=1e-5)


def test_round_sphere_is_stationary():
    params = _params()
    state = FlowState.from_profile(0., RadialProfile(params.grid, np.ones(32)), params)
    assert np.max(np.abs(rhs_normalized(state, params).values)) < 1e-13
    new_state = step(state, params, stable_dt(state, params))
    assert_allclose(new_state.h.values, 1., atol=1e-12)


def test_stage_kernels_match_states():
    grid = build_grid(3, 64)
    params = FlowParams(3, 2, 4., phi_family(grid, "sin2_power", epsilon=0.2, m=5.))
    state = FlowState.from_profile(0., spheroid_profile(grid, 1., 1.3), params)
    speed, eta_value = stage_speed(state.h.values, params)
    assert_allclose(speed, state.speed.values, rtol=1e-12)
    assert_allclose(eta_value, state.eta, rtol=1e-12)
    flow = flow_for(params)
    assert_allclose(flow.stage_rhs(state.h.values), rhs_normalized(state, params).values, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("p, k, exact", [
    (3., 1, lambda t: 1 + t),
    (4., 1, lambda t: np.sqrt(1 + 2 * t)),
    (2., 2, lambda t: 1 / (1 - t)),
])
def test_unnormalized_spheres(p, k, exact):
    # d/dt R = R^(2-p+k)
    params = _params(k=k, p=p, normalization="unnormalized")
    state = FlowState.from_profile(0., RadialProfile(params.grid, np.ones(32)), params)
    while state.time < 0.2 - 1e-12:
        state = step(state, params, min(stable_dt(state, params), 0.2 - state.time))
    assert_allclose(state.h.values, exact(state.time), rtol=1e-7)


def test_step_rejects_bad_dt():
    params = _params()
    state = FlowState.from_profile(0., RadialProfile(params.grid, np.ones(32)), params)
    with pytest.raises(ParameterError):
        step(state, params, 0.)


def test_step_breakdown_keeps_state():
    params = _params()
    h = RadialProfile(params.grid, np.ones(32))
    state = FlowState.from_profile(0., h.with_values(-h.values), params)
    assert state.broken == Breakdown.NEGATIVE_H
    with pytest.raises(BreakdownError) as error:
        step(state, params, 1e-3)
    assert error.value.reason == Breakdown.NEGATIVE_H
    assert np.all(state.h.values == -1.)


@pytest.mark.parametrize("p", [3., -2., 0.])
def test_rescale_snapshot(p):
    params = _params(p=p)
    h = spheroid_profile(params.grid, 1., 1.3)
    rescaled = rescale_snapshot(h, params)
    if p == 0:
        log_mean = integrate_sphere(h.with_values(np.log(rescaled.values))) / params.inv_phi_integral
        assert abs(log_mean) < 1e-13
    else:
        assert_allclose(_weighted_power(rescaled, params), params.inv_phi_integral, rtol=1e-13)
    assert_allclose(rescale_factor(rescaled, params), 1., rtol=1e-13)


def test_conservation_without_projection():
    params = _params(t_max=0.5)
    h = rescale_snapshot(spheroid_profile(params.grid, 1., 1.3), params)
    state = FlowState.from_profile(0., h, params)
    initial = _weighted_power(state.h, params)
    while state.time < 0.5 - 1e-12:
        state = step(state, params, min(stable_dt(state, params), 0.5 - state.time))
    assert_allclose(_weighted_power(state.h, params), initial, rtol=1e-6)


def test_conservation_with_projection():
    params = _params(renorm_projection=True, t_max=0.2)
    record = run_flow(spheroid_profile(params.grid, 1., 1.3), params)
    assert_allclose(_weighted_power(record.final_state.h, params), params.inv_phi_integral, rtol=1e-12)


def test_run_flow_round_sphere_converges_at_once():
    params = _params()
    record = run_flow(RadialProfile(params.grid, 3 * np.ones(32)), params)
    assert record.terminal_status.kind == TerminalStatus.CONVERGED
    assert record.steps == 0
    assert_allclose(record.final_state.h.values, 1., rtol=1e-13)
    assert len(record.samples) == 1


def test_run_flow_reaches_t_max():
    params = _params(t_max=0.05, sample_stride=3)
    record = run_flow(spheroid_profile(params.grid, 1., 1.3), params)
    assert record.terminal_status.kind == TerminalStatus.T_MAX_REACHED
    assert_allclose(record.final_state.time, 0.05, rtol=1e-10)
    times = record.times
    assert np.all(np.diff(times) > 0)
    assert times[-1] == record.final_state.time
    entropy = np.array([monitor.entropy_A for monitor in record.monitors])
    assert np.all(np.diff(entropy) >= -1e-8 * entropy[:-1])


def test_run_flow_rejects_bad_initial_data():
    params = _params()
    grid = params.grid
    with pytest.raises(ParameterError):
        run_flow(RadialProfile(grid, -np.ones(32)), params)
    with pytest.raises(ParameterError):
        run_flow(RadialProfile(grid, 1 + 0.1 * grid.sin, Parity.NONE, reflection=1), params)
    with pytest.raises(GridMismatchError):
        run_flow(RadialProfile(build_grid(2, 64), np.ones(64)), params)


def test_run_flow_counterexample_breaks_down():
    scenario = make_scenario("counterexample", 64)
    scenario.check()
    seen = []
    record = run_flow(scenario.initial, scenario.params, on_step=seen.append)
    status = record.terminal_status
    assert status.kind == TerminalStatus.BREAKDOWN
    assert status.reason == Breakdown.LOSS_OF_CONVEXITY
    assert str(status).startswith("breakdown(loss_of_convexity, ")
    assert record.monitors[-1].zeta1_min < 0
    assert len(seen) == record.steps + 1
    # Convexity is lost at the equator, where zeta1 starts flat
    assert value_at_equator(seen[0].radii.zeta1) > scenario.params.breakdown_zeta_tol
    assert value_at_equator(record.final_state.radii.zeta1) < scenario.params.breakdown_zeta_tol


def test_trajectory_record_skips_repeated_times():
    record = TrajectoryRecord()
    record.append(0., None)
    record.append(0., None)
    record.append(1., None)
    assert list(record.times) == [0., 1.]


def test_stable_dt_quarters_when_cells_double():
    steps = []
    for num_points in (64, 128, 256):
        params = _params(num_points=num_points)
        state = FlowState.from_profile(0., spheroid_profile(params.grid, 1., 1.3), params)
        steps.append(stable_dt(state, params))
    assert_allclose(np.array(steps[1:]) / np.array(steps[:-1]), 0.25, rtol=1e-2)


def test_perturbed_round_sphere_relaxes_at_stable_dt():
    # Grid-scale noise reaches the pole cells, the stiffest rows of the step
    params = _params(num_points=64)
    noise = np.random.default_rng(7).standard_normal(64)
    h = rescale_snapshot(RadialProfile(params.grid, 1 + 1e-5 * (noise + noise[::-1]) / 2), params)
    initial = np.max(np.abs(h.values - 1))
    state = FlowState.from_profile(0., h, params)
    for _ in range(200):
        state = step(state, params, stable_dt(state, params))
    assert np.max(np.abs(state.h.values - 1)) <= 2 * initial


def test_preserved_quantity_minimum_never_decreases():
    scenario = make_scenario("theorem1", 64, normalization="unnormalized", t_max=0.1, sample_stride=10)
    record = run_flow(scenario.initial, scenario.params)
    assert record.terminal_status.kind == TerminalStatus.T_MAX_REACHED
    q_min = np.array([monitor.preserved_Q_min for monitor in record.monitors])
    assert np.all(np.isfinite(q_min))
    assert np.all(np.diff(q_min) >= -1e-10)


def _assert_entropy_and_conservation(record, params):
    entropy = np.array([monitor.entropy_A for monitor in record.monitors])
    assert np.all(np.diff(entropy) >= -1e-8 * np.abs(entropy[:-1]))
    conservation = np.array([monitor.conservation for monitor in record.monitors])
    assert_allclose(conservation, params.inv_phi_integral, rtol=1e-6)


def _assert_speed_and_gradient_bounds(record):
    monitors = record.monitors
    first, last = monitors[0], monitors[-1]
    # The speed stays between its initial extremes and the soliton constant
    limit = (last.speed_min + last.speed_max) / 2
    assert max(monitor.speed_max for monitor in monitors) <= 1.05 * max(first.speed_max, limit)
    assert min(monitor.speed_min for monitor in monitors) >= 0.95 * min(first.speed_min, limit)
    assert max(monitor.grad_log_h_max for monitor in monitors) <= 10 * first.grad_log_h_max


@pytest.mark.slow
def test_spheroid_converges_to_round_sphere():
    scenario = make_scenario("spheroid_sphere", 256, sample_stride=10)
    start = time.perf_counter()
    record = run_flow(scenario.initial, scenario.params)
    elapsed = time.perf_counter() - start
    assert record.terminal_status.kind == TerminalStatus.CONVERGED
    assert np.max(np.abs(record.final_state.h.values - 1)) <= 1e-5
    assert record.monitors[-1].soliton_residual <= 1e-6
    _assert_entropy_and_conservation(record, scenario.params)
    _assert_speed_and_gradient_bounds(record)
    assert elapsed <= 60


@pytest.mark.slow
def test_oblate_and_prolate_spheroids_share_the_limit():
    limits = []
    for name in ("spheroid_sphere", "uniqueness_oblate"):
        scenario = make_scenario(name, 128, sample_stride=20)
        record = run_flow(scenario.initial, scenario.params)
        assert record.terminal_status.kind == TerminalStatus.CONVERGED
        _assert_entropy_and_conservation(record, scenario.params)
        limits.append(record.final_state.h.values)
    assert_allclose(limits[1], limits[0], atol=1e-5)


@pytest.mark.slow
def test_theorem1_scenario_converges():
    scenario = make_scenario("theorem1", 64, sample_stride=20)
    scenario.check()
    record = run_flow(scenario.initial, scenario.params)
    assert record.terminal_status.kind == TerminalStatus.CONVERGED
    assert record.monitors[-1].soliton_residual <= 1e-5
    assert min(monitor.zeta1_min for monitor in record.monitors) > 0
    assert min(monitor.zeta2_min for monitor in record.monitors) > 0
    _assert_entropy_and_conservation(record, scenario.params)
    _assert_speed_and_gradient_bounds(record)


@pytest.mark.slow
def test_theorem1a_scenario_converges():
    scenario = make_scenario("theorem1a", 64, sample_stride=20)
    record = run_flow(scenario.initial, scenario.params)
    assert record.terminal_status.kind == TerminalStatus.CONVERGED
    assert record.final_state.h.parity is Parity.NONE
    assert record.monitors[-1].soliton_residual <= 1e-5
    _assert_entropy_and_conservation(record, scenario.params)


@pytest.mark.slow
def test_normalizations_share_the_limit():
    normalized = make_scenario("spheroid_sphere", 128, sample_stride=20)
    unnormalized = make_scenario("spheroid_sphere", 128, normalization="unnormalized", t_max=1e12,
                                 sample_stride=20)
    rescaled = make_scenario("spheroid_sphere", 128, normalization="rescale_each_step", sample_stride=20)
    limits = []
    for scenario in (normalized, unnormalized, rescaled):
        record = run_flow(scenario.initial, scenario.params)
        assert record.terminal_status.kind == TerminalStatus.CONVERGED
        limits.append(rescale_snapshot(record.final_state, scenario.params).values)
    assert_allclose(limits[1], limits[0], atol=1e-4)
    assert_allclose(limits[2], limits[0], atol=1e-4)

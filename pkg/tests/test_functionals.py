import numpy as np
import pytest
from numpy.testing import assert_allclose

from christoffel_minkowski_pde.model.curvature import principal_radii
from christoffel_minkowski_pde.model.flow import FlowParams, FlowState, flow_for, run_flow, stable_dt
from christoffel_minkowski_pde.model.functionals import MonitorRecord, closure_integral, convexity_condition, \
    counterexample_rate, entropy_A, firey_defect, firey_identity_rhs, grad_log_h_max, \
    h_evolution_residual, mixed_volume_bounds, monitor_record, preserved_Q, preserved_Q_rate, soliton_residual, \
    speed_evolution_residual
from christoffel_minkowski_pde.model.grid import build_grid
from christoffel_minkowski_pde.model.radial_profile import RadialProfile, value_at_equator
from christoffel_minkowski_pde.model.scenarios import counterexample_h0, counterexample_phi, make_scenario, phi_family, \
    spheroid_profile
from christoffel_minkowski_pde.utils.exceptions import ParameterError


def _params(n=2, k=1, p=3., num_points=64, phi=None, **kwargs):
    grid = build_grid(n, num_points)
    phi = phi if phi is not None else phi_family(grid, "constant")
    return FlowParams(n, k, p, phi, **kwargs)


@pytest.mark.parametrize("p", [3., 0., -1.5])
def test_entropy_is_scale_invariant(p):
    params = _params(p=p)
    h = spheroid_profile(params.grid, 1., 1.3)
    assert_allclose(entropy_A(h.with_values(2.7 * h.values), params), entropy_A(h, params), rtol=1e-12)


def test_soliton_residual():
    params = _params()
    assert soliton_residual(RadialProfile(params.grid, np.ones(64)), params) < 1e-14
    assert soliton_residual(spheroid_profile(params.grid, 1., 1.3), params) > 1e-2
    with pytest.raises(ParameterError):
        soliton_residual(RadialProfile(params.grid, -np.ones(64)), params)


def test_grad_log_h_max():
    grid = build_grid(2, 256)
    assert grad_log_h_max(RadialProfile(grid, 2 * np.ones(256))) == 0.
    h = spheroid_profile(grid, 1., 1.3)
    exact = (1.3 ** 2 - 1.) * np.abs(grid.sin * grid.cos) / h.values ** 2
    assert_allclose(grad_log_h_max(h), np.max(exact), rtol=1e-5)


def test_mixed_volume_bounds():
    params = _params(n=3, k=2)
    lower, value, upper = mixed_volume_bounds(spheroid_profile(params.grid, 1., 1.3), params)
    assert lower <= value <= upper
    assert_allclose(mixed_volume_bounds(RadialProfile(params.grid, 2 * np.ones(64)), params), (8., 8., 8.))


@pytest.mark.parametrize("n, k", [(2, 1), (3, 1), (3, 2), (4, 2), (5, 4)])
def test_firey_constant_anisotropy(n, k):
    grid = build_grid(n, 64)
    report = firey_defect(phi_family(grid, "constant"), n, k)
    assert_allclose(report.defect.values, k / n, atol=1e-10)
    assert np.all(report.tail_positive)
    assert report.closes and report.holds


def test_firey_needs_k_below_n():
    grid = build_grid(2, 32)
    with pytest.raises(ParameterError):
        firey_defect(phi_family(grid, "constant"), 2, 2)


@pytest.mark.parametrize("n, k", [(2, 1), (3, 2), (4, 1)])
def test_firey_identity(n, k):
    # 1/phi = sigma_k(h) is the Firey defect of its own support function
    grid = build_grid(n, 256)
    h = spheroid_profile(grid, 1., 1.3)
    sigma_k = principal_radii(h, n, k).sigma_k
    report = firey_defect(sigma_k.with_values(1 / sigma_k.values), n, k)
    assert_allclose(report.defect.values, firey_identity_rhs(h, n, k).values, atol=5e-4)
    assert report.holds


def test_closure():
    grid = build_grid(2, 128)
    assert abs(closure_integral(phi_family(grid, "constant"), 2)) < 1e-13
    assert abs(closure_integral(phi_family(grid, "sin2_power", epsilon=0.2, m=5.), 2)) < 1e-13
    assert closure_integral(phi_family(grid, "tilted", delta=0.3), 2) < -1e-2


def test_tilted_firey_does_not_close():
    grid = build_grid(3, 64)
    report = firey_defect(phi_family(grid, "tilted", delta=0.3), 3, 1)
    assert not report.closes
    assert not report.holds


def test_convexity_condition():
    grid = build_grid(3, 128)
    min_eig, ok = convexity_condition(phi_family(grid, "sin2_power", epsilon=0.2, m=5.), 5.)
    assert_allclose(min_eig, 0.8, atol=1e-3)
    assert ok
    min_eig, ok = convexity_condition(counterexample_phi(grid, 3.), 3.)
    assert_allclose(min_eig, -0.5, atol=1e-3)
    assert not ok
    min_eig, ok = convexity_condition(phi_family(grid, "constant"), 4.)
    assert_allclose(min_eig, 1., atol=1e-12)
    assert ok


def test_convexity_condition_is_scale_equivariant():
    grid = build_grid(2, 64)
    phi = counterexample_phi(grid, 3.)
    min_eig, ok = convexity_condition(phi, 3.)
    scaled_eig, scaled_ok = convexity_condition(phi.with_values(2. ** 3 * phi.values), 3.)
    assert_allclose(scaled_eig, 2 * min_eig, rtol=1e-10)
    assert scaled_ok == ok


def test_preserved_quantity_of_round_sphere():
    params = _params(n=2, k=1, p=3.)
    report = preserved_Q(RadialProfile(params.grid, np.ones(64)), params.phi, params)
    assert_allclose(report.defect.values, 0.5, atol=1e-10)


def test_preserved_quantity_rate():
    grid = build_grid(3, 128)
    params = _params(n=3, k=2, p=4., num_points=128, normalization="unnormalized",
                     phi=phi_family(grid, "sin2_power", epsilon=0.2, m=5.))
    state = FlowState.from_profile(0., spheroid_profile(params.grid, 1., 1.3), params)
    dt = 1e-6
    after = flow_for(params).step(state, dt)
    measured = (preserved_Q(after.h, params.phi, params).defect.values
                - preserved_Q(state.h, params.phi, params).defect.values) / dt
    expected = preserved_Q_rate(state.h, params).values
    assert_allclose(measured, expected, atol=1e-3 * np.max(np.abs(expected)))
    assert np.all(expected > 0)


def test_h_evolution_identity():
    grid = build_grid(3, 64)
    params = _params(n=3, k=2, p=4., phi=phi_family(grid, "sin2_power", epsilon=0.2, m=5.))
    state = FlowState.from_profile(0., spheroid_profile(params.grid, 1., 1.3), params)
    assert np.max(np.abs(h_evolution_residual(state, params).values)) < 1e-10


def test_speed_evolution_residual_is_second_order_in_time():
    params = _params(num_points=32)
    state = FlowState.from_profile(0., spheroid_profile(params.grid, 1., 1.3), params)
    flow = flow_for(params)
    base = stable_dt(state, params)
    residuals = []
    for dt in (base / 2, base / 4):
        now = flow.step(state, dt)
        after = flow.step(now, dt)
        residuals.append(np.max(np.abs(speed_evolution_residual(state, now, after, dt, params).values)))
    assert np.log2(residuals[0] / residuals[1]) >= 1.8


@pytest.mark.slow
def test_speed_evolution_residual_under_joint_refinement():
    residuals = []
    for num_points in (32, 64, 128):
        scenario = make_scenario("spheroid_sphere", num_points, t_max=0.5)
        params = scenario.params
        # Restarted clock, so that t_max does not cap the step
        start = FlowState.from_profile(0., run_flow(scenario.initial, params).final_state.h, params)
        flow = flow_for(params)
        dt = stable_dt(start, params) / 2
        now = flow.step(start, dt)
        after = flow.step(now, dt)
        residuals.append(np.max(np.abs(speed_evolution_residual(start, now, after, dt, params).values)))
    orders = np.log2(np.array(residuals[:-1]) / np.array(residuals[1:]))
    assert np.all(orders >= 1.8)


def test_counterexample_rate():
    grid = build_grid(2, 128)
    phi = counterexample_phi(grid, 3.)
    params = FlowParams(2, 1, 3., phi, normalization="unnormalized")
    h0 = counterexample_h0(grid)
    rate = counterexample_rate(h0, phi, params)
    assert rate < 0
    # Slope of zeta1 at the equator after one short step
    state = FlowState.from_profile(0., h0, params)
    dt = 1e-5
    after = flow_for(params).step(state, dt)
    measured = (value_at_equator(after.radii.zeta1) - value_at_equator(state.radii.zeta1)) / dt
    assert_allclose(measured, rate, rtol=1e-2)


def test_counterexample_slope_under_refinement():
    slopes, rates = [], []
    for num_points in (128, 256, 512):
        grid = build_grid(2, num_points)
        phi = counterexample_phi(grid, 3.)
        params = FlowParams(2, 1, 3., phi, normalization="unnormalized")
        h0 = counterexample_h0(grid)
        state = FlowState.from_profile(0., h0, params)
        dt = stable_dt(state, params) / 4
        after = flow_for(params).step(state, dt)
        slopes.append((value_at_equator(after.radii.zeta1) - value_at_equator(state.radii.zeta1)) / dt)
        rates.append(counterexample_rate(h0, phi, params))
    extrapolated = (16 * slopes[2] - slopes[1]) / 15
    assert_allclose(extrapolated, rates[-1], rtol=1e-2)
    assert_allclose(rates, -27 / 16, rtol=1e-3)


def test_counterexample_rate_needs_flat_equator():
    params = _params()
    with pytest.raises(ParameterError):
        counterexample_rate(spheroid_profile(params.grid, 1., 1.3), params.phi, params)


def test_monitor_record():
    params = _params(n=3, k=2, p=4.)
    state = FlowState.from_profile(0., RadialProfile(params.grid, np.ones(64)), params)
    record = monitor_record(state, params)
    assert MonitorRecord.field_names()[0] == "time"
    assert len(record.as_tuple()) == len(MonitorRecord.field_names())
    assert_allclose(record.eta, 1., rtol=1e-12)
    assert_allclose(record.sigma_k_min, 1., rtol=1e-12)
    assert_allclose(record.preserved_Q_min, 2 / 3, rtol=1e-10)
    assert record.soliton_residual < 1e-14
    # k = n has no preserved quantity
    record = monitor_record(FlowState.from_profile(0., state.h, _params(n=3, k=3, p=4.)), _params(n=3, k=3, p=4.))
    assert np.isnan(record.preserved_Q_min)

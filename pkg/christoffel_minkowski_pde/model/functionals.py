# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/03 15:02
# @Project  : expanding_curvature_flow
# @File     : functionals.py
# @Software : PyCharm
from dataclasses import dataclass, fields, astuple
from functools import lru_cache
from typing import Tuple, TYPE_CHECKING

import numpy as np
from numpy.polynomial import polynomial

from christoffel_minkowski_pde.model.curvature import PrincipalRadii, azimuthal_term, linearized_L, \
    principal_radii, sigma_k_partials, validate_orders
from christoffel_minkowski_pde.model.radial_profile import Parity, RadialProfile, d_theta, d2_theta, \
    integrate_sphere, value_at_equator
from christoffel_minkowski_pde.utils.exceptions import ParameterError

if TYPE_CHECKING:
    from christoffel_minkowski_pde.model.flow import FlowParams, FlowState

# Cells with cos(theta) below this many dtheta use the series limit of tail / cos^n
_SERIES_CELLS = 10
# Relative size of the closure value below which the south pole is treated as closed
_CLOSURE_RTOL = 1e-10
# Admissible size of zeta1 and its first two derivatives at the equator for the loss-of-convexity rate
_FLAT_TOL = 1e-8
# Half-width (in nodes) of the equatorial fit used to measure the derivatives of zeta1
_FLAT_FIT_NODES = 4


@dataclass(frozen=True)
class MonitorRecord:
    """
    Snapshot of every tracked functional and observed bound at one time.
    """
    time: float
    entropy_A: float
    eta: float
    conservation: float
    h_min: float
    h_max: float
    sigma_k_min: float
    sigma_k_max: float
    zeta1_min: float
    zeta2_min: float
    grad_log_h_max: float
    soliton_residual: float
    speed_min: float
    speed_max: float
    mixed_volume: float
    preserved_Q_min: float

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def as_tuple(self) -> tuple:
        return astuple(self)


@dataclass(frozen=True)
class FireyReport:
    """
    Pointwise defect of a Firey-type inequality, its tail integral and the closure value at the south pole.
    """
    defect: RadialProfile
    tail: RadialProfile
    tail_positive: np.ndarray
    closure: float
    closes: bool

    @property
    def holds(self) -> bool:
        """
        All three conditions (positive defect, positive tail, closure).
        """
        return bool(np.all(self.defect.values > 0) and np.all(self.tail_positive) and self.closes)


def _radii(h: RadialProfile, params: "FlowParams", radii: PrincipalRadii = None) -> PrincipalRadii:
    return radii if radii is not None else principal_radii(h, params.n, params.k)


def _weighted_power_integral(h: RadialProfile, params: "FlowParams") -> float:
    inv_phi = 1 / params.phi.values
    if params.p == 0:
        return integrate_sphere(h.with_values(np.log(h.values) * inv_phi))
    return integrate_sphere(h.with_values(h.values ** params.p * inv_phi))


def entropy_A(h: RadialProfile, params: "FlowParams", radii: PrincipalRadii = None) -> float:
    """
    Scale invariant functional int h sigma_k dx (int h^p / phi dx)^(-(k+1)/p), with the exponential of the weighted
    log-mean for p = 0. It is non-decreasing along the normalized flow.
    """
    if np.any(h.values <= 0):
        raise ParameterError("'h' must be strictly positive.")
    radii = _radii(h, params, radii)
    mixed = integrate_sphere(h.with_values(h.values * radii.sigma_k.values))
    if params.p == 0:
        log_mean = _weighted_power_integral(h, params) / params.inv_phi_integral
        return float(np.exp(-(params.k + 1) * log_mean) * mixed)
    return float(mixed * _weighted_power_integral(h, params) ** (-(params.k + 1) / params.p))


def soliton_speed(h: RadialProfile, params: "FlowParams", radii: PrincipalRadii = None) -> RadialProfile:
    """
    phi h^(1-p) sigma_k, constant exactly on solitons.
    """
    radii = _radii(h, params, radii)
    return h.with_values(params.phi.values * h.values ** (1 - params.p) * radii.sigma_k.values)


def soliton_constant(h: RadialProfile, params: "FlowParams", radii: PrincipalRadii = None) -> float:
    """
    Mean of phi h^(1-p) sigma_k under the measure of the sphere.
    """
    return integrate_sphere(soliton_speed(h, params, radii)) / h.grid.omega_n


def soliton_residual(h: RadialProfile, params: "FlowParams", radii: PrincipalRadii = None) -> float:
    """
    max |s - c| / c with s = phi h^(1-p) sigma_k and c its mean.

    Raises
    ------
    ParameterError
        If the mean is not positive.
    """
    speed = soliton_speed(h, params, radii)
    mean = integrate_sphere(speed) / h.grid.omega_n
    if not mean > 0:
        raise ParameterError(f"The mean of phi h^(1-p) sigma_k must be positive. Currently is {mean:.6g}.")
    return float(np.max(np.abs(speed.values - mean)) / mean)


def grad_log_h_max(h: RadialProfile) -> float:
    """
    max |h_theta| / h over the grid.
    """
    return float(np.max(np.abs(d_theta(h).values) / h.values))


def mixed_volume_bounds(h: RadialProfile, params: "FlowParams", radii: PrincipalRadii = None) \
        -> Tuple[float, float, float]:
    """
    (h_min^(k+1), int h sigma_k dx / omega_n, h_max^(k+1)).
    """
    radii = _radii(h, params, radii)
    mixed = integrate_sphere(h.with_values(h.values * radii.sigma_k.values)) / h.grid.omega_n
    return h.min ** (params.k + 1), mixed, h.max ** (params.k + 1)


@lru_cache(maxsize=None)
def _cell_measures(grid) -> Tuple[np.ndarray, np.ndarray]:
    # Exact measure cos^(n-1) sin d alpha of every cell, and of its upper half
    cos_n = lambda angle: np.cos(np.clip(angle, -np.pi / 2, np.pi / 2)) ** grid.n / grid.n
    lower, upper = grid.theta - grid.dtheta / 2, grid.theta + grid.dtheta / 2
    cells, upper_halves = cos_n(lower) - cos_n(upper), cos_n(grid.theta) - cos_n(upper)
    cells.setflags(write=False)
    upper_halves.setflags(write=False)
    return cells, upper_halves


def tail_integral(g: RadialProfile) -> Tuple[np.ndarray, float]:
    """
    int_theta^(pi/2) cos^(n-1)(a) sin(a) g(a) da at every node, accumulated from the north pole with the exact
    measure of each cell, and its value at theta = -pi/2.
    """
    cells, upper_halves = _cell_measures(g.grid)
    contributions = cells * g.values
    accumulated = np.cumsum(contributions[::-1])[::-1]
    tail = accumulated - contributions + upper_halves * g.values
    return tail, float(accumulated[0])


def _firey_type(g: RadialProfile, n: int, k: int) -> FireyReport:
    grid = g.grid
    validate_orders(n, k)
    if k >= n:
        raise ParameterError(f"Firey-type conditions need k < n. Currently k={k}, n={n}.")
    tail, closure = tail_integral(g)
    cos_n = grid.cos ** n
    ratio = tail / cos_n
    scale = np.sum(np.abs(_cell_measures(grid)[0] * g.values))
    closes = abs(closure) <= _CLOSURE_RTOL * scale
    # Series tail / cos^n = g / n - s^2 g_thth / (n (n + 2)) near the poles
    series = g.values / n - grid.pole_distance ** 2 * d2_theta(g).values / (n * (n + 2))
    near = grid.cos < _SERIES_CELLS * grid.dtheta
    if not closes:
        near &= grid.theta > 0
    ratio[near] = series[near]
    defect = g.with_values(g.values - (n - k) * ratio, reflection=1)
    return FireyReport(defect, g.with_values(tail, reflection=1), tail > 0, closure, bool(closes))


def _scalar_profile(phi: RadialProfile, values) -> RadialProfile:
    return phi.with_values(values, reflection=1)


def firey_defect(phi: RadialProfile, n: int, k: int) -> FireyReport:
    """
    Defect 1/phi - (n-k) cos^(-n) int_theta^(pi/2) cos^(n-1) sin / phi of the third Firey condition, with the tail
    positivity flags and closure value of the second one.

    Parameters
    ----------
    phi : RadialProfile
        Positive prescribed function.
    n : int
        Dimension of the sphere.
    k : int
        Order of the curvature function, k < n.

    Returns
    -------
    FireyReport
    """
    return _firey_type(_scalar_profile(phi, 1 / phi.values), n, k)


def firey_identity_rhs(h: RadialProfile, n: int, k: int) -> RadialProfile:
    """
    (k/n) zeta1 zeta2^(k-1): the Firey defect of 1/phi = sigma_k(h) under the normalization sigma_k(1,...,1) = 1.
    """
    radii = principal_radii(h, n, k)
    return h.with_values(k / n * radii.zeta1.values * radii.zeta2.values ** (k - 1))


def closure_integral(phi: RadialProfile, n: int) -> float:
    """
    Polar component of int x / phi(x) dx, the only one surviving rotational symmetry.
    """
    if phi.grid.n != n:
        raise ParameterError(f"'n'={n} does not match the grid dimension {phi.grid.n}.")
    # x_(n+1) / phi is odd exactly when phi is even
    parity = Parity.ODD if phi.parity is Parity.EVEN else Parity.NONE
    return integrate_sphere(phi.with_values(phi.grid.sin / phi.values, parity, reflection=1))


def preserved_Q(h: RadialProfile, phi: RadialProfile, params: "FlowParams") -> FireyReport:
    """
    h^(p-1)/phi - (n-k) cos^(-n) int_theta^(pi/2) cos^(n-1) sin h^(p-1) / phi, positive along the flow for p > 1
    when it is positive initially.
    """
    if np.any(h.values <= 0):
        raise ParameterError("'h' must be strictly positive.")
    return _firey_type(_scalar_profile(h, h.values ** (params.p - 1) / phi.values), params.n, params.k)


def preserved_Q_rate(h: RadialProfile, params: "FlowParams") -> RadialProfile:
    """
    Time derivative of preserved_Q along the unnormalized flow: (p-1) times the Firey defect of sigma_k.
    """
    radii = principal_radii(h, params.n, params.k)
    report = _firey_type(radii.sigma_k, params.n, params.k)
    return report.defect.with_values((params.p - 1) * report.defect.values)


def convexity_eigenvalues(phi: RadialProfile, m: float) -> Tuple[RadialProfile, RadialProfile]:
    """
    Eigenvalues f_thth + f and f - tan(theta) f_theta of hess f + g f, with f = phi^(1/m).
    """
    if m == 0:
        raise ParameterError("'m' must be non-zero.")
    f = _scalar_profile(phi, phi.values ** (1 / m))
    df, d2f = d_theta(f), d2_theta(f)
    return f.with_values(d2f.values + f.values), f.with_values(f.values + azimuthal_term(f, df, d2f))


def convexity_condition(phi: RadialProfile, m: float) -> Tuple[float, bool]:
    """
    Smallest eigenvalue of hess phi^(1/m) + g phi^(1/m) over the grid, and whether it is positive.
    """
    meridional, azimuthal = convexity_eigenvalues(phi, m)
    min_eig = float(min(meridional.min, azimuthal.min))
    return min_eig, min_eig > 0


def _equator_derivatives(f: RadialProfile) -> Tuple[float, float, float]:
    # Least squares quartic through the central nodes, less sensitive to round-off than nested stencils
    grid = f.grid
    center = grid.num_points // 2
    start = center - _FLAT_FIT_NODES
    stop = center + _FLAT_FIT_NODES + grid.num_points % 2
    coefficients = polynomial.polyfit(grid.theta[start:stop], f.values[start:stop], 4)
    return float(coefficients[0]), float(coefficients[1]), float(2 * coefficients[2])


def counterexample_rate(h: RadialProfile, phi: RadialProfile, params: "FlowParams") -> float:
    """
    Initial rate sigma_k h^(2-p) (phi_thth + (p+k-1) phi) at theta = 0 of the meridional radius, for a support
    function whose meridional radius vanishes near the equator.

    Raises
    ------
    ParameterError
        If zeta1 or one of its first two derivatives does not vanish at the equator.
    """
    radii = principal_radii(h, params.n, params.k)
    flatness = _equator_derivatives(radii.zeta1)
    if max(abs(value) for value in flatness) > _FLAT_TOL:
        raise ParameterError("zeta1 and its first two derivatives must vanish at theta = 0."
                             + " Currently are ({:.3e}, {:.3e}, {:.3e}).".format(*flatness))
    sigma_k = value_at_equator(radii.sigma_k)
    h0 = value_at_equator(h)
    phi0, d2phi0 = value_at_equator(phi), value_at_equator(d2_theta(phi))
    return float(sigma_k * h0 ** (2 - params.p) * (d2phi0 + (params.p + params.k - 1) * phi0))


def trace_term(radii: PrincipalRadii, n: int, k: int) -> np.ndarray:
    """
    sigma_k^{ij} g_ij = d sigma_k / d zeta1 + d sigma_k / d zeta2 total.
    """
    d_zeta1, d_zeta2 = sigma_k_partials(radii.zeta1.values, radii.zeta2.values, n, k)
    return d_zeta1 + d_zeta2


def h_evolution_residual(state: "FlowState", params: "FlowParams") -> RadialProfile:
    """
    d_tau h - L h - ((1-k) Theta sigma_k + Theta h sigma_k^{ij} g_ij - eta h) along the normalized flow.
    """
    h, radii = state.h, state.radii
    d_tau_h = state.speed.values - state.eta * h.values
    theta_factor = params.phi.values * h.values ** (2 - params.p)
    expected = ((1 - params.k) * state.speed.values
                + theta_factor * h.values * trace_term(radii, params.n, params.k)
                - state.eta * h.values)
    L_h = linearized_L(h, h, params, radii).values
    return h.with_values(d_tau_h - L_h - expected)


def speed_evolution_residual(before: "FlowState", now: "FlowState", after: "FlowState", dt: float,
                             params: "FlowParams") -> RadialProfile:
    """
    Centered-in-time residual of the evolution of the speed Theta sigma_k along the normalized flow:
    d_tau (Theta sigma_k) - L(Theta sigma_k) - (2-p) phi^2 h^(3-2p) sigma_k^2 - phi^2 h^(4-2p) sigma_k tr
    + (2-p+k) eta Theta sigma_k.
    """
    h, radii, phi, p, k = now.h, now.radii, params.phi.values, params.p, params.k
    sigma_k = radii.sigma_k.values
    d_tau = (after.speed.values - before.speed.values) / (2 * dt)
    L_speed = linearized_L(now.speed, h, params, radii).values
    expected = (L_speed
                + (2 - p) * phi ** 2 * h.values ** (3 - 2 * p) * sigma_k ** 2
                + phi ** 2 * h.values ** (4 - 2 * p) * sigma_k * trace_term(radii, params.n, k)
                - (2 - p + k) * now.eta * now.speed.values)
    return h.with_values(d_tau - expected)


def tail_identity_residual(h: RadialProfile, n: int, k: int) -> np.ndarray:
    """
    d/dtheta [cos^n zeta2^k] + cos^(n-1) sin zeta2^(k-1) ((n-k) zeta2 + k zeta1); it vanishes in the continuum.
    """
    radii = principal_radii(h, n, k)
    zeta1, zeta2 = radii.zeta1.values, radii.zeta2.values
    grid = h.grid
    product = h.with_values(grid.cos ** n * zeta2 ** k, reflection=(-1) ** n)
    return (d_theta(product).values
            + grid.cos ** (n - 1) * grid.sin * zeta2 ** (k - 1) * ((n - k) * zeta2 + k * zeta1))


def monitor_record(state: "FlowState", params: "FlowParams") -> MonitorRecord:
    """
    All monitors of a state.
    """
    h, radii = state.h, state.radii
    with np.errstate(all="ignore"):
        positive = bool(np.all(h.values > 0))
        speed = soliton_speed(h, params, radii)
        try:
            residual = soliton_residual(h, params, radii)
        except ParameterError:
            residual = np.nan
        entropy = entropy_A(h, params, radii) if positive else np.nan
        conservation = _weighted_power_integral(h, params) if positive else np.nan
        _, mixed, _ = mixed_volume_bounds(h, params, radii)
        q_min = np.nan
        if params.k < params.n and params.p > 1 and positive:
            q_min = preserved_Q(h, params.phi, params).defect.min
        return MonitorRecord(
            time=state.time,
            entropy_A=entropy,
            eta=state.eta,
            conservation=conservation,
            h_min=h.min,
            h_max=h.max,
            sigma_k_min=radii.sigma_k.min,
            sigma_k_max=radii.sigma_k.max,
            zeta1_min=radii.min_zeta1,
            zeta2_min=radii.min_zeta2,
            grad_log_h_max=grad_log_h_max(h),
            soliton_residual=residual,
            speed_min=speed.min,
            speed_max=speed.max,
            mixed_volume=mixed,
            preserved_Q_min=float(q_min),
        )

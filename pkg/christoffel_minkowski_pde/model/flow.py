# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/04 09:30
# @Project  : expanding_curvature_flow
# @File     : flow.py
# @Software : PyCharm
import logging
import time as timer
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from christoffel_minkowski_pde.model.curvature import PrincipalRadii, principal_radii, radii_values, \
    sigma_k_eval, sigma_k_partials, validate_orders
from christoffel_minkowski_pde.model.functionals import MonitorRecord, monitor_record, soliton_residual
from christoffel_minkowski_pde.model.grid import LatitudeGrid
from christoffel_minkowski_pde.model.radial_profile import Parity, RadialProfile, integrate_sphere
from christoffel_minkowski_pde.utils.exceptions import BreakdownError, ParameterError, GridMismatchError
from christoffel_minkowski_pde.utils.validators import Boolean, Choice, Float, Integer, ProfileValidator

logger = logging.getLogger(__name__)

# Consecutive steps with zeta1 below tolerance before declaring loss of convexity
BREAKDOWN_SAMPLES = 3
# Lower bound of the stiffness estimate in stable_dt
EPS_FLOOR = 1e-12
# Relative slack of the final time, absorbs the round-off of the last (capped) step
T_MAX_RTOL = 1e-12


class Normalization(Enum):
    UNNORMALIZED = "unnormalized"
    NORMALIZED_PDE = "normalized_pde"
    RESCALE_EACH_STEP = "rescale_each_step"


class Breakdown:
    """
    Reasons of a breakdown.
    """
    NEGATIVE_H = "negative_h"
    NEGATIVE_SIGMA_K = "negative_sigma_k_with_k_eq_n"
    NAN = "nan"
    LOSS_OF_CONVEXITY = "loss_of_convexity"


class FlowParams:
    """
    Parameters of the flow d_t h = phi h^(2-p) sigma_k and of its time stepping.
    """
    n = Integer(lower_bound=2)
    k = Integer(lower_bound=1)
    p = Float()
    phi = ProfileValidator(positive=True)
    cfl = Float(lower_bound=(0, False), upper_bound=(1, True))
    t_max = Float(lower_bound=(0, True))
    residual_tol = Float(lower_bound=(0, False))
    normalization = Choice(Normalization)
    renorm_projection = Boolean()
    breakdown_zeta_tol = Float(upper_bound=(0, True))
    sample_stride = Integer(lower_bound=1)

    def __init__(self, n: int, k: int, p: float, phi: RadialProfile, cfl: float = 0.2, t_max: float = 50.,
                 residual_tol: float = 1e-6, normalization="normalized_pde", renorm_projection: bool = False,
                 breakdown_zeta_tol: float = -1e-8, sample_stride: int = 1):
        """
        Constructor.

        Parameters
        ----------
        n : int
            Dimension of the sphere S^n, n >= 2.
        k : int
            Order of sigma_k, 1 <= k <= n.
        p : float
            Exponent of the support function.
        phi : RadialProfile
            Positive anisotropy. Profiles that are not even are accepted only when k = n.

        Other Parameters
        ----------------
        cfl : float
            Safety factor of the parabolic step, in (0, 1]. Value by default is 0.2.
        t_max : float
            Final time. Value by default is 50.
        residual_tol : float
            Tolerance of the convergence test. Value by default is 1e-6.
        normalization : Normalization or str
            'unnormalized', 'normalized_pde' or 'rescale_each_step'. Value by default is 'normalized_pde'.
        renorm_projection : bool
            Re-project the constraint on int h^p / phi after each step. Value by default is False.
        breakdown_zeta_tol : float
            Threshold under which zeta1 counts as negative. Value by default is -1e-8.
        sample_stride : int
            Steps between recorded monitors. Value by default is 1.
        """
        self.n = n
        self.k = k
        validate_orders(self.n, self.k)
        self.p = p
        self.phi = phi
        if phi.grid.n != self.n:
            raise GridMismatchError(f"'phi' lives on {phi.grid!r}, expected n={self.n}.")
        if self.k < self.n and phi.parity is not Parity.EVEN:
            raise ParameterError("'phi' must be even when k < n (pole reflection of the curvature terms).")
        if phi.reflection != 1:
            raise ParameterError("'phi' must be a scalar field of the sphere (pole reflection +1).")
        self.cfl = cfl
        self.t_max = t_max
        self.residual_tol = residual_tol
        self.normalization = normalization
        self.renorm_projection = renorm_projection
        self.breakdown_zeta_tol = breakdown_zeta_tol
        self.sample_stride = sample_stride
        self.inv_phi_integral = integrate_sphere(phi.with_values(1 / phi.values))

    def __repr__(self):
        return (self.__class__.__name__
                + f"(n={self.n}, k={self.k}, p={self.p}, grid={self.grid!r}, cfl={self.cfl}, t_max={self.t_max},"
                + f" residual_tol={self.residual_tol}, normalization={self.normalization.value},"
                + f" renorm_projection={self.renorm_projection})")

    @property
    def grid(self) -> LatitudeGrid:
        return self.phi.grid


@dataclass(frozen=True)
class FlowState:
    """
    Current time and support function of a run, with the derived fields cached. Build it with 'from_profile' so the
    caches are never stale.
    """
    time: float
    h: RadialProfile
    radii: PrincipalRadii
    eta: float
    speed: RadialProfile
    broken: Optional[str] = None

    @classmethod
    def from_profile(cls, time: float, h: RadialProfile, params: FlowParams) -> "FlowState":
        broken = None
        if not np.all(np.isfinite(h.values)):
            broken = Breakdown.NAN
        elif not np.all(h.values > 0):
            broken = Breakdown.NEGATIVE_H
        with np.errstate(all="ignore"):
            radii = principal_radii(h, params.n, params.k)
            speed = h.with_values(params.phi.values * h.values ** (2 - params.p) * radii.sigma_k.values)
            eta_value = integrate_sphere(h.with_values(h.values * radii.sigma_k.values)) / params.inv_phi_integral
        return cls(float(time), h, radii, float(eta_value), speed, broken)


@dataclass(frozen=True)
class TerminalStatus:
    kind: str
    reason: Optional[str] = None
    time: Optional[float] = None

    CONVERGED = "converged"
    T_MAX_REACHED = "t_max_reached"
    BREAKDOWN = "breakdown"

    def __str__(self):
        if self.kind == self.BREAKDOWN:
            return f"breakdown({self.reason}, {self.time:.17g})"
        return self.kind


@dataclass
class TrajectoryRecord:
    """
    Monitors sampled along a run, its terminal status and its last valid state.
    """
    samples: List[Tuple[float, MonitorRecord]] = field(default_factory=list)
    terminal_status: Optional[TerminalStatus] = None
    final_state: Optional[FlowState] = None
    steps: int = 0

    def append(self, time: float, record: MonitorRecord):
        if self.samples and time <= self.samples[-1][0]:
            return
        self.samples.append((time, record))

    @property
    def monitors(self) -> List[MonitorRecord]:
        return [record for _, record in self.samples]

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])


def rk4_step(state: np.ndarray, t: float, dt: float, rhs: Callable[[float, np.ndarray], np.ndarray]) -> np.ndarray:
    """Take one step using 4th order Runge-Kutta."""
    k1 = rhs(t, state)
    k2 = rhs(t + dt / 2, state + dt / 2 * k1)
    k3 = rhs(t + dt / 2, state + dt / 2 * k2)
    k4 = rhs(t + dt, state + dt * k3)
    return state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def stage_speed(values: np.ndarray, params: FlowParams) -> Tuple[np.ndarray, float]:
    """
    Speed phi h^(2-p) sigma_k and global factor eta of a support function given by bare positive nodal values,
    the same quantities FlowState.from_profile caches.
    """
    grid = params.grid
    zeta1, zeta2 = radii_values(values, grid)
    sigma_k = sigma_k_eval(zeta1, zeta2, params.n, params.k)
    speed = params.phi.values * values ** (2 - params.p) * sigma_k
    eta_value = grid.omega_nm1 * np.dot(grid.weights, values * sigma_k) / params.inv_phi_integral
    return speed, float(eta_value)


def _check_power_defined(h: RadialProfile, params: FlowParams, time: float):
    exponent = 2 - params.p
    if np.any(h.values <= 0) and not (float(exponent).is_integer() and exponent >= 0):
        raise BreakdownError(Breakdown.NEGATIVE_H, time)


def eta(state: FlowState, params: FlowParams) -> float:
    """
    Global factor int h sigma_k dx / int 1/phi dx of the normalized flow.
    """
    return state.eta


def rhs_unnormalized(state: FlowState, params: FlowParams) -> RadialProfile:
    """
    Right side phi h^(2-p) sigma_k of the unnormalized flow.
    """
    _check_power_defined(state.h, params, state.time)
    return state.speed


def rhs_normalized(state: FlowState, params: FlowParams) -> RadialProfile:
    """
    Right side phi h^(2-p) sigma_k - eta h of the normalized flow.
    """
    speed = rhs_unnormalized(state, params)
    return speed.with_values(speed.values - state.eta * state.h.values)


def rescale_factor(h: RadialProfile, params: FlowParams) -> float:
    """
    Scalar lambda with int (lambda h)^p / phi = int 1/phi (p != 0), or with vanishing weighted log-mean (p = 0).
    """
    inv_phi = 1 / params.phi.values
    if params.p == 0:
        if np.any(h.values <= 0):
            raise ParameterError("The p = 0 normalization needs a strictly positive support function.")
        log_mean = integrate_sphere(h.with_values(np.log(h.values) * inv_phi)) / params.inv_phi_integral
        return float(np.exp(-log_mean))
    weighted = integrate_sphere(h.with_values(h.values ** params.p * inv_phi))
    return float((params.inv_phi_integral / weighted) ** (1 / params.p))


def rescale_snapshot(state: Union[FlowState, RadialProfile], params: FlowParams) -> RadialProfile:
    """
    Rescaled support function lambda h of the normalized hypersurface.

    Parameters
    ----------
    state : FlowState or RadialProfile
        State (or bare support function) to rescale.
    params : FlowParams
        Flow parameters.
    """
    h = state.h if isinstance(state, FlowState) else state
    if np.any(h.values <= 0):
        raise ParameterError("Only positive support functions can be rescaled.")
    return h.with_values(rescale_factor(h, params) * h.values)


def stable_dt(state: FlowState, params: FlowParams) -> float:
    """
    Explicit parabolic step: cfl * dtheta^2 over the largest diffusion coefficient, never beyond t_max.
    """
    grid = params.grid
    theta_factor = params.phi.values * state.h.values ** (2 - params.p)
    d_zeta1, d_zeta2 = sigma_k_partials(state.radii.zeta1.values, state.radii.zeta2.values, params.n, params.k)
    stiffness = max(np.max(theta_factor * d_zeta1),
                    np.max(theta_factor * np.abs(d_zeta2)) * grid.interior_tan_max * grid.dtheta,
                    EPS_FLOOR)
    dt = params.cfl * grid.dtheta ** 2 / stiffness
    return float(min(dt, params.t_max - state.time))


class AbstractFlow(ABC):
    """
    Abstract class for the time integration of the support function.
    """

    def __init__(self, params: FlowParams):
        self.params = params

    @abstractmethod
    def rhs(self, state: FlowState) -> RadialProfile:
        """
        Time derivative of h at the given state.
        """
        pass

    @abstractmethod
    def stage_rhs(self, values: np.ndarray) -> np.ndarray:
        """
        Time derivative of h from bare positive nodal values, evaluated at every Runge-Kutta stage.
        """
        pass

    def _post_step(self, h: RadialProfile) -> RadialProfile:
        """
        To use template pattern in 'step'.
        """
        if self.params.renorm_projection:
            return rescale_snapshot(h, self.params)
        return h

    def prepare(self, initial: RadialProfile) -> RadialProfile:
        """
        Initial data actually evolved.
        """
        return initial

    def comparable(self, state: FlowState) -> FlowState:
        """
        State on which the normalized convergence test is evaluated.
        """
        return state

    def step(self, state: FlowState, dt: float) -> FlowState:
        if not dt > 0:
            raise ParameterError(f"'dt' must be positive. Currently is {dt}.")
        h = state.h

        def stage(t, values):
            if not np.all(np.isfinite(values)):
                raise BreakdownError(Breakdown.NAN, state.time)
            if not np.all(values > 0):
                raise BreakdownError(Breakdown.NEGATIVE_H, state.time)
            return self.stage_rhs(values)

        values = rk4_step(h.values, state.time, dt, stage)
        if not np.all(np.isfinite(values)):
            raise BreakdownError(Breakdown.NAN, state.time + dt)
        if not np.all(values > 0):
            raise BreakdownError(Breakdown.NEGATIVE_H, state.time + dt)
        new_h = self._post_step(h.with_values(values))
        return FlowState.from_profile(state.time + dt, new_h, self.params)


class UnnormalizedFlow(AbstractFlow):
    """
    d_t h = phi h^(2-p) sigma_k
    """

    def rhs(self, state: FlowState) -> RadialProfile:
        return rhs_unnormalized(state, self.params)

    def stage_rhs(self, values: np.ndarray) -> np.ndarray:
        return stage_speed(values, self.params)[0]

    def comparable(self, state: FlowState) -> FlowState:
        return FlowState.from_profile(state.time, rescale_snapshot(state, self.params), self.params)


class NormalizedFlow(AbstractFlow):
    """
    d_tau h = phi h^(2-p) sigma_k - eta h, started on the constraint int h^p / phi = int 1/phi.
    """

    def rhs(self, state: FlowState) -> RadialProfile:
        return rhs_normalized(state, self.params)

    def stage_rhs(self, values: np.ndarray) -> np.ndarray:
        speed, eta_value = stage_speed(values, self.params)
        return speed - eta_value * values

    def prepare(self, initial: RadialProfile) -> RadialProfile:
        return rescale_snapshot(initial, self.params)


class RescaledFlow(UnnormalizedFlow):
    """
    Unnormalized flow followed by the rescaling of the hypersurface after every step.
    """

    def _post_step(self, h: RadialProfile) -> RadialProfile:
        return rescale_snapshot(h, self.params)

    def prepare(self, initial: RadialProfile) -> RadialProfile:
        return rescale_snapshot(initial, self.params)

    def comparable(self, state: FlowState) -> FlowState:
        return state


_FLOWS = {
    Normalization.UNNORMALIZED: UnnormalizedFlow,
    Normalization.NORMALIZED_PDE: NormalizedFlow,
    Normalization.RESCALE_EACH_STEP: RescaledFlow,
}


def flow_for(params: FlowParams) -> AbstractFlow:
    """
    Factory of the integrator matching the normalization mode.
    """
    return _FLOWS[params.normalization](params)


def step(state: FlowState, params: FlowParams, dt: float) -> FlowState:
    """
    One classical Runge-Kutta step of the flow selected by the normalization mode.

    Raises
    ------
    BreakdownError
        If the new support function is not finite and positive. The given state is left untouched.
    """
    return flow_for(params).step(state, dt)


def convergence_residuals(state: FlowState, params: FlowParams, flow: AbstractFlow = None) -> Tuple[float, float]:
    """
    Soliton residual and the relative size max|rhs_normalized| / max h on the normalized representative.
    """
    flow = flow if flow is not None else flow_for(params)
    try:
        residual = soliton_residual(state.h, params, radii=state.radii)
    except ParameterError:
        return np.inf, np.inf
    if not residual <= params.residual_tol:
        return residual, np.inf
    comparable = flow.comparable(state)
    drift = np.max(np.abs(rhs_normalized(comparable, params).values)) / comparable.h.max
    return residual, float(drift)


def _breakdown_flag(state: FlowState, params: FlowParams) -> Optional[str]:
    if state.broken is not None:
        return state.broken
    if not np.all(np.isfinite(state.speed.values)):
        return Breakdown.NAN
    if params.k == params.n and state.radii.sigma_k.min < params.breakdown_zeta_tol:
        return Breakdown.NEGATIVE_SIGMA_K
    return None


def validate_initial(initial: RadialProfile, params: FlowParams):
    """
    Preconditions of run_flow on the initial support function.
    """
    if initial.grid != params.grid:
        raise GridMismatchError(f"'initial' lives on {initial.grid!r}, expected {params.grid!r}.")
    if initial.reflection != 1:
        raise ParameterError("'initial' must be a scalar field of the sphere (pole reflection +1).")
    if params.k < params.n and initial.parity is not Parity.EVEN:
        raise ParameterError("'initial' must be even when k < n.")
    if not np.all(initial.values > 0):
        raise ParameterError("'initial' must be strictly positive.")


def run_flow(initial: RadialProfile, params: FlowParams, verbose: bool = False, reports_every: int = 1000,
             on_step: Callable[[FlowState], None] = None) -> TrajectoryRecord:
    """
    Iterates the flow with stable steps until the normalized solution is a soliton within tolerance, t_max is
    reached, or the support function breaks down.

    Parameters
    ----------
    initial : RadialProfile
        Positive initial support function.
    params : FlowParams
        Flow parameters.
    verbose : bool
        Log a progress line every 'reports_every' steps.
    reports_every : int
        Steps between progress lines. Value by default is 1000.
    on_step : callable
        Called with every accepted state (including the initial one).

    Returns
    -------
    TrajectoryRecord
    """
    validate_initial(initial, params)
    flow = flow_for(params)
    parity = initial.parity if params.phi.parity is Parity.EVEN else Parity.NONE
    h = flow.prepare(initial.with_values(initial.values, parity, 1))
    state = FlowState.from_profile(0., h, params)
    record = TrajectoryRecord(final_state=state)
    negative_zeta1 = 0
    n_step = 0
    time_iter = 0.
    logger.info("Starting %s flow: %r", params.normalization.value, params)
    while True:
        if on_step is not None:
            on_step(state)
        sample = n_step % params.sample_stride == 0
        # Breakdown flags
        flag = _breakdown_flag(state, params)
        if params.k < params.n and flag is None:
            negative_zeta1 = negative_zeta1 + 1 if state.radii.min_zeta1 < params.breakdown_zeta_tol else 0
            if negative_zeta1 >= BREAKDOWN_SAMPLES:
                flag = Breakdown.LOSS_OF_CONVEXITY
        if flag is not None:
            record.append(state.time, monitor_record(state, params))
            record.terminal_status = TerminalStatus(TerminalStatus.BREAKDOWN, flag, state.time)
            break
        residual, drift = convergence_residuals(state, params, flow)
        if residual <= params.residual_tol and drift <= params.residual_tol:
            record.append(state.time, monitor_record(state, params))
            record.terminal_status = TerminalStatus(TerminalStatus.CONVERGED, None, state.time)
            break
        if state.time >= params.t_max - T_MAX_RTOL * max(1., params.t_max):
            record.append(state.time, monitor_record(state, params))
            record.terminal_status = TerminalStatus(TerminalStatus.T_MAX_REACHED, None, state.time)
            break
        if sample:
            record.append(state.time, monitor_record(state, params))
        start_iter = timer.time()
        dt = stable_dt(state, params)
        try:
            state = flow.step(state, dt)
        except BreakdownError as error:
            logger.warning("Step %d stopped: %s", n_step, error)
            record.append(state.time, monitor_record(state, params))
            record.terminal_status = TerminalStatus(TerminalStatus.BREAKDOWN, error.reason, error.time)
            break
        record.final_state = state
        n_step += 1
        d_time = timer.time() - start_iter
        time_iter += d_time
        if verbose and n_step % reports_every == 0:
            logger.info("Iteration n = %d, t = %.6g, dt = %.3e, residual = %.3e, Total Time: %.3f[seg], "
                        "avg. Time/Iter: %.3f[ms]", n_step, state.time, dt, residual, time_iter,
                        time_iter / n_step * 1000)
    record.final_state = state
    record.steps = n_step
    logger.info("Flow finished after %d steps at t = %.6g: %s", n_step, state.time, record.terminal_status)
    return record

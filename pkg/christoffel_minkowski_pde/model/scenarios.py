# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/05 11:40
# @Project  : expanding_curvature_flow
# @File     : scenarios.py
# @Software : PyCharm
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Union

import numpy as np
from scipy.integrate import simpson

from christoffel_minkowski_pde.model.curvature import principal_radii, validate_orders
from christoffel_minkowski_pde.model.flow import FlowParams, validate_initial
from christoffel_minkowski_pde.model.functionals import convexity_condition
from christoffel_minkowski_pde.model.grid import LatitudeGrid, build_grid
from christoffel_minkowski_pde.model.radial_profile import Parity, RadialProfile
from christoffel_minkowski_pde.utils.exceptions import ParameterError

logger = logging.getLogger(__name__)

# Edge of the flat cap of the bump
CAP = np.pi / 4
# Composite Simpson panels of the integrals defining the counterexample support function
SIMPSON_PANELS = 10_000


class Outcome(Enum):
    CONVERGE = "converge"
    BREAKDOWN = "breakdown"


def bump_r(theta):
    """
    Even bump exp(-1/(theta^2 - (pi/4)^2)) for |theta| > pi/4, identically zero on the cap [-pi/4, pi/4] and flat
    to all orders at its edge.

    Parameters
    ----------
    theta : float or array
        Latitudes in [-pi/2, pi/2].
    """
    theta = np.asarray(theta, dtype=float)
    gap = np.atleast_1d(theta ** 2 - CAP ** 2)
    values = np.zeros_like(gap)
    outside = gap > 0
    values[outside] = np.exp(-1 / gap[outside])
    return values.reshape(theta.shape) if theta.ndim else float(values[0])


def _simpson(integrand, lower: float, upper: float) -> float:
    nodes = np.linspace(lower, upper, SIMPSON_PANELS + 1)
    return float(simpson(integrand(nodes), x=nodes))


def counterexample_h0(grid: LatitudeGrid) -> RadialProfile:
    """
    Support function sin(theta) int_0^theta r cos + cos(theta) int_theta^(pi/2) r sin, the solution of
    h'' + h = r with h'(+-pi/2) = 0, evaluated on |theta|. The integrals skip the cap where r vanishes, so h is
    exactly a multiple of cos(theta) there.
    """
    angles = np.abs(grid.theta)
    values = np.empty(grid.num_points)
    for j, angle in enumerate(angles):
        lower = max(angle, CAP)
        inner = _simpson(lambda a: bump_r(a) * np.cos(a), CAP, angle) if angle > CAP else 0.
        outer = _simpson(lambda a: bump_r(a) * np.sin(a), lower, np.pi / 2)
        values[j] = np.sin(angle) * inner + np.cos(angle) * outer
    return RadialProfile(grid, values, "even")


def counterexample_phi(grid: LatitudeGrid, m: float) -> RadialProfile:
    """
    (cos^2(theta) + 1/2)^m. Its m-th root fails the convexity condition at the equator, where
    f_thth + f = -1/2.
    """
    if not m > 0:
        raise ParameterError(f"'m' must be positive. Currently is {m}.")
    return RadialProfile(grid, (grid.cos ** 2 + 0.5) ** m, "even")


def spheroid_profile(grid: LatitudeGrid, a: float, c: float) -> RadialProfile:
    """
    Support function sqrt(a^2 cos^2 + c^2 sin^2) of the spheroid with equatorial semi-axis a and polar semi-axis c.
    """
    if not (a > 0 and c > 0):
        raise ParameterError(f"Semi-axes must be positive. Currently are a={a}, c={c}.")
    return RadialProfile(grid, np.sqrt(a ** 2 * grid.cos ** 2 + c ** 2 * grid.sin ** 2), "even")


def phi_family(grid: LatitudeGrid, kind: str, **parameters) -> RadialProfile:
    """
    Canonical anisotropies.

    Parameters
    ----------
    grid : LatitudeGrid
        Grid of the profile.
    kind : str
        'constant', 'sin2_power' (1 + epsilon sin^2)^m, 'tilted' 1 + delta sin or 'counterexample'
        (cos^2 + 1/2)^m.

    Other Parameters
    ----------------
    epsilon : float
        In (0, 1), 'sin2_power' only.
    m : float
        Positive power, 'sin2_power' and 'counterexample'.
    delta : float
        In (-1, 1), 'tilted' only. The profile has parity 'none' and reflects as a scalar through the poles.
    """
    expected = {"constant": set(), "sin2_power": {"epsilon", "m"}, "tilted": {"delta"}, "counterexample": {"m"}}
    if kind not in expected:
        raise ParameterError(f"Unknown anisotropy '{kind}'. Options are {sorted(expected)}.")
    if set(parameters) != expected[kind]:
        raise ParameterError(f"Anisotropy '{kind}' takes {sorted(expected[kind])}. Currently {sorted(parameters)}.")
    if kind == "constant":
        return RadialProfile(grid, np.ones(grid.num_points), "even")
    if kind == "counterexample":
        return counterexample_phi(grid, parameters["m"])
    if kind == "sin2_power":
        epsilon, m = parameters["epsilon"], parameters["m"]
        if not 0 < epsilon < 1:
            raise ParameterError(f"'epsilon' must be in (0, 1). Currently is {epsilon}.")
        if not m > 0:
            raise ParameterError(f"'m' must be positive. Currently is {m}.")
        return RadialProfile(grid, (1 + epsilon * grid.sin ** 2) ** m, "even")
    delta = parameters["delta"]
    if not -1 < delta < 1:
        raise ParameterError(f"'delta' must be in (-1, 1). Currently is {delta}.")
    return RadialProfile(grid, 1 + delta * grid.sin, Parity.NONE, reflection=1)


def initial_family(grid: LatitudeGrid, kind: str, **parameters) -> RadialProfile:
    """
    Initial support functions: 'sphere' (radius), 'spheroid' (a, c) or 'counterexample'.
    """
    accepted = {"sphere": {"radius"}, "spheroid": {"a", "c"}, "counterexample": set()}
    if kind not in accepted:
        raise ParameterError(f"Unknown initial body '{kind}'. Options are {sorted(accepted)}.")
    if not set(parameters) <= accepted[kind] or (kind == "spheroid" and set(parameters) != accepted[kind]):
        raise ParameterError(f"Initial body '{kind}' takes {sorted(accepted[kind])}. Currently {sorted(parameters)}.")
    if kind == "sphere":
        radius = parameters.get("radius", 1.)
        return spheroid_profile(grid, radius, radius)
    if kind == "spheroid":
        return spheroid_profile(grid, parameters["a"], parameters["c"])
    return counterexample_h0(grid)


@dataclass(frozen=True)
class ScenarioRecipe:
    """
    Grid independent description of a scenario.
    """
    n: int
    k: int
    p: float
    phi_kind: str = "constant"
    phi_parameters: Dict[str, float] = field(default_factory=dict)
    initial_kind: str = "sphere"
    initial_parameters: Dict[str, float] = field(default_factory=dict)
    normalization: str = "normalized_pde"
    expected_outcome: str = Outcome.CONVERGE.value
    notes: str = ""


@dataclass
class ScenarioSpec:
    """
    Flow parameters and initial data of a run, with the outcome it should reach.
    """
    name: str
    params: FlowParams
    initial: RadialProfile
    expected_outcome: Outcome
    notes: str = ""

    def check(self):
        """
        Preconditions of the scenario: those of run_flow, plus the convexity condition of the anisotropy for
        converging scenarios with k < n and positivity of sigma_k for the breaking ones.

        Raises
        ------
        ParameterError
        """
        params = self.params
        validate_initial(self.initial, params)
        if params.k == params.n:
            return
        if self.expected_outcome is Outcome.CONVERGE:
            min_eig, ok = convexity_condition(params.phi, params.p + params.k - 1)
            if not ok:
                raise ParameterError(f"Scenario '{self.name}' expects convergence but phi^(1/(p+k-1)) is not convex "
                                     f"(min eigenvalue {min_eig:.6g}).")
        elif principal_radii(self.initial, params.n, params.k).sigma_k.min <= 0:
            raise ParameterError(f"Scenario '{self.name}' needs sigma_k > 0 on its initial data.")


_SCENARIOS = {
    "round_sphere": ScenarioRecipe(
        n=2, k=1, p=3,
        notes="Unit sphere with constant anisotropy, already a soliton."),
    "spheroid_sphere": ScenarioRecipe(
        n=2, k=1, p=3, initial_kind="spheroid", initial_parameters={"a": 1., "c": 1.3},
        notes="Prolate spheroid converging to the round sphere under constant anisotropy."),
    "theorem1": ScenarioRecipe(
        n=3, k=2, p=4, phi_kind="sin2_power", phi_parameters={"epsilon": 0.2, "m": 5.},
        initial_kind="spheroid", initial_parameters={"a": 1., "c": 1.3},
        notes="Even anisotropy whose (p+k-1)-th root is convex, k < n."),
    "theorem1a": ScenarioRecipe(
        n=2, k=2, p=4, phi_kind="tilted", phi_parameters={"delta": 0.3},
        initial_kind="spheroid", initial_parameters={"a": 1., "c": 1.3},
        notes="k = n with an anisotropy that is neither even nor convex."),
    "uniqueness_oblate": ScenarioRecipe(
        n=2, k=1, p=3, initial_kind="spheroid", initial_parameters={"a": 1., "c": 0.8},
        notes="Oblate partner of spheroid_sphere, same limit expected."),
    "counterexample": ScenarioRecipe(
        n=2, k=1, p=3, phi_kind="counterexample", phi_parameters={"m": 3.}, initial_kind="counterexample",
        normalization="unnormalized", expected_outcome=Outcome.BREAKDOWN.value,
        notes="Flat meridional radius on the equatorial cap; convexity is lost at theta = 0."),
}


def list_scenarios() -> List[str]:
    """
    Stable names of the registered scenarios.
    """
    return list(_SCENARIOS)


def scenario_recipe(name: str) -> ScenarioRecipe:
    if name not in _SCENARIOS:
        raise ParameterError(f"Unknown scenario '{name}'. Options are {list_scenarios()}.")
    return _SCENARIOS[name]


def _check_counterexample_orders(recipe: ScenarioRecipe):
    if recipe.phi_kind == "counterexample" or recipe.initial_kind == "counterexample":
        if recipe.k >= recipe.n:
            raise ParameterError(f"The counterexample construction requires k < n. Currently k={recipe.k}, "
                                 f"n={recipe.n}.")


def validate_recipe(recipe: ScenarioRecipe, num_points: int = 256, **engine) -> FlowParams:
    """
    Checks every precondition of a recipe without building its initial data when that is expensive (the
    counterexample support function).

    Returns
    -------
    FlowParams
        The flow parameters the recipe produces on a grid of 'num_points' cells.

    Raises
    ------
    ParameterError
    """
    validate_orders(recipe.n, recipe.k)
    _check_counterexample_orders(recipe)
    try:
        Outcome(recipe.expected_outcome)
    except ValueError:
        raise ParameterError(f"'expected_outcome' must be one of {[o.value for o in Outcome]}. "
                             f"Currently is {recipe.expected_outcome!r}.") from None
    grid = build_grid(recipe.n, num_points)
    phi = phi_family(grid, recipe.phi_kind, **recipe.phi_parameters)
    engine.setdefault("normalization", recipe.normalization)
    params = FlowParams(recipe.n, recipe.k, recipe.p, phi, **engine)
    if recipe.initial_kind != "counterexample":
        initial = initial_family(grid, recipe.initial_kind, **recipe.initial_parameters)
        validate_initial(initial, params)
    elif recipe.initial_parameters:
        raise ParameterError("The counterexample initial body takes no parameters.")
    if recipe.k < recipe.n and recipe.expected_outcome == Outcome.CONVERGE.value:
        min_eig, ok = convexity_condition(phi, recipe.p + recipe.k - 1)
        if not ok:
            raise ParameterError(f"A converging scenario with k < n needs phi^(1/(p+k-1)) convex "
                                 f"(min eigenvalue {min_eig:.6g}).")
    return params


def make_scenario(recipe: Union[str, ScenarioRecipe], num_points: int = 256, name: str = None,
                  **engine) -> ScenarioSpec:
    """
    Builds the scenario on a grid of 'num_points' cells.

    Parameters
    ----------
    recipe : str or ScenarioRecipe
        Registered name or inline recipe.
    num_points : int
        Number of latitude cells. Value by default is 256.
    name : str
        Name of an inline recipe. Value by default is 'custom'.

    Other Parameters
    ----------------
    engine :
        Keyword arguments of FlowParams (cfl, t_max, residual_tol, renorm_projection, breakdown_zeta_tol,
        sample_stride, normalization) overriding those of the recipe.

    Returns
    -------
    ScenarioSpec
    """
    if isinstance(recipe, str):
        name, recipe = recipe, scenario_recipe(recipe)
    name = name if name is not None else "custom"
    if "normalization" in engine:
        recipe = replace(recipe, normalization=engine.pop("normalization"))
    validate_orders(recipe.n, recipe.k)
    _check_counterexample_orders(recipe)
    grid = build_grid(recipe.n, num_points)
    phi = phi_family(grid, recipe.phi_kind, **recipe.phi_parameters)
    initial = initial_family(grid, recipe.initial_kind, **recipe.initial_parameters)
    params = FlowParams(recipe.n, recipe.k, recipe.p, phi, normalization=recipe.normalization, **engine)
    scenario = ScenarioSpec(name, params, initial, Outcome(recipe.expected_outcome), recipe.notes)
    logger.debug("Built scenario '%s' on %r", name, grid)
    return scenario

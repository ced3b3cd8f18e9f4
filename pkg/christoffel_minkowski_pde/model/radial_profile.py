# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/02 18:20
# @Project  : expanding_curvature_flow
# @File     : radial_profile.py
# @Software : PyCharm
from enum import Enum
from typing import Tuple

import numpy as np

from christoffel_minkowski_pde.model.grid import LatitudeGrid
from christoffel_minkowski_pde.utils.exceptions import ParityError
from christoffel_minkowski_pde.utils.validators import ArrayValidator, Choice, validate_same_grid

# Relative tolerance accepted before a tagged profile is symmetrized
_PARITY_RTOL = 1e-9


class Parity(Enum):
    """
    Symmetry of a profile under theta -> -theta.
    """
    EVEN = "even"
    ODD = "odd"
    NONE = "none"

    @property
    def flipped(self) -> "Parity":
        return {Parity.EVEN: Parity.ODD, Parity.ODD: Parity.EVEN}.get(self, Parity.NONE)


_DEFAULT_REFLECTION = {Parity.EVEN: 1, Parity.ODD: -1, Parity.NONE: None}


class RadialProfile:
    """
    Values of a rotationally symmetric field on a latitude grid, so that accessing a component is equivalent to
    evaluating the field at the corresponding latitude.

    Besides its parity under theta -> -theta, a profile carries the sign used to reflect it through the poles
    (the ghost cells of the difference stencils): scalar fields of the sphere reflect with +1, their first
    theta-derivatives with -1. The sign is inferred from the parity unless given.
    """
    parity = Choice(Parity)
    values = ArrayValidator()

    def __init__(self, grid: LatitudeGrid, values, parity="even", reflection: int = None):
        """
        Constructor.

        Parameters
        ----------
        grid : LatitudeGrid
            Grid where the profile lives.
        values : array[num_points,]
            Values at the nodes of the grid.
        parity : Parity or str
            'even', 'odd' or 'none'. Tagged profiles are checked and symmetrized.
        reflection : int
            +1 or -1, sign of the pole reflection. Value by default is inferred from the parity.
        """
        if not isinstance(grid, LatitudeGrid):
            raise TypeError(f"'grid' must be a 'LatitudeGrid'. Currently is '{type(grid).__name__}'.")
        self.grid = grid
        self.parity = parity
        values = np.asarray(values, dtype=float)
        if values.ndim == 1 and values.shape == (grid.num_points,) and self.parity is not Parity.NONE:
            values = self._symmetrize(values)
        self.values = values
        self.reflection = reflection if reflection is not None else _DEFAULT_REFLECTION[self.parity]
        if self.reflection not in (1, -1, None):
            raise ValueError(f"'reflection' must be 1, -1 or None. Currently is {self.reflection!r}.")

    def _symmetrize(self, values: np.ndarray) -> np.ndarray:
        sign = 1 if self.parity is Parity.EVEN else -1
        mirrored = sign * values[::-1]
        scale = max(1.0, float(np.max(np.abs(values))))
        defect = np.max(np.abs(values - mirrored)) if np.all(np.isfinite(values)) else 0.0
        if defect > _PARITY_RTOL * scale:
            raise ParityError(f"Values are not {self.parity.value} (defect {defect:.3e}).")
        return 0.5 * (values + mirrored)

    def __repr__(self, space=2):
        tab = " " * space
        values_str = tab + str(self.values).replace('\n', '\n' + tab)
        return (self.__class__.__name__
                + f"(\n"
                + tab + f"grid={self.grid!r}, parity={self.parity.value}, reflection={self.reflection},\n"
                + tab + f"values=\n{values_str}\n"
                + f")")

    def __getitem__(self, item):
        return self.values.__getitem__(item)

    def __len__(self):
        return self.grid.num_points

    def __array__(self, dtype=None, copy=None):
        return np.array(self.values, dtype=dtype)

    def with_values(self, values, parity=None, reflection=None) -> "RadialProfile":
        """
        New profile on the same grid. Parity and reflection are inherited unless given.
        """
        parity = parity if parity is not None else self.parity
        if reflection is None and parity == self.parity:
            reflection = self.reflection
        return RadialProfile(self.grid, values, parity, reflection)

    @property
    def min(self) -> float:
        return float(np.min(self.values))

    @property
    def max(self) -> float:
        return float(np.max(self.values))


def _reflection_of(f: RadialProfile) -> int:
    if f.reflection is None:
        raise ParityError("A profile with parity 'none' and no pole reflection cannot be differentiated.")
    return f.reflection


def ghosted(values: np.ndarray, reflection: int) -> np.ndarray:
    """
    Nodal values with two ghost cells at each end, reflected through the poles with the given sign.
    """
    return np.concatenate((reflection * values[1::-1], values, reflection * values[:-3:-1]))


def _first_stencil(g: np.ndarray, dtheta: float) -> np.ndarray:
    return (g[:-4] - 8 * g[1:-3] + 8 * g[3:-1] - g[4:]) / (12 * dtheta)


def _second_stencil(g: np.ndarray, dtheta: float) -> np.ndarray:
    return (-g[:-4] + 16 * g[1:-3] - 30 * g[2:-2] + 16 * g[3:-1] - g[4:]) / (12 * dtheta ** 2)


def theta_derivatives(values: np.ndarray, reflection: int, dtheta: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    First and second theta-derivatives of bare nodal values, sharing one ghosted copy.
    """
    g = ghosted(values, reflection)
    return _first_stencil(g, dtheta), _second_stencil(g, dtheta)


def pole_second_derivative(values: np.ndarray, reflection: int, dtheta: float, cells: int) -> np.ndarray:
    """
    Second theta-derivative at the first and the last 'cells' nodes only, in the order of 'pole_index'.
    """
    width = cells + 2
    lower = np.concatenate((reflection * values[1::-1], values[:width]))
    upper = np.concatenate((values[-width:], reflection * values[:-3:-1]))
    return np.concatenate((_second_stencil(lower, dtheta), _second_stencil(upper, dtheta)))


def d_theta(f: RadialProfile) -> RadialProfile:
    """
    First theta-derivative, 4th order central differences with reflected ghost cells at the poles.

    Parameters
    ----------
    f : RadialProfile
        Profile with a known pole reflection.

    Returns
    -------
    RadialProfile
        Derivative, with flipped parity and reflection sign.
    """
    reflection = _reflection_of(f)
    df = _first_stencil(ghosted(f.values, reflection), f.grid.dtheta)
    return RadialProfile(f.grid, df, f.parity.flipped, -reflection)


def d2_theta(f: RadialProfile) -> RadialProfile:
    """
    Second theta-derivative, 4th order central differences with reflected ghost cells at the poles.
    """
    reflection = _reflection_of(f)
    d2f = _second_stencil(ghosted(f.values, reflection), f.grid.dtheta)
    return RadialProfile(f.grid, d2f, f.parity, reflection)


def integrate_sphere(f: RadialProfile, grid: LatitudeGrid = None) -> float:
    """
    Integral over S^n of a rotationally symmetric field: omega_(n-1) * sum(weights * f).

    Parameters
    ----------
    f : RadialProfile
        Integrand.
    grid : LatitudeGrid
        Expected grid, checked against the grid of the profile when given.
    """
    if grid is not None:
        validate_same_grid(f, grid)
    return float(f.grid.omega_nm1 * np.dot(f.grid.weights, f.values))


def value_at_equator(f: RadialProfile) -> float:
    """
    Value at theta = 0. Cell-centered grids with an even number of cells have no node there, so the four
    central nodes are interpolated (4th order).
    """
    values, num_points = f.values, f.grid.num_points
    if num_points % 2 == 1:
        return float(values[num_points // 2])
    j = num_points // 2
    return float((-values[j - 2] + 9 * values[j - 1] + 9 * values[j] - values[j + 1]) / 16)

# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/02 17:48
# @Project  : expanding_curvature_flow
# @File     : grid.py
# @Software : PyCharm
import logging

import numpy as np
from scipy.special import gamma

from christoffel_minkowski_pde.utils.exceptions import FlowError
from christoffel_minkowski_pde.utils.validators import Integer

logger = logging.getLogger(__name__)

# Cells treated with the umbilic series at each pole
POLE_CELLS = 1


def sphere_area(m: int) -> float:
    """
    Surface area of the unit sphere S^m in R^(m+1).
    """
    return 2 * np.pi ** ((m + 1) / 2) / gamma((m + 1) / 2)


def _fejer_weights(num_points: int) -> np.ndarray:
    # Fejer's first rule on the Chebyshev points of the first kind x_j = -cos(t_j)
    t = (np.arange(num_points) + 0.5) * np.pi / num_points
    m = np.arange(1, num_points // 2 + 1).reshape(-1, 1)
    series = np.sum(np.cos(2 * m * t.reshape(1, -1)) / (4 * m ** 2 - 1), axis=0)
    return 2 / num_points * (1 - 2 * series)


class LatitudeGrid:
    """
    Cell-centered discretization of the latitude theta in (-pi/2, pi/2) of S^n, together with the quadrature
    weights of the measure cos^(n-1)(theta) d theta. Nodes never hit the poles, so tan(theta) is always finite.
    """
    n = Integer(lower_bound=2)
    num_points = Integer(lower_bound=16)

    def __init__(self, n: int, num_points: int):
        """
        Constructor.

        Parameters
        ----------
        n : int
            Dimension of the sphere S^n (the hypersurface lives in R^(n+1)). Must be >= 2.
        num_points : int
            Number of latitude cells. Must be >= 16.
        """
        self.n = n
        self.num_points = num_points
        self.dtheta = np.pi / num_points
        theta = -np.pi / 2 + (np.arange(num_points) + 0.5) * self.dtheta
        # Exact symmetry about the equator
        self.theta = 0.5 * (theta - theta[::-1])
        self.theta.setflags(write=False)
        self.pole_distance = np.pi / 2 - np.abs(self.theta)
        self.cos, self.sin, self.tan = np.cos(self.theta), np.sin(self.theta), np.tan(self.theta)
        for array in (self.pole_distance, self.cos, self.sin, self.tan):
            array.setflags(write=False)
        self.omega_nm1 = sphere_area(n - 1)
        self.omega_n = sphere_area(n)
        self.weights = self._build_weights()
        self.weights.setflags(write=False)
        # Indices of the pole-adjacent cells
        self.pole_cells = POLE_CELLS
        self.pole_index = np.r_[np.arange(POLE_CELLS), np.arange(num_points - POLE_CELLS, num_points)]
        # Cells evaluated with the raw formulas (not pole-regularized)
        self.interior_mask = np.ones(num_points, dtype=bool)
        self.interior_mask[self.pole_index] = False
        self.interior_mask.setflags(write=False)
        self.interior_tan_max = float(np.max(np.abs(self.tan[self.interior_mask])))

    def __repr__(self):
        return self.__class__.__name__ + f"(n={self.n}, num_points={self.num_points})"

    def __eq__(self, other):
        if not isinstance(other, LatitudeGrid):
            return NotImplemented
        return self.n == other.n and self.num_points == other.num_points

    def __hash__(self):
        return hash((self.n, self.num_points))

    def _build_weights(self) -> np.ndarray:
        cos = self.cos
        if self.n % 2 == 1:
            # cos^(n-1) is smooth and pi-periodic: the midpoint rule is spectrally accurate
            weights = self.dtheta * cos ** (self.n - 1)
        else:
            # x = sin(theta) turns the measure into (1 - x^2)^((n-2)/2) dx, a polynomial weight
            weights = _fejer_weights(self.num_points) * cos ** (self.n - 2)
        return 0.5 * (weights + weights[::-1])

    def mirror(self, j: int) -> int:
        """
        Index of the node -theta[j].
        """
        return self.num_points - 1 - j


def build_grid(n: int, num_points: int) -> LatitudeGrid:
    """
    Builds a latitude grid and checks that its quadrature integrates constants exactly.

    Parameters
    ----------
    n : int
        Dimension of the sphere S^n.
    num_points : int
        Number of latitude cells.

    Returns
    -------
    LatitudeGrid
    """
    grid = LatitudeGrid(n, num_points)
    total = grid.omega_nm1 * np.sum(grid.weights)
    if not np.isclose(total, grid.omega_n, rtol=1e-10, atol=0):
        raise FlowError(f"Quadrature of {grid!r} gives total measure {total!r}, expected {grid.omega_n!r}.")
    logger.debug("Built %r, dtheta=%.6g, total measure %.15g", grid, grid.dtheta, total)
    return grid

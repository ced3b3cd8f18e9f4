# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/03 10:12
# @Project  : expanding_curvature_flow
# @File     : curvature.py
# @Software : PyCharm
from dataclasses import dataclass
from typing import Tuple, Union, TYPE_CHECKING

import numpy as np

from christoffel_minkowski_pde.model.radial_profile import RadialProfile, d_theta, d2_theta, \
    pole_second_derivative, theta_derivatives
from christoffel_minkowski_pde.utils.exceptions import ParameterError, ParityError

if TYPE_CHECKING:
    from christoffel_minkowski_pde.model.flow import FlowParams
    from christoffel_minkowski_pde.model.grid import LatitudeGrid

ArrayLike = Union[float, np.ndarray]


def validate_orders(n: int, k: int):
    """
    Validates 1 <= k <= n.
    """
    if not 1 <= k <= n:
        raise ParameterError(f"k must satisfy 1 ≤ k ≤ n. Currently k={k}, n={n}.")


def sigma_k_eval(zeta1: ArrayLike, zeta2: ArrayLike, n: int, k: int) -> ArrayLike:
    """
    Normalized k-th elementary symmetric polynomial of the radii {zeta1, zeta2 (n-1 times)}:
    (k/n) zeta1 zeta2^(k-1) + ((n-k)/n) zeta2^k, so that sigma_k(1, ..., 1) = 1.
    """
    validate_orders(n, k)
    zeta1, zeta2 = np.asarray(zeta1, dtype=float), np.asarray(zeta2, dtype=float)
    value = k / n * zeta1 * zeta2 ** (k - 1) + (n - k) / n * zeta2 ** k
    return value if value.ndim else float(value)


def sigma_k_partials(zeta1: ArrayLike, zeta2: ArrayLike, n: int, k: int) -> Tuple[ArrayLike, ArrayLike]:
    """
    Partial derivatives of sigma_k with respect to the meridional radius and to the azimuthal radius, the latter
    summed over its n-1 repeated directions.

    Returns
    -------
    (d sigma_k / d zeta1, d sigma_k / d zeta2 total)
    """
    validate_orders(n, k)
    zeta1, zeta2 = np.asarray(zeta1, dtype=float), np.asarray(zeta2, dtype=float)
    d_zeta1 = k / n * zeta2 ** (k - 1)
    d_zeta2 = (n - k) * k / n * zeta2 ** (k - 1)
    if k >= 2:
        d_zeta2 = d_zeta2 + k * (k - 1) / n * zeta1 * zeta2 ** (k - 2)
    d_zeta1 = d_zeta1 * np.ones_like(zeta1 + zeta2)
    if d_zeta1.ndim == 0:
        return float(d_zeta1), float(d_zeta2)
    return d_zeta1, d_zeta2


def azimuthal_values(values: np.ndarray, df: np.ndarray, d2f: np.ndarray, grid: "LatitudeGrid",
                     reflection: int) -> np.ndarray:
    """
    -tan(theta) f_theta from bare nodal values and their derivatives. At the cells next to the poles the 0 * inf
    product is replaced by its series f_thth - (s^2 / 3) (f_thth + f)_thth, s the distance to the pole.
    """
    result = -grid.tan * df
    pole = grid.pole_index
    correction = pole_second_derivative(d2f + values, reflection, grid.dtheta, grid.pole_cells)
    result[pole] = d2f[pole] - grid.pole_distance[pole] ** 2 / 3 * correction
    return result


def azimuthal_term(f: RadialProfile, df: RadialProfile = None, d2f: RadialProfile = None) -> np.ndarray:
    """
    Values of -tan(theta) f_theta, the azimuthal part of the spherical hessian, pole-regularized.
    """
    df = df if df is not None else d_theta(f)
    d2f = d2f if d2f is not None else d2_theta(f)
    return azimuthal_values(f.values, df.values, d2f.values, f.grid, f.reflection)


def radii_values(values: np.ndarray, grid: "LatitudeGrid") -> Tuple[np.ndarray, np.ndarray]:
    """
    Bare (zeta1, zeta2) of a support function given by its nodal values (pole reflection +1).
    """
    df, d2f = theta_derivatives(values, 1, grid.dtheta)
    return d2f + values, values + azimuthal_values(values, df, d2f, grid, 1)


@dataclass(frozen=True)
class PrincipalRadii:
    """
    Principal radii of curvature of a rotationally symmetric hypersurface: the meridional zeta1 and the azimuthal
    zeta2 (multiplicity n-1), with the normalized sigma_k they produce.
    """
    zeta1: RadialProfile
    zeta2: RadialProfile
    sigma_k: RadialProfile
    min_zeta1: float
    min_zeta2: float


def principal_radii(h: RadialProfile, n: int, k: int) -> PrincipalRadii:
    """
    Eigenvalues of r_ij = hess h + g h for a support function of latitude alone.

    Parameters
    ----------
    h : RadialProfile
        Support function (pole reflection +1).
    n : int
        Dimension of the sphere, must match the grid.
    k : int
        Order of the curvature function.

    Returns
    -------
    PrincipalRadii
        Negative radii are reported as they are.
    """
    validate_orders(n, k)
    if h.grid.n != n:
        raise ParameterError(f"'n'={n} does not match the grid dimension {h.grid.n}.")
    if h.reflection != 1:
        raise ParityError("A support function reflects through the poles with sign +1.")
    zeta1_values, zeta2_values = radii_values(h.values, h.grid)
    zeta1, zeta2 = h.with_values(zeta1_values), h.with_values(zeta2_values)
    sigma_k = h.with_values(sigma_k_eval(zeta1.values, zeta2.values, n, k))
    return PrincipalRadii(zeta1, zeta2, sigma_k, zeta1.min, zeta2.min)


def linearized_L(F: RadialProfile, h: RadialProfile, params: "FlowParams", radii: PrincipalRadii = None) -> RadialProfile:
    """
    Linearized operator L F = Theta sigma_k^{ab} hess_ab F with Theta = phi h^(2-p), written in the eigenbasis of
    the rotationally symmetric hessian.

    Parameters
    ----------
    F : RadialProfile
        Profile where the operator acts.
    h : RadialProfile
        Support function that freezes the coefficients.
    params : FlowParams
        Flow parameters (n, k, p, phi).
    radii : PrincipalRadii
        Principal radii of h, recomputed when not given.
    """
    radii = radii if radii is not None else principal_radii(h, params.n, params.k)
    theta_factor = params.phi.values * h.values ** (2 - params.p)
    d_zeta1, d_zeta2 = sigma_k_partials(radii.zeta1.values, radii.zeta2.values, params.n, params.k)
    dF, d2F = d_theta(F), d2_theta(F)
    values = theta_factor * (d_zeta1 * d2F.values + d_zeta2 * azimuthal_term(F, dF, d2F))
    return F.with_values(values)

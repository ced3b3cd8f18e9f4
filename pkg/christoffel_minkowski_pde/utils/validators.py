# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/02 17:05
# @Project  : expanding_curvature_flow
# @File     : validators.py
# @Software : PyCharm

from abc import ABC, abstractmethod
from numbers import Integral, Real

import numpy as np

from christoffel_minkowski_pde.utils.exceptions import ParameterError, GridMismatchError

_SET_A_COPY = True
_GET_A_COPY = False


def validate_same_grid(profile, grid):
    """
    Validates if a profile lives on the given grid.
    """
    if profile.grid is not grid and profile.grid != grid:
        raise GridMismatchError(f"Profile lives on {profile.grid!r}, expected {grid!r}.")


def _is_integer(value) -> bool:
    return isinstance(value, Integral) and not isinstance(value, bool)


def _is_real(value) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool)


class Validator(ABC):
    """
    Abstract Class for General Validators. A validated attribute can be set only once.
    """

    def __set_name__(self, owner, name):
        self.public_name = name
        self.protected_name = "_" + name

    def __get__(self, obj, obj_type=None):
        if obj is None:
            return self
        return getattr(obj, self.protected_name)

    def __set__(self, obj, value):
        # Ask if the variable is not set yet
        if self.protected_name not in obj.__dict__:
            value = self.validate(obj, value)
            obj.__dict__[self.protected_name] = value
        # If it was, raise an error
        else:
            raise AttributeError(f"Attribute {self.public_name} was already set.")

    @abstractmethod
    def validate(self, obj, value):
        """
        To use the template pattern.

        Parameters
        ----------
        obj : Object
            An instance of the current object
        value : object
            Value to validate.

        Returns
        -------
        object
            The value to store (possibly converted).
        """
        pass


class Integer(Validator):
    """
    Validator for integers, like 10
    """

    def __init__(self, lower_bound: int = 0, upper_bound: int = None):
        self.lower_bound = lower_bound
        self.upper_bound = upper_bound

    def validate(self, obj, value):
        if not _is_integer(value):
            raise TypeError(f"'{self.public_name}' must be an 'int'."
                            + f" Currently is '{type(value).__name__}'.")
        if value < self.lower_bound:
            raise ParameterError(f"'{self.public_name}' must be greater or equals to {self.lower_bound}."
                                 + f" Currently is {value}.")
        if self.upper_bound is not None and value > self.upper_bound:
            raise ParameterError(f"'{self.public_name}' must be lower or equals to {self.upper_bound}."
                                 + f" Currently is {value}.")
        return int(value)


class Float(Validator):
    """
    Validator for floats, like 3.1415. Bounds are pairs (value, inclusive).
    """

    def __init__(self, lower_bound=(None, None), upper_bound=(None, None)):
        self.lower_bound = -float("inf") if lower_bound[0] is None else lower_bound[0]
        self.lower_bound_eq = True if lower_bound[1] is None else lower_bound[1]
        self.upper_bound = float("inf") if upper_bound[0] is None else upper_bound[0]
        self.upper_bound_eq = True if upper_bound[1] is None else upper_bound[1]
        str_low_bound = "[" if self.lower_bound_eq else "("
        str_upp_bound = "]" if self.upper_bound_eq else ")"
        self.str_bounds = f"{str_low_bound}{self.lower_bound}, {self.upper_bound}{str_upp_bound}"

    def validate(self, obj, value):
        if not _is_real(value):
            raise TypeError(f"'{self.public_name}' must be a 'float'."
                            + f" Currently is '{type(value).__name__}'.")
        value = float(value)
        if np.isnan(value):
            raise ParameterError(f"'{self.public_name}' must not be NaN.")
        satisfied_lower_bound = value > self.lower_bound or (self.lower_bound_eq and value == self.lower_bound)
        satisfied_upper_bound = value < self.upper_bound or (self.upper_bound_eq and value == self.upper_bound)
        if not (satisfied_lower_bound and satisfied_upper_bound):
            raise ParameterError(f"'{self.public_name}' must be in {self.str_bounds}. Currently is {value}.")
        return value


class Boolean(Validator):
    """
    Validator for flags.
    """

    def validate(self, obj, value):
        if not isinstance(value, (bool, np.bool_)):
            raise TypeError(f"'{self.public_name}' must be a 'bool'."
                            + f" Currently is '{type(value).__name__}'.")
        return bool(value)


class Choice(Validator):
    """
    Validator for a value taken from a closed set of options (strings or enum members).
    """

    def __init__(self, options):
        self.options = tuple(options)

    def validate(self, obj, value):
        for option in self.options:
            if value == option or getattr(option, "value", None) == value:
                return option
        raise ParameterError(f"'{self.public_name}' must be one of "
                             + ", ".join(repr(getattr(o, "value", o)) for o in self.options)
                             + f". Currently is {value!r}.")


class ArrayValidator(Validator):
    """
    Validator for the values of a profile: a finite-length real array matching the grid of the owner.
    The stored array is a read-only copy.
    """
    SET_A_COPY = _SET_A_COPY
    GET_A_COPY = _GET_A_COPY

    def __get__(self, obj, obj_type=None):
        if obj is None:
            return self
        if self.GET_A_COPY:
            return np.copy(getattr(obj, self.protected_name))
        return getattr(obj, self.protected_name)

    def validate(self, obj, value):
        if not isinstance(value, (np.ndarray, list, tuple)):
            raise TypeError(f"'{self.public_name}' must be an 'array'."
                            + f" Currently is '{type(value).__name__}'.")
        value = np.asarray(value, dtype=float)
        # Case shape does not fit
        if value.ndim != 1:
            raise ValueError(f"The dimensions of '{self.public_name}' must be 1."
                             + f" Currently is {value.ndim}.")
        expected = (obj.grid.num_points,)
        if value.shape != expected:
            raise GridMismatchError(f"The dimensions of '{self.public_name}' must be equals to {expected}."
                                    + f" Currently is {value.shape}.")
        if self.SET_A_COPY:
            value = np.copy(value)
        value.setflags(write=False)
        return value


class ProfileValidator(Validator):
    """
    Validator for attributes holding a RadialProfile, optionally strictly positive.
    """

    def __init__(self, positive: bool = False):
        self.positive = positive

    def validate(self, obj, value):
        # Imported here, radial_profile depends on this module
        from christoffel_minkowski_pde.model.radial_profile import RadialProfile
        if not isinstance(value, RadialProfile):
            raise TypeError(f"'{self.public_name}' must be a 'RadialProfile'."
                            + f" Currently is '{type(value).__name__}'.")
        if self.positive and not np.all(value.values > 0):
            raise ParameterError(f"'{self.public_name}' must be strictly positive."
                                 + f" Currently its minimum is {value.values.min():.6g}.")
        return value

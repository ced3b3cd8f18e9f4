# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/02 16:41
# @Project  : expanding_curvature_flow
# @File     : exceptions.py
# @Software : PyCharm


class FlowError(Exception):
    """
    Base class of every error raised by the library.
    """


class ParameterError(FlowError, ValueError):
    """
    A parameter is outside of its admissible range.
    """


class GridMismatchError(FlowError, ValueError):
    """
    Two profiles (or a profile and a grid) do not live on the same latitude grid.
    """


class ParityError(FlowError, ValueError):
    """
    A profile without a pole reflection rule was asked for a derivative.
    """


class BreakdownError(FlowError, RuntimeError):
    """
    The evolving support function stopped describing a smooth convex body.
    """

    def __init__(self, reason: str, time: float, message: str = None):
        self.reason = reason
        self.time = time
        super().__init__(message if message is not None else f"Breakdown '{reason}' at t={time:.6g}.")


class ConfigSyntaxError(FlowError, ValueError):
    """
    The configuration text could not be parsed.
    """

    def __init__(self, message: str, lineno: int = None):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


class ConfigSemanticError(FlowError, ValueError):
    """
    The configuration parsed fine but violates a precondition.
    """

# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/07 18:40
# @Project  : expanding_curvature_flow
# @File     : main.py
# @Software : PyCharm
import logging

import numpy as np

from christoffel_minkowski_pde.model.flow import rescale_snapshot, run_flow
from christoffel_minkowski_pde.model.functionals import counterexample_rate, soliton_residual
from christoffel_minkowski_pde.model.scenarios import make_scenario

logging.basicConfig(level=logging.INFO)

N = 128
T = 20.

CONFIG_ENGINE = {
    "cfl": 0.2,
    "t_max": T,
    "residual_tol": 1e-6,
    "sample_stride": 100,
}

# Prolate spheroid flowing to the round sphere
spheroid = make_scenario("spheroid_sphere", N, **CONFIG_ENGINE)
record = run_flow(spheroid.initial, spheroid.params, verbose=True, reports_every=500)
h = record.final_state.h
print(record.terminal_status)
print("max|h - 1| =", np.max(np.abs(h.values - 1)))
print("soliton residual =", soliton_residual(h, spheroid.params))

# Loss of convexity at the equator
counterexample = make_scenario("counterexample", N, **CONFIG_ENGINE)
print("predicted d/dt zeta1(0) =", counterexample_rate(counterexample.initial, counterexample.params.phi,
                                                       counterexample.params))
record = run_flow(counterexample.initial, counterexample.params, verbose=True, reports_every=500)
print(record.terminal_status)
print(rescale_snapshot(record.final_state, counterexample.params))

# !/usr/bin/python3
# -*-coding utf-8 -*-
# @Time     : 2026/09/06 12:31
# @Project  : expanding_curvature_flow
# @File     : output.py
# @Software : PyCharm
import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from christoffel_minkowski_pde.model.flow import FlowParams, TrajectoryRecord
from christoffel_minkowski_pde.model.functionals import MonitorRecord, soliton_constant

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).with_name("monitors_schema.json")
FLOAT_FORMAT = "%.17g"

MONITORS_FILE = "monitors.csv"
FINAL_STATE_FILE = "final_state.json"
ECHO_FILE = "echo.cfg"
CHECK_FILE = "check.json"

PathLike = Union[str, Path]


def load_schema() -> dict:
    """
    Pinned description of monitors.csv.
    """
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))


def monitors_frame(record: TrajectoryRecord) -> pd.DataFrame:
    """
    One row per sampled MonitorRecord, columns in field order.
    """
    columns: List[str] = list(MonitorRecord.field_names())
    return pd.DataFrame([monitor.as_tuple() for monitor in record.monitors], columns=columns)


def write_monitors(record: TrajectoryRecord, path: PathLike) -> Path:
    """
    Writes monitors.csv with LF line endings and 17 significant digits.
    """
    path = Path(path)
    monitors_frame(record).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("Wrote %d monitor rows to %s", len(record.samples), path)
    return path


def _finite_or_none(value: float):
    return float(value) if np.isfinite(value) else None


def final_state_payload(record: TrajectoryRecord, params: FlowParams, scenario: str) -> dict:
    state = record.final_state
    status = record.terminal_status
    with np.errstate(all="ignore"):
        constant = soliton_constant(state.h, params, state.radii)
    grid = params.grid
    return {
        "scenario": scenario,
        "grid": {"n": grid.n, "num_points": grid.num_points, "theta": grid.theta.tolist()},
        "time": state.time,
        "steps": record.steps,
        "h": state.h.values.tolist(),
        "soliton_constant": _finite_or_none(constant),
        "terminal_status": {"kind": status.kind, "reason": status.reason, "time": status.time,
                            "label": str(status)},
        "final_monitors": {key: _finite_or_none(value) for key, value in asdict(record.monitors[-1]).items()}
        if record.samples else None,
    }


def write_json(payload: dict, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def write_final_state(record: TrajectoryRecord, params: FlowParams, scenario: str, path: PathLike) -> Path:
    """
    Writes final_state.json: grid, h values, soliton constant and terminal status. Non-finite numbers are null.
    """
    return write_json(final_state_payload(record, params, scenario), path)

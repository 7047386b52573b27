"""
Output files: trajectory CSV and JSON reports
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from .exceptions import ConfigurationError
from .logger import get_logger


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if value is None or isinstance(value, str):
        return value
    return str(value)


def _prepare(path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigurationError(f"Cannot create output directory: {e}",
                                 context={"path": str(path.parent)})
    return path


def write_json(data: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = _prepare(path)
    try:
        with open(path, 'w', encoding='utf-8') as f:
            # repr of a Python float round-trips, so no digits are lost
            json.dump(to_jsonable(data), f, indent=2, ensure_ascii=False, allow_nan=False)
    except OSError as e:
        raise ConfigurationError(f"Cannot write report: {e}", context={"path": str(path)})
    get_logger().info("Report written", file_path=str(path))
    return path


def write_trajectory_csv(trajectory, path: Union[str, Path]) -> Path:
    """Header t,x1..xn; one row per grid node with 17 significant digits"""
    path = _prepare(path)
    n = trajectory.dimension
    header = ",".join(["t"] + [f"x{i + 1}" for i in range(n)])
    table = np.column_stack([trajectory.grid.nodes, trajectory.samples])
    try:
        np.savetxt(path, table, fmt="%.17g", delimiter=",", header=header, comments="")
    except OSError as e:
        raise ConfigurationError(f"Cannot write trajectory: {e}", context={"path": str(path)})
    get_logger().info("Trajectory written", file_path=str(path), rows=table.shape[0])
    return path

"""Telemetry CSV, JSON summaries and boresight plot data (unit vectors + Mercator)."""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .attitude import boresight_inertial
from .sim import Telemetry

FLOAT_FMT = "%.17g"


def write_csv(telemetry, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(telemetry.columns) + "\n")
        np.savetxt(fh, telemetry.data, fmt=FLOAT_FMT, delimiter=",")
    return path


def read_csv(path):
    """Parse a telemetry CSV written by :func:`write_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    return Telemetry(columns, data)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _clean(value):
    # JSON has no NaN/inf; use null instead
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def write_json(obj, path):
    path = Path(path)
    data = obj.to_dict() if hasattr(obj, "to_dict") else obj
    path.write_text(json.dumps(_clean(data), indent=2, default=_json_default) + "\n")
    return path


def mercator(vectors):
    """Mercator coordinates ``(longitude, ln tan(pi/4 + lat/2))`` of unit vectors."""
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    lon = np.arctan2(v[:, 1], v[:, 0])
    lat = np.arcsin(np.clip(v[:, 2], -1.0, 1.0))
    y = np.log(np.tan(math.pi / 4.0 + lat / 2.0))
    return np.column_stack([lon, y])


def boresight_track(quaternions, b_b):
    """Inertial boresight unit vectors for a sequence of attitude quaternions."""
    return np.array([boresight_inertial(q, b_b) for q in quaternions])


def write_plot_data(path, t, boresight, zones=(), target=None):
    """Boresight trajectory as unit vectors and Mercator coordinates, plus zone and target markers."""
    merc = mercator(boresight)
    doc = {
        "t": list(map(float, t)),
        "boresight": np.asarray(boresight, dtype=float).tolist(),
        "mercator": merc.tolist(),
        "zones": [
            {"axis": list(z.axis), "theta_f": z.theta_f, "mercator": mercator(z.axis)[0].tolist()}
            for z in zones
        ],
    }
    if target is not None:
        doc["target"] = list(target)
        doc["target_mercator"] = mercator(target)[0].tolist()
    return write_json(doc, path)

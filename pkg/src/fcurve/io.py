"""Curve snapshot JSON, CSV writers and run manifests.

Curve file::

    {"surface": {"kind": "torus", "params": {"side_L": 3.0, "side_H": 1.0}},
     "points": [[x, y], ...],
     "orientation": "left"}

``orientation`` is ``"left"`` when the region lies to the left of the
direction of travel and ``"right"`` otherwise. A region sentinel replaces the
points by ``"region": "empty"`` or ``"region": "full"``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .curve import DiscreteCurve
from .functional import Region
from .surface import surface_from_dict, surface_to_dict


class ParseError(ValueError):
    name = "parse-error"


def fmt(x) -> str:
    """Fixed-format number with 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def curve_to_dict(curve: DiscreteCurve) -> dict:
    return {
        "surface": surface_to_dict(curve.surface),
        "points": [[float(v) for v in p] for p in curve.points],
        "orientation": curve.orientation,
    }


def region_to_dict(region: Region) -> dict:
    if region.sentinel is not None:
        return {"surface": surface_to_dict(region.surface), "region": region.sentinel}
    if len(region.boundaries) == 1:
        return curve_to_dict(region.boundary)
    return {
        "surface": surface_to_dict(region.surface),
        "components": [
            {"points": curve_to_dict(b)["points"], "orientation": b.orientation}
            for b in region.boundaries
        ],
    }


def _curve_from(surface, points, orientation) -> DiscreteCurve:
    if orientation not in ("left", "right"):
        raise ParseError(f"orientation must be 'left' or 'right', got {orientation!r}")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ParseError("points must be a list of coordinate lists")
    return DiscreteCurve(surface, pts, 1 if orientation == "left" else -1)


def region_from_dict(d: dict) -> Region:
    try:
        surface = surface_from_dict(d["surface"])
        if "region" in d:
            if d["region"] == "empty":
                return Region.empty(surface)
            if d["region"] == "full":
                return Region.full(surface)
            raise ParseError(f"unknown region sentinel {d['region']!r}")
        if "components" in d:
            comps = tuple(
                _curve_from(surface, comp["points"], comp.get("orientation", "left"))
                for comp in d["components"]
            )
            return Region(surface, comps)
        return Region.bounded_by(_curve_from(surface, d["points"], d.get("orientation", "left")))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed curve file: {exc}") from exc


def read_region(path) -> Region:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not isinstance(d, dict):
        raise ParseError("curve file must hold a JSON object")
    return region_from_dict(d)


def read_curve(path) -> DiscreteCurve:
    region = read_region(path)
    if region.sentinel is not None or len(region.boundaries) != 1:
        raise ParseError("expected a single boundary curve")
    return region.boundary


def write_json(path, obj) -> None:
    text = json.dumps(obj, indent=1) + "\n"
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        Path(path).write_text(text)


def write_curve(path, curve: DiscreteCurve) -> None:
    write_json(path, curve_to_dict(curve))


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: list[str], rows) -> None:
    text = csv_text(header, rows)
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        Path(path).write_text(text)

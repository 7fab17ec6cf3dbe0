"""Schema-validated readers for the identification toolkit's run outputs.

Every reader checks the documented header row before touching the data and
names the first offending column on mismatch, so a malformed input fails
before any image is written.  No physics is recomputed here: all numbers
come straight from the files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

LOAD_HEADER = ["time_s", "f_normal_Pa", "f_inplane_Pa"]
HYSTERESIS_HEADER = ["time_s", "f_normal_Pa", "f_inplane_Pa", "u_normal_m", "u_inplane_m"]
PRINCIPAL_HEADER = ["time_s", "s1_Pa", "s2_Pa", "s3_Pa", "cylinder_radius_Pa", "outside_yield"]
DENSITY_HEADER = ["value", "prior_density", "post_density"]

PARAM_ORDER = ("kappa", "g", "b_r", "b_chi", "sigma_y")
PARAM_LABELS = {
    "kappa": ("bulk modulus κ", "Pa"),
    "g": ("shear modulus G", "Pa"),
    "b_r": ("isotropic hardening rate b_R", "-"),
    "b_chi": ("kinematic hardening rate b_χ", "-"),
    "sigma_y": ("yield stress σ_y", "Pa"),
}


class SchemaError(Exception):
    """Input file missing or not in the documented format."""


def _read_table(path, header):
    """Rows of a comma-separated file after validating its header row.

    Returns (data array, comment lines).  Comment lines start with '#'
    and may appear before the header or after the data.
    """
    if not os.path.isfile(path):
        raise SchemaError(f"missing input file {path!r}")
    comments = []
    rows = []
    seen_header = False
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line)
                continue
            cells = line.split(",")
            if not seen_header:
                for i, want in enumerate(header):
                    got = cells[i] if i < len(cells) else "<missing>"
                    if got != want:
                        raise SchemaError(
                            f"{path}: header column {i + 1} is {got!r}, expected {want!r}"
                        )
                if len(cells) != len(header):
                    raise SchemaError(
                        f"{path}: header has {len(cells)} columns, expected {len(header)}"
                    )
                seen_header = True
                continue
            try:
                rows.append([float(v) for v in cells])
            except ValueError as exc:
                raise SchemaError(f"{path}: non-numeric row {line!r}") from exc
    if not seen_header:
        raise SchemaError(f"{path}: header row not found")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.array(rows)
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: expected {len(header)} columns, got {data.shape[1]}")
    if not np.all(np.isfinite(data)):
        raise SchemaError(f"{path}: non-finite values")
    return data, comments


@dataclass(frozen=True)
class LoadPathData:
    label: str
    times: np.ndarray
    f_normal: np.ndarray
    f_inplane: np.ndarray


def read_load_path(path):
    data, comments = _read_table(path, LOAD_HEADER)
    label = ""
    for line in comments:
        if line.startswith("# label="):
            label = line.split("=", 1)[1]
    return LoadPathData(
        label=label, times=data[:, 0], f_normal=data[:, 1], f_inplane=data[:, 2]
    )


@dataclass(frozen=True)
class HysteresisData:
    times: np.ndarray
    f_normal: np.ndarray
    f_inplane: np.ndarray
    u_normal: np.ndarray
    u_inplane: np.ndarray


def read_hysteresis(path):
    data, _ = _read_table(path, HYSTERESIS_HEADER)
    return HysteresisData(
        times=data[:, 0],
        f_normal=data[:, 1],
        f_inplane=data[:, 2],
        u_normal=data[:, 3],
        u_inplane=data[:, 4],
    )


@dataclass(frozen=True)
class PrincipalData:
    times: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    radius: np.ndarray
    outside: np.ndarray
    fraction: float
    count: int
    transitions: int


def read_principal(path):
    data, comments = _read_table(path, PRINCIPAL_HEADER)
    s1, s2, s3 = data[:, 1], data[:, 2], data[:, 3]
    if np.any(s1 < s2) or np.any(s2 < s3):
        raise SchemaError(f"{path}: principal stresses not in descending order")
    outside = data[:, 5]
    if not np.all(np.isin(outside, (0.0, 1.0))):
        raise SchemaError(f"{path}: outside_yield must be 0 or 1")
    stats = {}
    for line in comments:
        if line.startswith("# outside_fraction="):
            for tok in line[1:].split():
                key, _, value = tok.partition("=")
                stats[key] = value
    if "outside_fraction" not in stats:
        raise SchemaError(f"{path}: outside_fraction footer not found")
    return PrincipalData(
        times=data[:, 0],
        s1=s1,
        s2=s2,
        s3=s3,
        radius=data[:, 4],
        outside=outside.astype(int),
        fraction=float(stats["outside_fraction"]),
        count=int(stats.get("outside_count", int(outside.sum()))),
        transitions=int(stats.get("transitions", 0)),
    )


@dataclass(frozen=True)
class DensityData:
    values: np.ndarray
    prior_density: np.ndarray
    post_density: np.ndarray


def read_density(path):
    data, _ = _read_table(path, DENSITY_HEADER)
    if np.any(data[:, 1] < 0.0) or np.any(data[:, 2] < 0.0):
        raise SchemaError(f"{path}: densities must be non-negative")
    return DensityData(values=data[:, 0], prior_density=data[:, 1], post_density=data[:, 2])


def read_result(path):
    """Identification summary: parameters, case label and density file map."""
    if not os.path.isfile(path):
        raise SchemaError(f"missing input file {path!r}")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc.msg}") from exc
    params = doc.get("parameters")
    if not isinstance(params, dict):
        raise SchemaError(f"{path}: missing 'parameters' object")
    for name in PARAM_ORDER:
        rec = params.get(name)
        if not isinstance(rec, dict):
            raise SchemaError(f"{path}: missing parameter {name!r}")
        for field in ("true", "prior_mean", "prior_std", "post_mean", "post_std"):
            if field not in rec:
                raise SchemaError(f"{path}: parameter {name!r} missing field {field!r}")
    case = doc.get("diagnostics", {}).get("case")
    if case not in ("case1", "case2"):
        raise SchemaError(f"{path}: diagnostics.case must be 'case1' or 'case2', got {case!r}")
    densities = doc.get("files", {}).get("densities")
    if not isinstance(densities, dict) or set(densities) != set(PARAM_ORDER):
        raise SchemaError(f"{path}: files.densities must map all five parameters")
    return doc

"""Readers for the torusflow CLI output schemas.

Every loader validates the columns/keys it needs and raises SchemaError
with a usable message otherwise; figures are only produced from files
that parse cleanly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Input file does not match the expected torusflow schema."""


def _read_csv(path: Path, required: set[str]) -> list[dict]:
    if not path.exists():
        raise SchemaError(f"missing input file: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = set(reader.fieldnames or [])
        missing = required - cols
        if missing:
            raise SchemaError(f"{path}: missing columns {sorted(missing)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def load_curves(path: Path) -> dict[int, np.ndarray]:
    """curves.csv -> {curve_index: wrapped samples (n, 2)}."""
    rows = _read_csv(path, {"curve_index", "x", "y"})
    out: dict[int, list] = {}
    for r in rows:
        out.setdefault(int(r["curve_index"]), []).append((float(r["x"]), float(r["y"])))
    return {k: np.asarray(v) for k, v in out.items()}


def load_orbits(path: Path) -> dict[int, np.ndarray]:
    """orbits_eps*.csv -> {cycle_index: wrapped samples (n, 2)}."""
    rows = _read_csv(path, {"cycle_index", "x", "y"})
    out: dict[int, list] = {}
    for r in rows:
        out.setdefault(int(r["cycle_index"]), []).append((float(r["x"]), float(r["y"])))
    return {k: np.asarray(v) for k, v in out.items()}


def load_census(path: Path) -> dict:
    if not path.exists():
        raise SchemaError(f"missing input file: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    for key in ("cycles", "critical_curves", "eps", "model"):
        if key not in doc:
            raise SchemaError(f"{path}: missing key {key!r}")
    return doc


def load_sweep(path: Path) -> list[dict]:
    rows = _read_csv(
        path, {"eps", "curve_index", "gap_abs", "hausdorff", "sdi"}
    )
    out = []
    for r in rows:
        out.append(
            {
                "eps": float(r["eps"]),
                "curve_index": int(r["curve_index"]),
                "gap_abs": float(r["gap_abs"]),
                "hausdorff": float(r["hausdorff"]),
            }
        )
    return out


def find_census_eps(indir: Path) -> list[float]:
    """All eps values with census/orbit files in a run directory."""
    eps = []
    for p in sorted(indir.glob("census_eps*.json")):
        tag = p.stem.removeprefix("census_eps")
        try:
            eps.append(float(tag))
        except ValueError:
            continue
    if not eps:
        raise SchemaError(f"no census_eps*.json files under {indir}")
    return sorted(eps)


def eps_tag(eps: float) -> str:
    return f"{eps:g}"

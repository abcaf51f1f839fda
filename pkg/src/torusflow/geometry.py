"""Flat geometry of the 2-torus [0, 2pi)^2.

Points live either on the torus itself (wrapped coordinates) or on the
universal cover R^2 (lift coordinates).  Winding numbers, the quotient
metric, and Hausdorff distances between sampled closed curves are all
computed here; everything downstream (critical curves, limit cycles)
reuses these primitives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

TAU = 2.0 * math.pi

#: Largest acceptable fractional residue when rounding lift displacements
#: to whole turns (integration drift is orders of magnitude smaller).
WINDING_RESIDUE_TOL = 0.1

#: Default maximum arclength gap between consecutive curve samples (radians).
CURVE_RESOLUTION = 0.01


class TorusPoint(NamedTuple):
    """A point on the torus, both angles in [0, 2pi)."""

    x: float
    y: float


class LiftPoint(NamedTuple):
    """A point on the universal cover R^2 (unwrapped angles)."""

    x: float
    y: float


@dataclass(frozen=True)
class WindingPair:
    """Winding numbers of a closed curve: k vertical wraps, l horizontal.

    Stored in canonical orientation, i.e. k >= 0 (and l >= 0 when k == 0),
    so that a curve and its reverse traversal compare equal.
    """

    k: int
    l: int

    @staticmethod
    def from_raw(k: int, l: int) -> "WindingPair":
        if k < 0 or (k == 0 and l < 0):
            k, l = -k, -l
        return WindingPair(k, l)

    @property
    def essential(self) -> bool:
        return (self.k, self.l) != (0, 0)

    def is_coprime(self) -> bool:
        if (self.k, self.l) == (0, 0):
            return False
        return math.gcd(abs(self.k), abs(self.l)) == 1

    def __str__(self) -> str:
        return f"({self.k},{self.l})"


def wrap(p) -> np.ndarray:
    """Reduce lift coordinates mod 2pi into [0, 2pi).

    Accepts a point (shape ``(2,)``) or an array of points (``(n, 2)``).
    """
    a = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("cannot wrap non-finite coordinates")
    return np.mod(a, TAU)


def wrap_point(p) -> TorusPoint:
    """Like :func:`wrap` but returns a :class:`TorusPoint`."""
    w = wrap(np.asarray(p, dtype=float).reshape(2))
    return TorusPoint(float(w[0]), float(w[1]))


def wrap_to_pi(delta) -> np.ndarray:
    """Reduce a coordinate difference into [-pi, pi) componentwise."""
    a = np.asarray(delta, dtype=float)
    return a - TAU * np.round(a / TAU)


def torus_dist(a, b) -> float:
    """Flat quotient metric: Euclidean length of the shortest representative
    difference, each component reduced to [-pi, pi]."""
    d = wrap_to_pi(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    return float(np.hypot(d[..., 0], d[..., 1]))


def pairwise_torus_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All torus distances between rows of ``a`` (n,2) and ``b`` (m,2)."""
    d = wrap_to_pi(a[:, None, :] - b[None, :, :])
    return np.hypot(d[..., 0], d[..., 1])


@dataclass
class ClosedCurve:
    """A closed curve on the torus, stored as ordered lift samples.

    The last sample is the image of the first after one full traversal, so
    ``closure_defect`` (last minus first) must be a pair of integer
    multiples of 2pi.
    """

    samples: np.ndarray  # (n, 2) lift coordinates
    _wrapped: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[1] != 2:
            raise ValueError("samples must have shape (n, 2)")
        if len(self.samples) < 2:
            raise ValueError("a closed curve needs at least two samples")

    @property
    def closure_defect(self) -> np.ndarray:
        return self.samples[-1] - self.samples[0]

    def closes_on_torus(self, tol: float = 1e-6) -> bool:
        d = self.closure_defect
        return bool(np.all(np.abs(d - TAU * np.round(d / TAU)) < tol))

    @property
    def wrapped(self) -> np.ndarray:
        if self._wrapped is None:
            self._wrapped = wrap(self.samples)
        return self._wrapped

    def max_gap(self) -> float:
        steps = np.diff(self.samples, axis=0)
        return float(np.max(np.hypot(steps[:, 0], steps[:, 1])))


def winding(curve: ClosedCurve) -> WindingPair:
    """Winding numbers from the total lift displacement of a closed curve.

    k counts vertical (y) wraps, l horizontal (x) wraps.  Raises if the
    curve does not close on the torus or the displacement is not within
    ``WINDING_RESIDUE_TOL`` turns of an integer pair.
    """
    if not curve.closes_on_torus(tol=WINDING_RESIDUE_TOL * TAU):
        raise ValueError("curve does not close on the torus")
    turns = curve.closure_defect / TAU
    rounded = np.round(turns)
    residue = float(np.max(np.abs(turns - rounded)))
    if residue >= WINDING_RESIDUE_TOL:
        raise ValueError(f"winding residue {residue:.3g} exceeds tolerance")
    l_raw, k_raw = int(rounded[0]), int(rounded[1])
    return WindingPair.from_raw(k_raw, l_raw)


def _replicated_tree(points: np.ndarray) -> tuple[cKDTree, np.ndarray]:
    """KD-tree over the 3x3 fundamental-domain replication of wrapped points.

    Euclidean nearest neighbours in the replication realize the torus
    metric because every shortest representative difference has components
    in [-pi, pi].
    """
    w = np.mod(points, TAU)
    shifts = np.array([(i, j) for i in (-TAU, 0.0, TAU) for j in (-TAU, 0.0, TAU)])
    tiled = (w[None, :, :] + shifts[:, None, :]).reshape(-1, 2)
    return cKDTree(tiled), tiled


def hausdorff_dist(a: ClosedCurve | np.ndarray, b: ClosedCurve | np.ndarray) -> float:
    """Symmetric Hausdorff distance between two sample sets under the
    torus metric.  Zero for identical sample sets."""
    pa = a.wrapped if isinstance(a, ClosedCurve) else wrap(np.asarray(a, float))
    pb = b.wrapped if isinstance(b, ClosedCurve) else wrap(np.asarray(b, float))
    if len(pa) == 0 or len(pb) == 0:
        raise ValueError("hausdorff_dist of an empty curve")
    tree_a, _ = _replicated_tree(pa)
    tree_b, _ = _replicated_tree(pb)
    d_ab, _ = tree_b.query(pa, k=1)
    d_ba, _ = tree_a.query(pb, k=1)
    return float(max(d_ab.max(), d_ba.max()))


def _directed_polyline_dist(pts: np.ndarray, poly: np.ndarray) -> float:
    """max over pts of (torus distance to the closed polyline poly)."""
    tree, tiled = _replicated_tree(poly[:-1])
    n = len(poly) - 1
    _, idx = tree.query(np.mod(pts, TAU), k=1)
    idx = idx % n
    worst = 0.0
    # check the segment at the nearest vertex and its two neighbours
    segs = np.stack([(idx - 1) % n, idx, (idx + 1) % n], axis=1)
    for p, trio in zip(pts, segs):
        best = math.inf
        for j in trio:
            a, b = poly[j], poly[j + 1]
            rel = wrap_to_pi(np.asarray(p, float) - a)
            v = b - a
            vv = float(v @ v)
            t = 0.0 if vv == 0.0 else min(1.0, max(0.0, float(rel @ v) / vv))
            d = rel - t * v
            best = min(best, float(np.hypot(d[0], d[1])))
        worst = max(worst, best)
    return worst


def curve_proximity(a: ClosedCurve, b: ClosedCurve) -> float:
    """Symmetric sample-to-polyline Hausdorff distance on the torus.

    Tighter than :func:`hausdorff_dist` when comparing two samplings of
    the same underlying curve: the polyline interpolation removes the
    sampling-phase offset, leaving only the chord sag ~ gap^2/8.
    """
    return max(
        _directed_polyline_dist(a.samples, b.samples),
        _directed_polyline_dist(b.samples, a.samples),
    )


def resample_polyline(samples: np.ndarray, max_gap: float = CURVE_RESOLUTION) -> np.ndarray:
    """Insert linear subdivisions so no consecutive gap exceeds ``max_gap``."""
    out = [samples[0]]
    for a, b in zip(samples[:-1], samples[1:]):
        gap = float(np.hypot(*(b - a)))
        n = max(1, int(math.ceil(gap / max_gap)))
        for i in range(1, n + 1):
            out.append(a + (b - a) * (i / n))
    return np.asarray(out)

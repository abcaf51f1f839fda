"""Exact torus-knot and link classification.

Pure integer arithmetic: winding pairs coming from numerics must be
rounded before they get here.  A signed pair (k, l) names the free
homotopy class of an embedded closed curve; ambient isotopy in R^3
identifies (k, l) with -(k, l) and with the factor swap (l, k), while
classification up to plain homeomorphism only distinguishes essential
curves from contractible ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ClosedCurve, WindingPair, _replicated_tree, winding


@dataclass(frozen=True)
class KnotClass:
    pair: WindingPair
    essential: bool

    def to_dict(self) -> dict:
        return {"pair": [self.pair.k, self.pair.l], "essential": self.essential}


def _as_pair(p) -> tuple[int, int]:
    if isinstance(p, WindingPair):
        return p.k, p.l
    k, l = p
    return int(k), int(l)


def _validate(p: tuple[int, int]):
    k, l = p
    if (k, l) == (0, 0):
        return
    if math.gcd(abs(k), abs(l)) != 1:
        raise ValueError(f"({k}, {l}) is not a valid simple-curve class (not coprime)")


def isotopy_orbit(p) -> set[tuple[int, int]]:
    """All signed pairs ambient isotopic to p: sign flips and the swap."""
    k, l = _as_pair(p)
    return {(k, l), (-k, -l), (l, k), (-l, -k)}


def is_ambient_isotopic(a, b) -> bool:
    """Exact test: pairs are isotopic iff equal up to total sign change or
    the (k, l) <-> (l, k) swap."""
    pa, pb = _as_pair(a), _as_pair(b)
    _validate(pa)
    _validate(pb)
    return pb in isotopy_orbit(pa)


def homeo_class(p) -> KnotClass:
    """Coarse classification up to homeomorphism: essential (the (1,0)
    representative) versus contractible ((0,0))."""
    pair = _as_pair(p)
    _validate(pair)
    wp = WindingPair.from_raw(*pair)
    return KnotClass(pair=wp, essential=(pair != (0, 0)))


def link_consistent(curves: list[ClosedCurve], min_separation: float | None = None) -> bool:
    """Disjoint-knot lemma check: disjoint simple closed curves on the
    torus must all share one winding pair.

    Raises if any two curves come closer than ``min_separation`` (the
    lemma does not apply to intersecting curves).  The default threshold
    is twice the coarsest sampling gap, the scale below which sampled
    curves cannot be told apart from crossing ones.
    """
    if len(curves) < 2:
        return True
    if min_separation is None:
        min_separation = 2.0 * max(c.max_gap() for c in curves)
    trees = [_replicated_tree(c.wrapped)[0] for c in curves]
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            d, _ = trees[j].query(curves[i].wrapped, k=1)
            if float(d.min()) < min_separation:
                raise ValueError(
                    f"curves {i} and {j} intersect (distance {float(d.min()):.2g}); "
                    "the disjointness lemma does not apply"
                )
    pairs = {(w.k, w.l) for w in map(winding, curves)}
    return len(pairs) == 1

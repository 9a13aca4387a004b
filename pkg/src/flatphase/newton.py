"""2D Newton polyhedron: distance, multiplicity, and the predicted rate.

For a phase with Taylor support S (lattice points with nonnegative integer
coordinates, origin excluded), the Newton polyhedron is the convex hull of
the union of shifted positive quadrants a + R_+^2 over a in S.  The Newton
distance d is the smallest d with (d, d) on the polyhedron; the
multiplicity m is 2 when (d, d) is a vertex and 1 otherwise.  Flat terms
like e^{-1/|x|^p} have empty Taylor support and contribute nothing.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .asymptotics import ScalingLaw

__all__ = [
    "FlatSupportError",
    "normalize_support",
    "polyhedron",
    "newton_distance",
    "predicted_law",
]


class FlatSupportError(ValueError):
    """Raised for an empty Taylor support (flat-only phase): the Newton
    polyhedron is undefined and no power-law rate can be predicted."""


def normalize_support(points) -> list[tuple[int, int]]:
    """Validate and deduplicate support points (nonnegative integers,
    origin excluded)."""
    out = set()
    for pt in points:
        a, b = pt
        if int(a) != a or int(b) != b or a < 0 or b < 0:
            raise ValueError(f"support points must be nonnegative integers, got {pt}")
        if (a, b) == (0, 0):
            raise ValueError("origin cannot be a support point (phase vanishes at 0)")
        out.add((int(a), int(b)))
    return sorted(out)


def polyhedron(support) -> list[tuple[int, int]]:
    """Vertices of the Newton polyhedron, ordered by increasing first
    coordinate (staircase-monotone: second coordinate decreasing).

    A support point is a vertex iff it is Pareto-minimal and not a convex
    combination of its staircase neighbors.
    """
    pts = normalize_support(support)
    if not pts:
        raise FlatSupportError("no Taylor support: polyhedron undefined")
    # Pareto-minimal points: no other point <= componentwise
    minimal = [p for p in pts
               if not any(o != p and o[0] <= p[0] and o[1] <= p[1] for o in pts)]
    minimal.sort(key=lambda p: (p[0], p[1]))
    # lower-left convex chain: drop points lying on or above the segment
    # between their neighbors (cross-product convexity test)
    chain: list[tuple[int, int]] = []
    for p in minimal:
        while len(chain) >= 2:
            (x1, y1), (x2, y2) = chain[-2], chain[-1]
            x3, y3 = p
            cross = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1)
            if cross >= 0:  # middle point not strictly below the segment
                chain.pop()
            else:
                break
        chain.append(p)
    return chain


def newton_distance(support) -> tuple[float, int]:
    """Newton distance d and multiplicity m for the given Taylor support.

    d = min{d > 0 : (d, d) in the polyhedron}; m = 2 iff (d, d) is a
    vertex, else 1.  Exact rational arithmetic avoids ties being decided
    by rounding.
    """
    verts = polyhedron(support)
    # walk the boundary: vertical ray above the first vertex, the edges,
    # then the horizontal ray right of the last vertex
    vx, vy = verts[0]
    candidates: list[tuple[Fraction, bool]] = []  # (d, is_vertex)
    if vx >= vy:
        # the diagonal meets the vertical ray {x = vx, y >= vy}
        candidates.append((Fraction(vx), vx == vy))
    for (x1, y1), (x2, y2) in zip(verts, verts[1:]):
        # edge from (x1, y1) to (x2, y2), x1 < x2, y1 > y2
        if y1 >= x1 and y2 <= x2:
            num = Fraction(y1 - x1)
            den = Fraction((x2 - x1) - (y2 - y1))
            s = num / den
            d = Fraction(x1) + s * (x2 - x1)
            is_vertex = (s == 0 and (x1 == y1)) or (s == 1 and (x2 == y2))
            candidates.append((d, is_vertex))
    lx, ly = verts[-1]
    if ly >= lx:
        candidates.append((Fraction(ly), lx == ly))
    if not candidates:
        raise AssertionError("diagonal must meet the polyhedron boundary")
    d_min = min(c[0] for c in candidates)
    is_vertex = any(v for d, v in candidates if d == d_min)
    # (d, d) is a vertex iff it coincides with a polyhedron vertex
    is_vertex = is_vertex or any(Fraction(x) == d_min and Fraction(y) == d_min
                                 for x, y in verts)
    m = 2 if is_vertex else 1
    return float(d_min), m


def predicted_law(d: float, m: int) -> ScalingLaw:
    """Normalization t^{1/d} (log t)^{-(m-1)} suggested by the polyhedron:
    the scaling under which the real-analytic theory would have a finite
    nonzero limit."""
    if d <= 0:
        raise ValueError("d must be positive")
    if m not in (1, 2):
        raise ValueError("m must be 1 or 2 in two dimensions")
    return ScalingLaw(1.0 / d, -(m - 1.0))

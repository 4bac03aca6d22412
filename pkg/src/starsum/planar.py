"""Planar convex-decomposition helpers.

Convex pieces (zonotope polygons, triangles) are summed exactly: the
Minkowski sum of two convex polygons merges their edge vectors by angle,
so vertices of the sum are exact rationals when the inputs are.  Areas of
unions of many convex pieces are evaluated with shapely/GEOS in floats;
callers fold a small uncertainty band into any certified comparison.
"""

from __future__ import annotations

import functools
import math
from fractions import Fraction

import numpy as np
import shapely
from shapely.geometry import Polygon

UNION_REL_BAND = 1e-9


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def polygon_area(vertices):
    """Signed shoelace area, exact for rational vertices (CCW positive)."""
    s = Fraction(0)
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += Fraction(x0) * Fraction(y1) - Fraction(x1) * Fraction(y0)
    return s / 2


def convex_hull(points):
    """Monotone-chain hull with exact orientation tests; CCW, no collinear."""
    pts = sorted(set((Fraction(x), Fraction(y)) for x, y in points))
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _angle_cmp(u, v):
    """Exact CCW comparison of edge directions starting from (1, 0)."""
    hu = 0 if (u[1] > 0 or (u[1] == 0 and u[0] > 0)) else 1
    hv = 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1
    if hu != hv:
        return -1 if hu < hv else 1
    c = u[0] * v[1] - u[1] * v[0]
    return 0 if c == 0 else (-1 if c > 0 else 1)


def _edges(vertices):
    n = len(vertices)
    return [
        (vertices[(i + 1) % n][0] - vertices[i][0],
         vertices[(i + 1) % n][1] - vertices[i][1])
        for i in range(n)
    ]


def _lowest_vertex(vertices):
    return min(range(len(vertices)), key=lambda i: (vertices[i][1], vertices[i][0]))


def minkowski_sum_convex(p, q):
    """Exact Minkowski sum of two CCW convex polygons (edge merge)."""
    p = [tuple(map(Fraction, v)) for v in p]
    q = [tuple(map(Fraction, v)) for v in q]
    if len(p) == 1:
        return [(q0 + p[0][0], q1 + p[0][1]) for q0, q1 in q]
    if len(q) == 1:
        return [(p0 + q[0][0], p1 + q[0][1]) for p0, p1 in p]
    ip, iq = _lowest_vertex(p), _lowest_vertex(q)
    ep = _edges(p[ip:] + p[:ip])
    eq = _edges(q[iq:] + q[:iq])
    merged = sorted(ep + eq, key=functools.cmp_to_key(_angle_cmp))
    start = (p[ip][0] + q[iq][0], p[ip][1] + q[iq][1])
    out = [start]
    x, y = start
    for ex, ey in merged[:-1]:
        x, y = x + ex, y + ey
        out.append((x, y))
    # drop collinear repeats
    cleaned = []
    for v in out:
        while len(cleaned) >= 2 and _cross(cleaned[-2], cleaned[-1], v) == 0:
            cleaned.pop()
        cleaned.append(v)
    if len(cleaned) >= 3 and _cross(cleaned[-2], cleaned[-1], cleaned[0]) == 0:
        cleaned.pop()
    return cleaned


def zonotope_polygon(z):
    """Exact CCW vertex list of a planar zonotope (None when degenerate)."""
    if z.dim != 2 or z.rank() < 2:
        return None
    poly = [tuple(z.base)]
    for g in z.generators:
        seg = [(Fraction(0), Fraction(0)), (Fraction(g[0]), Fraction(g[1]))]
        poly = minkowski_sum_convex(poly, seg)
    return poly


def segment_polygon(a, b):
    return [tuple(map(Fraction, a)), tuple(map(Fraction, b))]


def to_shapely(vertices):
    return Polygon([(float(x), float(y)) for x, y in vertices])


def union_area(polys):
    """Float area of the union of convex pieces (vertex lists or shapely)."""
    geoms = []
    for p in polys:
        g = p if isinstance(p, Polygon) else to_shapely(p)
        if g.is_valid and g.area > 0:
            geoms.append(g)
    if not geoms:
        return 0.0
    return float(shapely.union_all(geoms).area)


def union_area_band(polys):
    """(area, band): float union area and an uncertainty allowance."""
    area = union_area(polys)
    return area, UNION_REL_BAND * max(area, 1.0)


def triangulate(polygon):
    """Convex (triangle) decomposition of a shapely polygon, holes allowed."""
    tris = shapely.constrained_delaunay_triangles(polygon)
    keep = []
    for t in getattr(tris, "geoms", [tris]):
        if t.area <= 0:
            continue
        # CDT of a polygon with holes can emit triangles in the holes;
        # keep only the pieces inside the region
        if polygon.contains(t.representative_point()):
            keep.append(list(t.exterior.coords)[:-1])
    return keep


def composition_sum(pieces, multiplicities):
    """Vertex list of sum_i (m_i copies of convex region i), edge-merged.

    m copies of a convex region sum to the region scaled by m, so each
    piece contributes its m-dilate once.
    """
    total = None
    for piece, m in zip(pieces, multiplicities):
        if m == 0:
            continue
        scaled = [(m * Fraction(x), m * Fraction(y)) for x, y in piece]
        total = scaled if total is None else minkowski_sum_convex(total, scaled)
    return total


def clip_halfplane(poly, normal, offset):
    """Convex CCW polygon clipped by <n, x> <= c, exact rationals.

    Returns the clipped vertex list ([] when the intersection has empty
    interior).
    """
    if not poly:
        return []
    n = len(poly)
    vals = [normal[0] * x + normal[1] * y for x, y in poly]
    out = []
    for i in range(n):
        a, va = poly[i], vals[i]
        b, vb = poly[(i + 1) % n], vals[(i + 1) % n]
        if va <= offset:
            out.append(a)
        if (va < offset < vb) or (vb < offset < va):
            t = (offset - va) / (vb - va)
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    cleaned = []
    for p in out:
        if not cleaned or cleaned[-1] != p:
            cleaned.append(p)
    while len(cleaned) > 1 and cleaned[0] == cleaned[-1]:
        cleaned.pop()
    if len(cleaned) < 3 or polygon_area(cleaned) == 0:
        return []
    return cleaned


def inside_halfplanes(poly):
    """(normal, offset) pairs whose intersection of <n,x> <= c is the polygon."""
    out = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        normal = (Fraction(b[1]) - Fraction(a[1]), Fraction(a[0]) - Fraction(b[0]))
        out.append((normal, normal[0] * Fraction(a[0]) + normal[1] * Fraction(a[1])))
    return out


def subtract_convex(regions, poly):
    """Exact difference (union of regions) minus one convex polygon.

    Regions are convex CCW polygons; the result is again a list of convex
    polygons covering the difference up to measure zero.
    """
    halfplanes = inside_halfplanes(poly)
    new_regions = []
    for region in regions:
        cur = region
        for normal, offset in halfplanes:
            outside = clip_halfplane(
                cur, (-normal[0], -normal[1]), -offset
            )
            if outside:
                new_regions.append(outside)
            cur = clip_halfplane(cur, normal, offset)
            if not cur:
                break
    return new_regions


def covers(target, polys):
    """Exact test that a union of convex polygons covers a convex target
    up to measure zero."""
    regions = [target]
    for p in sorted(polys, key=lambda q: -abs(polygon_area(q))):
        if not regions:
            return True
        regions = subtract_convex(regions, p)
    return not regions

"""Monotonicity audits and grid verifications for k-fold sum sequences.

The central quantity is v(k) = vol((1/k) A[k]).  Audits report certified
bounds per k and a verdict per consecutive pair:

  certified-nondecreasing  requires lower(k+1) >= upper(k)
  certified-violation      requires upper(k+1) < lower(k)
  inconclusive             otherwise (bounds overlap)

Bound providers are layered: exact closed forms where available, planar
convex-decomposition areas (shapely union with a small band), then grid
rasters over a refinement schedule.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import ndimage

from . import grid as gridmod
from . import planar
from .combinatorics import (
    corner_volume,
    enumerate_layer,
    simplex_spider_volume,
    stability_constant,
    threshold_k,
)
from .counterexamples import AxisBox, box_union_volume
from .geometry import Spider, compositions, kfold_zonotopes, _rank_rational
from .grid import (
    CELL_CAP_DEFAULT,
    CellCapError,
    GridFrame,
    GridSet,
    boundary_cells,
    dilate,
    hausdorff,
    rasterize_halfspaces,
    rasterize_spider,
)
from .specs import (
    BoxUnionSpec,
    HullSpec,
    PlanarHolesSpec,
    SpiderSpec,
    materialize,
    spec_spider,
)

CERTIFIED_NONDECREASING = "certified-nondecreasing"
CERTIFIED_VIOLATION = "certified-violation"
INCONCLUSIVE = "inconclusive"


@dataclass
class StepEntry:
    k: int
    lower: Fraction
    upper: Fraction
    verdict: str  # comparison against the previous k ("" for the first)
    hausdorff: float = None
    seconds: float = 0.0
    method: str = ""
    notes: tuple = ()

    def as_row(self):
        return [
            self.k,
            float(self.lower),
            "" if self.upper is None else float(self.upper),
            self.verdict,
            "" if self.hausdorff is None else self.hausdorff,
            round(self.seconds, 6),
        ]


@dataclass
class AuditReport:
    entries: list
    dim_deficient: bool
    hull_reached: bool
    schedule: list
    extra: dict = field(default_factory=dict)

    def verdicts(self):
        return [e.verdict for e in self.entries[1:]]

    def all_certified_nondecreasing(self):
        return all(v == CERTIFIED_NONDECREASING for v in self.verdicts())

    def any_violation(self):
        return any(v == CERTIFIED_VIOLATION for v in self.verdicts())

    def to_dict(self):
        return {
            "entries": [
                {
                    "k": e.k,
                    "lower": str(e.lower),
                    "upper": None if e.upper is None else str(e.upper),
                    "verdict": e.verdict,
                    "hausdorff": e.hausdorff,
                    "seconds": round(e.seconds, 6),
                    "method": e.method,
                    "notes": list(e.notes),
                }
                for e in self.entries
            ],
            "flags": {
                "dim_deficient": self.dim_deficient,
                "hull_reached": self.hull_reached,
            },
            "schedule": [str(h) for h in self.schedule],
            "extra": self.extra,
        }


def default_schedule(d, start=None, refinements=4):
    """Halving spacing schedule: 1/64 (d=2) or 1/16 (d >= 3) by default."""
    if start is None:
        start = Fraction(1, 64) if d == 2 else Fraction(1, 16)
    start = Fraction(start)
    return [start / 2**i for i in range(refinements + 1)]


def hull_volume(points):
    """Exact volume of conv(points) for d <= 3 (0 when degenerate)."""
    d = len(points[0])
    pts = [tuple(Fraction(x) for x in p) for p in points]
    if d == 1:
        return max(p[0] for p in pts) - min(p[0] for p in pts)
    if d == 2:
        hull = planar.convex_hull(pts)
        if len(hull) < 3:
            return Fraction(0)
        return abs(planar.polygon_area(hull))
    if d == 3:
        from scipy.spatial import ConvexHull

        base = pts[0]
        if _rank_rational([tuple(a - b for a, b in zip(p, base)) for p in pts[1:]]) < 3:
            return Fraction(0)
        arr = np.array([[float(x) for x in p] for p in pts])
        hull = ConvexHull(arr)
        c = tuple(sum(p[j] for p in pts) / len(pts) for j in range(3))
        total = Fraction(0)
        for simplex in hull.simplices:
            a, b, cc = (pts[i] for i in simplex)
            m = [
                tuple(x - y for x, y in zip(a, c)),
                tuple(x - y for x, y in zip(b, c)),
                tuple(x - y for x, y in zip(cc, c)),
            ]
            det = (
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            )
            total += abs(det)
        return total / 6
    raise ValueError("exact hull volume only implemented for d <= 3")


def hull_halfspaces(points):
    """Exact facet half-spaces of conv(points), d <= 3, full-dimensional."""
    d = len(points[0])
    pts = [tuple(Fraction(x) for x in p) for p in points]
    out = []
    if d == 2:
        hull = planar.convex_hull(pts)
        if len(hull) < 3:
            return None
        for i in range(len(hull)):
            a = hull[i]
            b = hull[(i + 1) % len(hull)]
            normal = (b[1] - a[1], a[0] - b[0])  # outward for CCW
            out.append((normal, normal[0] * a[0] + normal[1] * a[1]))
        return out
    if d == 3:
        from scipy.spatial import ConvexHull

        base = pts[0]
        if _rank_rational([tuple(a - b for a, b in zip(p, base)) for p in pts[1:]]) < 3:
            return None
        arr = np.array([[float(x) for x in p] for p in pts])
        hull = ConvexHull(arr)
        c = tuple(sum(p[j] for p in pts) / len(pts) for j in range(3))
        seen = {}
        for simplex in hull.simplices:
            a, b, cc = (pts[i] for i in simplex)
            u = tuple(x - y for x, y in zip(b, a))
            v = tuple(x - y for x, y in zip(cc, a))
            n = (
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            )
            if all(x == 0 for x in n):
                continue
            if sum(ni * (ai - ci) for ni, ai, ci in zip(n, a, c)) < 0:
                n = tuple(-x for x in n)
            offset = sum(ni * ai for ni, ai in zip(n, a))
            seen[n] = offset
        return list(seen.items())
    raise ValueError("exact hull half-spaces only implemented for d <= 3")


# ---------------------------------------------------------------------------
# bound providers


def _spider_exact_bounds(spider, k):
    """Exact v(k) when the essential tips are a basis: linear image of the
    axis spider, so v(k) = |det legs| * binom(k, d) / k^d."""
    d = spider.dim
    tips = spider.essential_tips()
    if len(tips) != d:
        return None
    reduced = Spider(spider.apex, tips)
    legs = reduced.legs()
    if _rank_rational(legs) < d:
        return None
    det = _det_rational(legs)
    value = abs(det) * simplex_spider_volume(d, k)
    return value, value


def _det_rational(rows):
    m = [list(r) for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return det


def _spider_polygon_bounds(spider, k):
    """Planar union-of-zonotopes area with a GEOS uncertainty band."""
    if spider.dim != 2:
        return None
    polys = []
    for z in kfold_zonotopes(spider, k):
        poly = planar.zonotope_polygon(z)
        if poly is not None:
            polys.append(poly)
    if not polys:
        return Fraction(0), Fraction(0)
    area, band = planar.union_area_band(polys)
    band = band * max(len(polys), 1)
    scale = Fraction(k) ** 2
    lo = max(Fraction(0), Fraction(area - band) / scale)
    return lo, Fraction(area + band) / scale


def _spider_grid_bounds(spider, k, spacing, cap):
    return gridmod.kfold_volume_bounds(spider, k, spacing, cap)


def _box_union_kfold_volume(boxes, k):
    """Exact v(k) for a union of axis boxes through composition sums."""
    pieces = []
    for comp in compositions(k, len(boxes)):
        total = None
        for c, box in zip(comp, boxes):
            scaled = AxisBox(
                tuple(c * x for x in box.lo), tuple(c * x for x in box.hi)
            )
            total = scaled if total is None else total + scaled
        pieces.append(total)
    return box_union_volume(pieces) / Fraction(k) ** boxes[0].dim


# ---------------------------------------------------------------------------
# audit


def _pair_verdict(prev, cur):
    if prev[1] is not None and cur[0] >= prev[1]:
        return CERTIFIED_NONDECREASING
    if cur[1] is not None and cur[1] < prev[0]:
        return CERTIFIED_VIOLATION
    return INCONCLUSIVE


def audit_monotonicity(
    spec,
    k_max,
    schedule=None,
    cell_cap=CELL_CAP_DEFAULT,
    with_hausdorff=False,
):
    """Certified monotonicity audit of v(k) = vol((1/k) A[k]), k = 1..k_max.

    Refines each consecutive pair through the bound levels (exact closed
    form, planar decomposition, grid schedule) until its verdict is no
    longer inconclusive or the schedule is exhausted.  Cell-cap and
    convergence failures are recorded per step; the audit continues.
    """
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    spec = materialize(spec, require_invertible=True)
    if schedule is None:
        schedule = default_schedule(spec.dim)
    ks = list(range(1, k_max + 1))
    bounds = {}
    seconds = {k: 0.0 for k in ks}
    notes = {k: [] for k in ks}
    methods = {k: "" for k in ks}
    dim_deficient = False
    hull_reached = False
    extra = {}

    def improve(k, lo_up, label):
        if lo_up is None:
            return
        lo, up = lo_up
        cur = bounds.get(k)
        if cur is None:
            bounds[k] = [lo, up]
            methods[k] = label
        else:
            if lo > cur[0]:
                cur[0] = lo
                methods[k] = label
            if up < cur[1]:
                cur[1] = up
                methods[k] = label

    if isinstance(spec, SpiderSpec):
        spider = spec_spider(spec)
        d = spider.dim
        if spider.rank() < d:
            dim_deficient = True
            for k in ks:
                bounds[k] = [Fraction(0), Fraction(0)]
                methods[k] = "rank-deficient (measure zero)"
        else:
            levels = [("exact", None), ("planar", None)] + [
                ("grid", h) for h in schedule
            ]
            for k in ks:
                t0 = time.perf_counter()
                improve(k, _spider_exact_bounds(spider, k), "exact linear image")
                seconds[k] += time.perf_counter() - t0
            for kind, h in levels[1:]:
                undecided = _undecided_pairs(ks, bounds)
                if not undecided:
                    break
                for k in sorted(undecided):
                    t0 = time.perf_counter()
                    try:
                        if kind == "planar":
                            improve(k, _spider_polygon_bounds(spider, k), "planar union")
                        else:
                            improve(
                                k,
                                _spider_grid_bounds(spider, k, h, cell_cap),
                                "grid h=%s" % h,
                            )
                    except CellCapError as e:
                        notes[k].append(str(e))
                    seconds[k] += time.perf_counter() - t0
        hull_pts = (spec.apex,) + spec.tips
    elif isinstance(spec, HullSpec):
        # (1/k) A[k] = conv(A) for convex A: the sequence is constant
        if spec.dim > 3:
            raise ValueError("hull audits need exact volumes, available for d <= 3")
        v = hull_volume(spec.points)
        if v == 0:
            dim_deficient = True
        for k in ks:
            bounds[k] = [v, v]
            methods[k] = "exact hull volume (constant in k)"
        hull_reached = True
        hull_pts = spec.points
    elif isinstance(spec, BoxUnionSpec):
        boxes = [AxisBox(lo, hi) for lo, hi in spec.boxes]
        if all(b.is_degenerate() for b in boxes):
            # the union may still span full dimension through sums; fall
            # back to the exact composition sweep which handles it anyway
            pass
        for k in ks:
            t0 = time.perf_counter()
            v = _box_union_kfold_volume(boxes, k)
            bounds[k] = [v, v]
            methods[k] = "exact box-union sweep"
            seconds[k] += time.perf_counter() - t0
        if bounds[ks[-1]][0] == 0:
            dim_deficient = True
        corners = [c for b in boxes for c in (b.lo, b.hi)]
        hull_pts = corners
    elif isinstance(spec, PlanarHolesSpec):
        report = holes_audit(spec, k_max, schedule=schedule, cell_cap=cell_cap)
        return report
    else:
        raise TypeError("unsupported spec kind for audits: %r" % (spec,))

    # hull_reached: last bounds against the exact hull volume
    if not hull_reached and spec.dim <= 3 and bounds.get(k_max):
        try:
            hv = hull_volume(hull_pts)
            gap = bounds[k_max][1] - bounds[k_max][0]
            shell = max(gap, Fraction(1, 10**12))
            hull_reached = hv - bounds[k_max][0] <= 2 * shell
            extra["hull_volume"] = str(hv)
        except ValueError:
            pass

    entries = []
    hd_seq = None
    if with_hausdorff and isinstance(spec, SpiderSpec) and not dim_deficient:
        try:
            hd_seq = hausdorff_convergence(spec, ks[1:], schedule[0]).values
            hd_seq = [None] + hd_seq
        except (CellCapError, ValueError):
            hd_seq = None
    for i, k in enumerate(ks):
        if k not in bounds:
            bounds[k] = [Fraction(0), None]
            notes[k].append("no bound computed (all levels failed)")
        lo, up = bounds[k]
        verdict = ""
        if i > 0:
            verdict = _pair_verdict(bounds[ks[i - 1]], bounds[k])
        entries.append(
            StepEntry(
                k=k,
                lower=lo,
                upper=up,
                verdict=verdict,
                hausdorff=None if hd_seq is None else hd_seq[i],
                seconds=seconds[k],
                method=methods[k],
                notes=tuple(notes[k]),
            )
        )
    return AuditReport(
        entries=entries,
        dim_deficient=dim_deficient,
        hull_reached=hull_reached,
        schedule=list(schedule),
        extra=extra,
    )


def _undecided_pairs(ks, bounds):
    undecided = set()
    for a, b in zip(ks, ks[1:]):
        if a not in bounds or b not in bounds:
            undecided.update((a, b))
            continue
        if _pair_verdict(bounds[a], bounds[b]) == INCONCLUSIVE:
            undecided.update((a, b))
    return undecided


# ---------------------------------------------------------------------------
# layer-by-layer cell-mass verifier for sandwiched grid sets


class SandwichError(ValueError):
    """M is not sandwiched between the staircase of B[k] and k conv(B)."""


@dataclass
class Lemma2Report:
    d: int
    k: int
    spacing: Fraction
    per_cell_ok: bool
    per_layer_ok: bool
    weights_sum_ok: bool
    weights_dual_ok: bool
    volume_inequality_ok: bool
    delta: Fraction
    stability_ok: bool
    stability_margin: Fraction
    vol_m: Fraction
    vol_mb: Fraction
    vol_kconv: Fraction
    layer_data: dict


def _bk_base_cells(d, k, n):
    """Inner raster of B[k] on the [0, k]^d grid with spacing 1/n.

    One block of cells per composition: along used axes it reaches the
    composition's multiple, along unused axes it hugs the flat; clipped to
    cells fully inside k conv(B).  For k >= d this contains the staircase
    of full cells; for k < d every piece of B[k] is lower-dimensional but
    the raster is still the right grid stand-in for the sandwich.
    """
    shape = (k * n,) * d
    cells = np.zeros(shape, dtype=bool)
    for comp in compositions(k, d):
        block = tuple(slice(0, c * n) if c > 0 else slice(0, 1) for c in comp)
        cells[block] = True
    idx = np.indices(shape, dtype=np.int64)
    inside = (idx + 1).sum(axis=0) <= k * n
    return cells & inside


def make_sandwiched_m(d, k, n, rng=None, fill=0.5):
    """Random grid set between the inner raster of B[k] and k conv(B).

    Grid spacing 1/n over [0, k]^d.  fill = 0 gives exactly the base
    raster; fill = 1 gives every cell inside k conv(B).
    """
    shape = (k * n,) * d
    idx = np.indices(shape, dtype=np.int64)
    corner_sum = (idx + 1).sum(axis=0)
    inside = corner_sum <= k * n
    cells = _bk_base_cells(d, k, n)
    if fill >= 1:
        cells |= inside
    elif fill > 0:
        if rng is None:
            rng = np.random.default_rng(0)
        cells |= inside & (rng.random(shape) < fill)
    frame = GridFrame((Fraction(0),) * d, Fraction(1, n), shape)
    return GridSet(frame, cells, gridmod.EXACT)


def lemma2_check(d, k, M=None, spacing=Fraction(1, 8), rng=None, fill=0.5, slack=None):
    """Exact layer-by-layer verification of the cell-mass inequalities.

    B is the axis spider (the normalization the estimate is stated in);
    M must contain the
    inner raster of B[k] and stay inside k conv(B) on the grid.  All masses, weights
    and volumes are exact rationals; every assertion is checked with zero
    tolerance.  The final stability clause uses
    delta = vol((M+B)/(k+1)) - vol(M/k).
    """
    spacing = Fraction(spacing)
    if spacing.numerator != 1:
        raise ValueError("grid spacing must divide 1")
    n = spacing.denominator
    if M is None:
        M = make_sandwiched_m(d, k, n, rng=rng, fill=fill)
    if M.spacing != spacing:
        spacing = M.spacing
        n = spacing.denominator
        if spacing.numerator != 1:
            raise ValueError("grid spacing must divide 1")
    if M.frame.anchor != (Fraction(0),) * d or M.frame.extents != (k * n,) * d:
        raise SandwichError("M must live on the [0,k]^d grid with anchor 0")

    shape = M.frame.extents
    idx = np.indices(shape, dtype=np.int64)
    corner_sum = (idx + 1).sum(axis=0)
    base = _bk_base_cells(d, k, n)
    inside = corner_sum <= k * n
    if np.any(base & ~M.cells):
        raise SandwichError("M misses cells of the B[k] raster")
    if np.any(M.cells & ~inside):
        raise SandwichError("M has cells outside k conv(B)")

    # exact sum with B: union over axes of M + [0, e_j], realized as index
    # sumsets with the outer raster of B (indices 0..n along each axis)
    bframe = GridFrame((Fraction(0),) * d, spacing, (n + 1,) * d)
    b_raster = rasterize_spider(
        Spider((0,) * d, [tuple(int(i == j) for i in range(d)) for j in range(d)]),
        bframe,
    )
    MB = dilate(M, b_raster)

    # subcell counts per unit cell (denominator n^d is uniform, so all
    # comparisons stay in integers)
    def unit_counts(g):
        gshape = g.frame.extents
        gidx = np.indices(gshape, dtype=np.int64)
        units = tuple((gidx[a] // n) for a in range(d))
        upper = tuple(int(e // n) for e in gshape)
        flat = np.zeros(gshape, dtype=np.int64)
        mult = 1
        for a in reversed(range(d)):
            flat += units[a] * mult
            mult *= upper[a]
        counts = np.bincount(flat[g.cells], minlength=mult)
        return counts.reshape(upper)

    mu = unit_counts(M)
    lam = unit_counts(MB)

    per_cell_ok = True
    per_layer_ok = True
    weights_sum_ok = True
    weights_dual_ok = True
    layer_data = {}
    for t in range(k - d + 1, k):
        mu_layer = 0
        lam_layer = 0
        for i_prime in enumerate_layer(d, t):
            if any(v >= s for v, s in zip(i_prime, mu.shape)):
                continue
            m_val = int(mu[i_prime])
            mu_layer += m_val
            for j in range(d):
                i_cell = tuple(
                    v + (1 if a == j else 0) for a, v in enumerate(i_prime)
                )
                if any(v >= s for v, s in zip(i_cell, lam.shape)):
                    continue
                if int(lam[i_cell]) < m_val:
                    per_cell_ok = False
        for i_cell in enumerate_layer(d, t + 1):
            if any(v >= s for v, s in zip(i_cell, lam.shape)):
                continue
            lam_layer += int(lam[i_cell])
            # weight normalization sum_j i_j / (t+1) = 1
            if sum(Fraction(v, t + 1) for v in i_cell) != 1:
                weights_sum_ok = False
        for i_prime in enumerate_layer(d, t):
            dual = sum(Fraction(v + 1, t + 1) for v in i_prime)
            if dual != Fraction(t + d, t + 1):
                weights_dual_ok = False
        if (t + 1) * lam_layer < (t + d) * mu_layer:
            per_layer_ok = False
        layer_data[t] = {"mu_cells": mu_layer, "lambda_cells": lam_layer}

    h = spacing
    vol_m = M.count() * h**d
    vol_mb = MB.count() * h**d
    vol_kconv = Fraction(k) ** d * corner_volume(d, 1)  # k^d / d!
    lhs = vol_mb / Fraction(k + 1) ** d
    rhs = vol_m / Fraction(k) ** d
    volume_ok = lhs >= rhs
    delta = lhs - rhs

    stability_ok = True
    stability_margin = None
    if d >= 2 and k >= threshold_k(d):
        c = stability_constant(d, k)
        if slack is None:
            slack = c * d * h  # cushion for the measure-zero parts of B[k]
        stability_margin = vol_m - (vol_kconv - c * delta - Fraction(slack))
        stability_ok = stability_margin >= 0
    return Lemma2Report(
        d=d,
        k=k,
        spacing=spacing,
        per_cell_ok=per_cell_ok,
        per_layer_ok=per_layer_ok,
        weights_sum_ok=weights_sum_ok,
        weights_dual_ok=weights_dual_ok,
        volume_inequality_ok=volume_ok,
        delta=delta,
        stability_ok=stability_ok,
        stability_margin=stability_margin,
        vol_m=vol_m,
        vol_mb=vol_mb,
        vol_kconv=vol_kconv,
        layer_data=layer_data,
    )


# ---------------------------------------------------------------------------
# boundary identities


def disc_raster(radius_cells, spacing, dim=2):
    """Grid disc: cells whose center lies in the ball of the given radius.

    The radius is an integer number of cells, so the center-in-ball test
    (2i+1-2R)^2 + ... <= (2R)^2 is exact in integers.
    """
    r = int(radius_cells)
    spacing = Fraction(spacing)
    n = 2 * r
    frame = GridFrame((Fraction(0),) * dim, spacing, (n,) * dim)
    idx = np.indices((n,) * dim, dtype=np.int64)
    q = sum((2 * idx[a] + 1 - 2 * r) ** 2 for a in range(dim))
    return GridSet(frame, q <= (2 * r) ** 2, gridmod.OUTER)


def annulus_raster(outer_cells, inner_cells, spacing, dim=2):
    """Grid annulus (center-in-set test); its boundary is disconnected."""
    if not 0 < inner_cells < outer_cells:
        raise ValueError("need 0 < inner radius < outer radius")
    r = int(outer_cells)
    ri = int(inner_cells)
    spacing = Fraction(spacing)
    n = 2 * r
    frame = GridFrame((Fraction(0),) * dim, spacing, (n,) * dim)
    idx = np.indices((n,) * dim, dtype=np.int64)
    q = sum((2 * idx[a] + 1 - 2 * r) ** 2 for a in range(dim))
    cells = (q <= (2 * r) ** 2) & (q > (2 * ri) ** 2)
    return GridSet(frame, cells, gridmod.OUTER)


def square_raster(side_cells, spacing, dim=2):
    n = int(side_cells)
    spacing = Fraction(spacing)
    frame = GridFrame((Fraction(0),) * dim, spacing, (n,) * dim)
    return GridSet(frame, np.ones((n,) * dim, dtype=bool), gridmod.OUTER)


class DisconnectedBoundaryError(ValueError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass
class BoundaryReport:
    boundary_components: int
    used_external_boundary: bool
    rejected: bool
    vol_aa: Fraction
    vol_bb: Fraction
    vol_ab: Fraction
    hausdorff_aa_bb: float
    hausdorff_aa_ab: float
    spacing: Fraction
    tolerance: float

    @property
    def passed(self):
        return (
            not self.rejected
            and self.hausdorff_aa_bb <= self.tolerance
            and self.hausdorff_aa_ab <= self.tolerance
        )


def _face_structure(d):
    return ndimage.generate_binary_structure(d, 1)


def _full_structure(d):
    # connectivity of the union of closed cells: corner contact connects
    return ndimage.generate_binary_structure(d, d)


def _component_count(cells):
    _, num = ndimage.label(cells, structure=_full_structure(cells.ndim))
    return num


def external_boundary_cells(a):
    """Occupied cells adjacent to the unbounded complement component."""
    occ = a.cells
    padded = np.pad(~occ, 1, constant_values=True)
    labels, _ = ndimage.label(padded, structure=_face_structure(a.dim))
    outside_label = labels[(0,) * a.dim]
    outside = labels == outside_label
    near = np.zeros_like(occ)
    inner = tuple(slice(1, -1) for _ in range(a.dim))
    for axis in range(a.dim):
        for shift in (-1, 1):
            rolled = np.roll(outside, shift, axis=axis)
            near |= rolled[inner]
    return GridSet(a.frame, occ & near, a.mode)


def boundary_lemma_check(a):
    """Checks A+A = B+B = A+B on the grid for boundary sets B of A.

    B is the face-boundary of A; when that splits into several components
    (e.g. an annulus) the check retries with the external boundary, which
    suffices for the sum identities.  If even the external boundary is
    disconnected the input is rejected with a diagnostic report carrying
    the measured volumes (which then genuinely differ).
    """
    bd = boundary_cells(a)
    ncomp = _component_count(bd.cells)
    used_external = False
    b = bd
    if ncomp > 1:
        ext = external_boundary_cells(a)
        if ext.count() and _component_count(ext.cells) == 1:
            b = ext
            used_external = True
        else:
            aa = dilate(a, a)
            bb = dilate(bd, bd)
            h = a.spacing
            report = BoundaryReport(
                boundary_components=ncomp,
                used_external_boundary=False,
                rejected=True,
                vol_aa=aa.volume(),
                vol_bb=bb.volume(),
                vol_ab=dilate(a, bd).volume(),
                hausdorff_aa_bb=hausdorff(aa, bb).value,
                hausdorff_aa_ab=hausdorff(aa, dilate(a, bd)).value,
                spacing=h,
                tolerance=2 * float(h) * math.sqrt(a.dim),
            )
            raise DisconnectedBoundaryError(
                "boundary splits into %d components; the sum identity fails "
                "without connectedness (vol dA+dA = %s < vol A+A = %s)"
                % (ncomp, float(report.vol_bb), float(report.vol_aa)),
                report,
            )
    aa = dilate(a, a)
    bb = dilate(b, b)
    ab = dilate(a, b)
    h = a.spacing
    return BoundaryReport(
        boundary_components=ncomp,
        used_external_boundary=used_external,
        rejected=False,
        vol_aa=aa.volume(),
        vol_bb=bb.volume(),
        vol_ab=ab.volume(),
        hausdorff_aa_bb=hausdorff(aa, bb).value,
        hausdorff_aa_ab=hausdorff(aa, ab).value,
        spacing=h,
        tolerance=2 * float(h) * math.sqrt(a.dim),
    )


# ---------------------------------------------------------------------------
# planar holes audit (convex region minus convex bites)


@dataclass
class BiteCheck:
    bite_index: int
    k: int
    lhs_area: float
    rhs_area: float
    verdict: str


def holes_audit(spec, k_max, schedule=None, cell_cap=CELL_CAP_DEFAULT, resolution=None):
    """Monotonicity audit for X = K minus convex bites (planar).

    X is decomposed into convex pieces (constrained triangulation); X[k]
    is the union of composition sums of the pieces, and areas come from
    GEOS unions with an uncertainty band.  For each bite that meets the
    boundary of K, the local inequality

        area((1/k) M) <= area((1/(k+1)) (M + gamma))

    is evaluated, with M = X[k] intersect k conv(bite) and gamma the part
    of the bite's boundary interior to K.
    """
    import shapely
    from shapely import affinity

    from .specs import PlanarHolesSpec, SpecError

    if not isinstance(spec, PlanarHolesSpec):
        raise TypeError("holes_audit needs a planar-holes spec")
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    if schedule is None:
        schedule = default_schedule(2)
    K_exact = planar.convex_hull(spec.outer)
    if abs(planar.polygon_area(K_exact)) != abs(
        planar.polygon_area([tuple(map(Fraction, p)) for p in spec.outer])
    ):
        raise SpecError("$.outer", "outer region must be a convex polygon")
    K = planar.to_shapely(K_exact)
    bites = [planar.to_shapely([tuple(map(Fraction, p)) for p in poly]) for poly in spec.bites]
    for i in range(len(bites)):
        for j in range(i + 1, len(bites)):
            if bites[i].intersection(bites[j]).area > 0:
                raise SpecError(
                    "$.bites[%d]" % j, "bites must be pairwise non-overlapping"
                )
    region = K.difference(shapely.union_all(bites)) if bites else K
    pieces = planar.triangulate(region)
    pieces = [_ccw(p) for p in pieces]

    # conv X as exact hull of the piece vertices: v(k) <= area(conv X)
    # always, and a coverage certificate k conv(X) <= X[k] pins v(k) to it
    conv_x = planar.convex_hull([v for p in pieces for v in p])
    conv_area = abs(planar.polygon_area(conv_x))

    band0 = planar.UNION_REL_BAND * max(K.area, 1.0)
    bounds = {}
    seconds = {}
    for k in range(1, k_max + 1):
        t0 = time.perf_counter()
        polys = [
            planar.composition_sum(pieces, comp)
            for comp in compositions(k, len(pieces))
        ]
        target = [(k * x, k * y) for x, y in conv_x]
        if planar.covers(target, polys):
            bounds[k] = [conv_area, conv_area]
        else:
            area = planar.union_area(polys)
            band = band0 * max(len(polys), 1)
            bounds[k] = [
                Fraction(max(area - band, 0.0)) / k**2,
                min(Fraction(area + band) / k**2, conv_area),
            ]
        seconds[k] = time.perf_counter() - t0
    entries = []
    for i, k in enumerate(range(1, k_max + 1)):
        verdict = "" if i == 0 else _pair_verdict(bounds[k - 1], bounds[k])
        entries.append(
            StepEntry(
                k=k,
                lower=bounds[k][0],
                upper=bounds[k][1],
                verdict=verdict,
                seconds=seconds[k],
                method="planar decomposition (%d pieces)" % len(pieces),
            )
        )
    hull_reached = bounds[k_max][0] >= conv_area - Fraction(
        2 * band0 * max(len(pieces) ** 2, 1)
    )

    # local boundary-bite inequality
    bite_checks = []
    for bi, bite in enumerate(bites):
        d_i = bite.intersection(K)
        if d_i.is_empty or d_i.area == 0:
            continue
        touches = d_i.boundary.intersection(K.boundary)
        if touches.length == 0:
            continue  # interior bite: no local boundary inequality
        gamma = _interior_chain(d_i, K)
        for k in range(2, k_max):
            polys_k = [
                planar.composition_sum(pieces, comp)
                for comp in compositions(k, len(pieces))
            ]
            kd = affinity.scale(d_i.convex_hull, xfact=k, yfact=k, origin=(0, 0))
            m_pieces = []
            for poly in polys_k:
                inter = planar.to_shapely(poly).intersection(kd)
                if inter.area > 0:
                    m_pieces.append(inter)
            lhs = sum(p.area for p in _dissolve(m_pieces)) / k**2
            sum_pieces = []
            for p in m_pieces:
                for seg in gamma:
                    sum_pieces.append(_convex_plus_segment(p, seg))
            rhs = sum(p.area for p in _dissolve(sum_pieces)) / (k + 1) ** 2
            band = band0 * max(len(m_pieces) + len(sum_pieces), 1)
            if rhs >= lhs - band:
                verdict = "holds" if rhs >= lhs + band or lhs <= band else "within-band"
            else:
                verdict = "violated"
            bite_checks.append(
                BiteCheck(bite_index=bi, k=k, lhs_area=lhs, rhs_area=rhs, verdict=verdict)
            )

    # raster evidence for X itself at the requested resolution
    extra = {"bite_checks": [vars(c) for c in bite_checks], "pieces": len(pieces)}
    if resolution is not None:
        h = Fraction(resolution)
        lo = [min(Fraction(p[j]) for p in spec.outer) for j in (0, 1)]
        hi = [max(Fraction(p[j]) for p in spec.outer) for j in (0, 1)]
        frame = GridFrame.covering(lo, hi, h)
        outer_cells = np.zeros(frame.extents, dtype=bool)
        inner_cells = np.zeros(frame.extents, dtype=bool)
        for p in pieces:
            hs = _polygon_halfspaces(p)
            bbox = (
                tuple(min(Fraction(v[j]) for v in p) for j in (0, 1)),
                tuple(max(Fraction(v[j]) for v in p) for j in (0, 1)),
            )
            outer_cells |= rasterize_halfspaces(hs, bbox, frame, gridmod.OUTER).cells
            inner_cells |= rasterize_halfspaces(hs, bbox, frame, gridmod.INNER).cells
        extra["raster"] = {
            "resolution": str(h),
            "outer_cells": int(outer_cells.sum()),
            "inner_cells": int(inner_cells.sum()),
        }
    return AuditReport(
        entries=entries,
        dim_deficient=False,
        hull_reached=hull_reached,
        schedule=list(schedule),
        extra=extra,
    )


def _ccw(poly):
    pts = [tuple(map(Fraction, p)) for p in poly]
    if planar.polygon_area(pts) < 0:
        pts.reverse()
    return pts


def _polygon_halfspaces(poly):
    out = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        normal = (Fraction(b[1]) - Fraction(a[1]), Fraction(a[0]) - Fraction(b[0]))
        out.append((normal, normal[0] * Fraction(a[0]) + normal[1] * Fraction(a[1])))
    return out


def _interior_chain(d_i, K):
    """Edges of the bite region strictly inside K (the chain gamma)."""
    from shapely.geometry import Point

    segs = []
    coords = list(d_i.exterior.coords)
    for a, b in zip(coords, coords[1:]):
        mid = Point((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
        if K.boundary.distance(mid) > 1e-9:
            segs.append(((a[0], a[1]), (b[0], b[1])))
    return segs


def _convex_plus_segment(piece, seg):
    import shapely
    from shapely import affinity

    (ax, ay), (bx, by) = seg
    p0 = affinity.translate(piece, ax, ay)
    p1 = affinity.translate(piece, bx, by)
    return shapely.union_all([p0, p1]).convex_hull


def _dissolve(geoms):
    import shapely

    if not geoms:
        return []
    u = shapely.union_all(geoms)
    return list(getattr(u, "geoms", [u]))


# ---------------------------------------------------------------------------
# Hausdorff convergence


@dataclass
class HausdorffConvergence:
    ks: list
    values: list
    slack: float
    fitted_exponent: float


def hausdorff_convergence(spec, ks, spacing, cell_cap=CELL_CAP_DEFAULT):
    """d_H((1/k) A[k], conv A) over a list of k, with a fitted decay rate.

    Distances are between outer rasters at the given spacing and carry the
    usual one-cell slack; the exponent comes from a log-log least squares
    fit (NaN when any distance is zero).
    """
    spec = materialize(spec, require_invertible=True)
    spacing = Fraction(spacing)
    if not isinstance(spec, (SpiderSpec, HullSpec)):
        raise TypeError("hausdorff_convergence supports spider and hull specs")
    if isinstance(spec, HullSpec):
        pts = spec.points
    else:
        pts = (spec.apex,) + spec.tips
    d = spec.dim
    hs = hull_halfspaces(pts)
    if hs is None:
        raise ValueError("spec must be full-dimensional")
    lo = tuple(min(Fraction(p[j]) for p in pts) for j in range(d))
    hi = tuple(max(Fraction(p[j]) for p in pts) for j in range(d))
    frame = GridFrame.covering(lo, hi, spacing)
    if frame.cell_count() > cell_cap:
        raise CellCapError("hull frame exceeds cell cap")
    bbox = (lo, hi)
    hull_raster = rasterize_halfspaces(hs, bbox, frame, gridmod.OUTER)
    values = []
    for k in ks:
        if isinstance(spec, HullSpec):
            values.append(0.0)
            continue
        spider = spec_spider(spec)
        cells = np.zeros(frame.extents, dtype=bool)
        for z in kfold_zonotopes(spider, k):
            scaled_hs = []
            zh = z.halfspaces()
            if zh is None:
                # lower-dimensional piece: raster its segment skeleton
                base = tuple(Fraction(x, k) for x in z.base)
                gens = [tuple(Fraction(x, k) for x in g) for g in z.generators]
                g = _raster_degenerate_zonotope(base, gens, frame)
                cells |= g
                continue
            for normal, offset in zh:
                scaled_hs.append((normal, Fraction(offset) / k))
            zlo, zhi = z.bbox()
            zbbox = (
                tuple(Fraction(x) / k for x in zlo),
                tuple(Fraction(x) / k for x in zhi),
            )
            cells |= rasterize_halfspaces(scaled_hs, zbbox, frame, gridmod.OUTER).cells
        kf = GridSet(frame, cells, gridmod.OUTER)
        values.append(hausdorff(kf, hull_raster).value)
    slack = float(spacing) * math.sqrt(d)
    exponent = float("nan")
    pos = [(k, v) for k, v in zip(ks, values) if v > 0]
    if len(pos) >= 2:
        xs = np.log([k for k, _ in pos])
        ys = np.log([v for _, v in pos])
        exponent = float(np.polyfit(xs, ys, 1)[0])
    return HausdorffConvergence(list(ks), values, slack, exponent)


def _raster_degenerate_zonotope(base, gens, frame):
    """Outer raster of a low-rank zonotope via its segment sweeps."""
    cells = np.zeros(frame.extents, dtype=bool)
    pts = [base]
    for g in gens:
        pts = pts + [tuple(p + x for p, x in zip(q, g)) for q in pts]
    start = pts[0]
    for p in pts:
        seg = gridmod.rasterize_segment(start, p, frame)
        cells |= seg.cells
    return cells

"""Conservative grid rasterization and certified volume bounds.

A GridSet is a boolean occupancy array over a frame with rational anchor
and spacing; cell i covers the closed box anchor + spacing * [i, i+1].
Modes record on which side a raster errs:

  outer -- occupied cells form a superset of the target set,
  inner -- every occupied cell lies entirely inside the target set,
  exact -- occupancy is exact with respect to the stated convention.

Dilation is pure index-sumset arithmetic ({i + j}): that is bit-exact and
associative, so iterated sums and binary doubling agree cell-for-cell.
Geometric covering corrections (a cell-sum covers a doubled cell) are the
caller's responsibility and are applied where bounds are derived.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.signal import fftconvolve

CELL_CAP_DEFAULT = 1 << 28

OUTER = "outer"
INNER = "inner"
EXACT = "exact"


class CellCapError(RuntimeError):
    """A raster or sum would exceed the configured cell budget."""


@dataclass(frozen=True)
class GridFrame:
    anchor: tuple
    spacing: Fraction
    extents: tuple

    def __post_init__(self):
        object.__setattr__(self, "anchor", tuple(Fraction(a) for a in self.anchor))
        object.__setattr__(self, "spacing", Fraction(self.spacing))
        object.__setattr__(self, "extents", tuple(int(e) for e in self.extents))
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if len(self.anchor) != len(self.extents):
            raise ValueError("anchor/extents dimension mismatch")
        if any(e < 1 for e in self.extents):
            raise ValueError("extents must be positive")

    @property
    def dim(self):
        return len(self.extents)

    def cell_count(self):
        n = 1
        for e in self.extents:
            n *= e
        return n

    def upper(self):
        return tuple(a + self.spacing * e for a, e in zip(self.anchor, self.extents))

    @staticmethod
    def covering(lo, hi, spacing, pad=1):
        """Smallest lattice-aligned frame containing the rational box [lo, hi]."""
        spacing = Fraction(spacing)
        anchor = []
        extents = []
        for a, b in zip(lo, hi):
            a, b = Fraction(a), Fraction(b)
            start = math.floor(a / spacing) - pad
            stop = math.ceil(b / spacing) + pad
            if stop <= start:
                stop = start + 1
            anchor.append(start * spacing)
            extents.append(stop - start)
        return GridFrame(tuple(anchor), spacing, tuple(extents))


class GridSet:
    def __init__(self, frame, cells, mode):
        if cells.shape != frame.extents:
            raise ValueError("cell array shape must match frame extents")
        if mode not in (OUTER, INNER, EXACT):
            raise ValueError("unknown raster mode %r" % mode)
        self.frame = frame
        self.cells = np.ascontiguousarray(cells, dtype=bool)
        self.mode = mode

    @property
    def dim(self):
        return self.frame.dim

    @property
    def spacing(self):
        return self.frame.spacing

    def count(self):
        return int(self.cells.sum())

    def volume(self):
        """Total volume of occupied cells, exact."""
        return self.count() * self.spacing ** self.dim

    def occupied_indices(self):
        return np.argwhere(self.cells)

    def __eq__(self, other):
        return (
            isinstance(other, GridSet)
            and self.frame == other.frame
            and np.array_equal(self.cells, other.cells)
        )


def volume(grid):
    return grid.volume()


def _check_cap(frame, cap):
    if frame.cell_count() > cap:
        raise CellCapError(
            "frame of %d cells exceeds cap %d" % (frame.cell_count(), cap)
        )


def _grid_coords(frame, point):
    return tuple((Fraction(p) - a) / frame.spacing for p, a in zip(point, frame.anchor))


def _touching_cells(frame, coords):
    """Cells touched by a single grid-coordinate point (ties give 2^d cells)."""
    ranges = []
    for c, e in zip(coords, frame.extents):
        if c < 0 or c > e:
            raise ValueError("point outside frame")
        f = math.floor(c)
        if c == f:
            opts = [v for v in (f - 1, f) if 0 <= v < e]
        else:
            opts = [min(f, e - 1)]
        ranges.append(opts)
    out = [()]
    for opts in ranges:
        out = [cell + (o,) for cell in out for o in opts]
    return out


def rasterize_segment(p, q, frame):
    """Supercover raster of the closed segment [p, q]: every touched cell.

    Boundary ties (the segment passing through a face, edge or corner)
    occupy all touching cells.  Exact rational parameter sweep.
    """
    cells = np.zeros(frame.extents, dtype=bool)
    a = _grid_coords(frame, p)
    b = _grid_coords(frame, q)
    delta = tuple(bb - aa for aa, bb in zip(a, b))
    ts = {Fraction(0), Fraction(1)}
    for ai, di in zip(a, delta):
        if di == 0:
            continue
        lo, hi = (ai, ai + di) if di > 0 else (ai + di, ai)
        for n in range(math.ceil(lo), math.floor(hi) + 1):
            t = (n - ai) / di
            if 0 <= t <= 1:
                ts.add(t)
    ts = sorted(ts)
    for t in ts:
        pt = tuple(ai + t * di for ai, di in zip(a, delta))
        for cell in _touching_cells(frame, pt):
            cells[cell] = True
    for t0, t1 in zip(ts, ts[1:]):
        mid = tuple(ai + (t0 + t1) / 2 * di for ai, di in zip(a, delta))
        cell = tuple(min(math.floor(c), e - 1) for c, e in zip(mid, frame.extents))
        cells[cell] = True
    return GridSet(frame, cells, OUTER)


def rasterize_spider(spider, frame):
    """Union of supercover rasters of all legs."""
    cells = np.zeros(frame.extents, dtype=bool)
    for tip in spider.tips:
        cells |= rasterize_segment(spider.apex, tip, frame).cells
    return GridSet(frame, cells, OUTER)


def _halfspace_threshold(frame, normal, offset):
    """Integer normal and inner/outer integer thresholds for one half-space.

    The constraint <n, x> <= c on points x = anchor + h*y becomes
    <N, y> <= R with integer N.  A cell i (the box y in i + [0,1]^d) has
    some point satisfying it iff dot(N, i) <= floor(R - negsum), and all
    points satisfying it iff dot(N, i) <= floor(R) - possum.
    """
    h = frame.spacing
    shifted = Fraction(offset) - sum(
        Fraction(n) * a for n, a in zip(normal, frame.anchor)
    )
    lcm = 1
    for n in normal:
        lcm = lcm * Fraction(n).denominator // math.gcd(lcm, Fraction(n).denominator)
    N = tuple(int(Fraction(n) * lcm) for n in normal)
    R = shifted * lcm / h
    negsum = sum(min(n, 0) for n in N)
    possum = sum(max(n, 0) for n in N)
    outer_thr = math.floor(R - negsum)
    inner_thr = math.floor(R) - possum
    # strict outer keeps only cells whose open box meets the open half-space:
    # touching cells carry no measure, so this stays a sound volume cover
    rn = R - negsum
    strict_thr = rn - 1 if rn.denominator == 1 else math.floor(rn)
    return N, outer_thr, inner_thr, int(strict_thr)


def _index_dot(normal, starts, shape):
    dot = np.zeros(shape, dtype=np.int64)
    for axis, (n, s) in enumerate(zip(normal, starts)):
        if n == 0:
            continue
        idx = np.arange(s, s + shape[axis], dtype=np.int64) * n
        view = [1] * len(shape)
        view[axis] = shape[axis]
        dot = dot + idx.reshape(view)
    return dot


def rasterize_halfspaces(halfspaces, bbox, frame, mode, strict=False):
    """Exact conservative raster of an H-polytope restricted to its bbox.

    outer: keeps cells whose closed box meets every facet half-space (a
    superset of the cells meeting the polytope).  inner: keeps cells whose
    box lies inside every half-space (all such cells are inside).  All
    tests are integer comparisons; no floats.

    strict=True sharpens the outer test to cells whose open box meets every
    open half-space.  That drops boundary-touching cells, which carry zero
    measure, so count * h^d remains a sound volume upper bound (it is no
    longer a superset of all touched cells).
    """
    h = frame.spacing
    starts = []
    stops = []
    for axis in range(frame.dim):
        lo = (Fraction(bbox[0][axis]) - frame.anchor[axis]) / h
        hi = (Fraction(bbox[1][axis]) - frame.anchor[axis]) / h
        s = max(math.floor(lo) - 1, 0)
        t = min(math.ceil(hi) + 1, frame.extents[axis])
        if t <= s:
            return GridSet(frame, np.zeros(frame.extents, dtype=bool), mode)
        starts.append(s)
        stops.append(t)
    shape = tuple(t - s for s, t in zip(starts, stops))
    keep = np.ones(shape, dtype=bool)
    for normal, offset in halfspaces:
        N, outer_thr, inner_thr, strict_thr = _halfspace_threshold(frame, normal, offset)
        dot = _index_dot(N, starts, shape)
        if mode == OUTER:
            thr = strict_thr if strict else outer_thr
        else:
            thr = inner_thr
        keep &= dot <= thr
        if not keep.any():
            break
    cells = np.zeros(frame.extents, dtype=bool)
    region = tuple(slice(s, t) for s, t in zip(starts, stops))
    cells[region] = keep
    return GridSet(frame, cells, mode)


def rasterize_convex(body, frame, mode, tol=None):
    """Raster a convex body given exact half-spaces or a support oracle.

    Bodies exposing ``halfspaces()`` (and ``bbox()``) use the exact integer
    facet tests.  Otherwise a support-oracle fallback marks a cell outer
    when its center is within half the cell diagonal (plus tol) of the
    body, and inner when all 2^d corners sit within tol of it.
    """
    hs = body.halfspaces() if hasattr(body, "halfspaces") else None
    if hs is not None:
        return rasterize_halfspaces(hs, body.bbox(), frame, mode)
    if mode == INNER and body.rank() < frame.dim:
        return GridSet(frame, np.zeros(frame.extents, dtype=bool), INNER)
    h = float(frame.spacing)
    if tol is None:
        tol = 1e-9 * h
    half_diag = 0.5 * h * math.sqrt(frame.dim)
    lo, hi = body.bbox()
    cells = np.zeros(frame.extents, dtype=bool)
    starts = [max(math.floor((Fraction(a) - an) / frame.spacing) - 1, 0)
              for a, an in zip(lo, frame.anchor)]
    stops = [min(math.ceil((Fraction(b) - an) / frame.spacing) + 1, e)
             for b, an, e in zip(hi, frame.anchor, frame.extents)]
    anchor_f = [float(a) for a in frame.anchor]
    support = body.support_float
    for idx in np.ndindex(*[t - s for s, t in zip(starts, stops)]):
        cell = tuple(s + i for s, i in zip(starts, idx))
        if mode == OUTER:
            center = np.array([a + (c + 0.5) * h for a, c in zip(anchor_f, cell)])
            from .geometry import gilbert_distance
            res = gilbert_distance(support, center, 0.25 * h)
            cells[cell] = res.lower <= half_diag + tol
        else:
            ok = True
            for corner in np.ndindex(*([2] * frame.dim)):
                pt = np.array(
                    [a + (c + o) * h for a, c, o in zip(anchor_f, cell, corner)]
                )
                from .geometry import gilbert_distance
                res = gilbert_distance(support, pt, 0.25 * h)
                if res.upper > tol:
                    ok = False
                    break
            cells[cell] = ok
    return GridSet(frame, cells, mode)


def _dilate_exact(a, b):
    out = np.zeros(tuple(x + y - 1 for x, y in zip(a.shape, b.shape)), dtype=bool)
    small, big = (a, b) if a.sum() <= b.sum() else (b, a)
    for idx in np.argwhere(small):
        region = tuple(slice(i, i + e) for i, e in zip(idx, big.shape))
        out[region] |= big
    return out


def _dilate_cells(a, b):
    # FFT convolution with a verified integrality margin; fall back to the
    # exact shifted-OR when round-off leaves any count ambiguous.
    if a.size * b.size <= 1 << 14:
        return _dilate_exact(a, b)
    conv = fftconvolve(a.astype(np.float64), b.astype(np.float64))
    frac = np.abs(conv - np.round(conv))
    if float(frac.max()) > 0.05:
        return _dilate_exact(a, b)
    return np.round(conv) >= 1.0


def dilate(a, b, cap=CELL_CAP_DEFAULT):
    """Index sumset of two grids: occupancy {i + j}, anchors added.

    Bit-exact and associative.  Mode combines as inner*inner -> inner
    (a sum of inner cells is inside the sum of the sets); any other
    combination yields outer occupancy of the index sumset -- note the
    geometric sum of two cell unions additionally covers a one-cell
    neighborhood, which callers account for where bounds are formed.
    """
    if a.spacing != b.spacing:
        raise ValueError("dilation requires equal spacing")
    if a.dim != b.dim:
        raise ValueError("dilation requires equal dimension")
    frame = GridFrame(
        tuple(x + y for x, y in zip(a.frame.anchor, b.frame.anchor)),
        a.spacing,
        tuple(x + y - 1 for x, y in zip(a.frame.extents, b.frame.extents)),
    )
    _check_cap(frame, cap)
    mode = INNER if a.mode == INNER and b.mode == INNER else OUTER
    return GridSet(frame, _dilate_cells(a.cells, b.cells), mode)


def self_sum(a, k, cap=CELL_CAP_DEFAULT):
    """k-fold index sumset via binary doubling; identical to iterating."""
    if k < 1:
        raise ValueError("summand count must be positive")
    result = None
    power = a
    bits = k
    while bits:
        if bits & 1:
            result = power if result is None else dilate(result, power, cap)
        bits >>= 1
        if bits:
            power = dilate(power, power, cap)
    return result


def boundary_cells(a):
    """Occupied cells with an unoccupied (or out-of-frame) face neighbor."""
    occ = a.cells
    interior = np.ones_like(occ)
    for axis in range(a.dim):
        lo = [slice(None)] * a.dim
        hi = [slice(None)] * a.dim
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        shifted = np.zeros_like(occ)
        shifted[tuple(lo)] = occ[tuple(hi)]
        shifted[tuple([slice(None)] * axis + [slice(-1, None)])] = False
        interior &= shifted
        shifted = np.zeros_like(occ)
        shifted[tuple(hi)] = occ[tuple(lo)]
        shifted[tuple([slice(None)] * axis + [slice(0, 1)])] = False
        interior &= shifted
    return GridSet(a.frame, occ & ~interior, a.mode)


_EDT_INF = np.int64(1) << 50


def _edt_1d_lines(dist):
    """Felzenszwalb lower-envelope pass along the last axis, int64 squared."""
    lines = dist.reshape(-1, dist.shape[-1])
    n = lines.shape[1]
    out = np.empty_like(lines)
    for row in range(lines.shape[0]):
        f = lines[row]
        sites = np.nonzero(f < _EDT_INF)[0]
        if sites.size == 0:
            out[row] = _EDT_INF
            continue
        v = np.empty(sites.size, dtype=np.int64)
        z = np.empty(sites.size + 1, dtype=np.float64)
        k = 0
        v[0] = sites[0]
        z[0] = -np.inf
        z[1] = np.inf
        for q in sites[1:]:
            while True:
                p = v[k]
                s = (float(f[q] + q * q) - float(f[p] + p * p)) / (2.0 * (q - p))
                if s <= z[k]:
                    k -= 1
                else:
                    break
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = np.inf
        k = 0
        o = out[row]
        for q in range(n):
            while z[k + 1] < q:
                k += 1
            p = v[k]
            o[q] = (q - p) * (q - p) + f[p]
    return out.reshape(dist.shape)


def distance_transform(a):
    """Exact squared distances between cell centers, in units of spacing^2.

    Returns an int64 array over the frame: entry i is the squared index
    distance from center i to the nearest occupied cell center (a large
    sentinel when the grid is empty).  Multiply by spacing**2 for squared
    Euclidean distances.
    """
    dist = np.where(a.cells, np.int64(0), _EDT_INF)
    for axis in range(a.dim):
        moved = np.moveaxis(dist, axis, -1)
        moved[...] = _edt_1d_lines(np.ascontiguousarray(moved))
    return dist


@dataclass
class HausdorffResult:
    value: float
    slack: float

    def __float__(self):
        return self.value


def _common_frame(a, b):
    if a.spacing != b.spacing:
        raise ValueError("hausdorff requires equal spacing")
    h = a.spacing
    for x, y in zip(a.frame.anchor, b.frame.anchor):
        if ((x - y) / h).denominator != 1:
            raise ValueError("anchors must be congruent modulo the spacing")
    anchor = tuple(min(x, y) for x, y in zip(a.frame.anchor, b.frame.anchor))
    upper = tuple(
        max(x, y) for x, y in zip(a.frame.upper(), b.frame.upper())
    )
    extents = tuple(int((u - l) / h) for l, u in zip(anchor, upper))
    frame = GridFrame(anchor, h, extents)

    def embed(g):
        cells = np.zeros(extents, dtype=bool)
        off = tuple(int((x - l) / h) for x, l in zip(g.frame.anchor, anchor))
        region = tuple(slice(o, o + e) for o, e in zip(off, g.frame.extents))
        cells[region] = g.cells
        return GridSet(frame, cells, g.mode)

    return embed(a), embed(b)


def hausdorff(a, b):
    """Hausdorff distance between occupied cell-center sets, with grid slack.

    The value is exact for the center sets; the true distance between the
    underlying sets differs by at most spacing * sqrt(d) each way, which is
    reported as ``slack``.
    """
    if a.count() == 0 or b.count() == 0:
        raise ValueError("hausdorff of an empty grid is undefined")
    ea, eb = _common_frame(a, b)
    h = float(a.spacing)
    da = distance_transform(ea)
    db = distance_transform(eb)
    d_ab = int(db[ea.cells].max()) if ea.count() else 0
    d_ba = int(da[eb.cells].max()) if eb.count() else 0
    value = h * math.sqrt(max(d_ab, d_ba))
    return HausdorffResult(value, h * math.sqrt(a.dim))


def kfold_volume_bounds(spider, k, spacing, cap=CELL_CAP_DEFAULT):
    """Certified bounds on vol((1/k) A[k]) for a spider A.

    Rasterizes each full-dimensional composition zonotope with the exact
    facet tests (outer and inner) on a grid of the given spacing; the
    unions give

        inner_count * h^d / k^d  <=  vol((1/k) A[k])  <=  outer_count * h^d / k^d.

    Lower-dimensional composition zonotopes have measure zero and are
    omitted from both sides.  Returns (lower, upper) as exact Fractions.
    """
    from .geometry import kfold_zonotopes

    d = spider.dim
    h = Fraction(spacing)
    zonos = [z for z in kfold_zonotopes(spider, k) if z.rank() == d]
    if not zonos:
        return Fraction(0), Fraction(0)
    los = [z.bbox()[0] for z in zonos]
    his = [z.bbox()[1] for z in zonos]
    lo = tuple(min(p[j] for p in los) for j in range(d))
    hi = tuple(max(p[j] for p in his) for j in range(d))
    frame = GridFrame.covering(lo, hi, h)
    _check_cap(frame, cap)
    outer = np.zeros(frame.extents, dtype=bool)
    inner = np.zeros(frame.extents, dtype=bool)
    for z in zonos:
        hs = z.halfspaces()
        outer |= rasterize_halfspaces(hs, z.bbox(), frame, OUTER, strict=True).cells
        inner |= rasterize_halfspaces(hs, z.bbox(), frame, INNER).cells
    scale = h**d / Fraction(k) ** d
    return int(inner.sum()) * scale, int(outer.sum()) * scale


_MAGIC = b"GSET1"


def to_bytes(a):
    """Serialize a GridSet.

    Layout (little-endian): magic "GSET1", u8 dim, u8 mode (0 outer /
    1 inner / 2 exact), spacing as i64 numerator + u64 denominator, then
    per axis u64 extent and anchor as i64 numerator + u64 denominator,
    then the occupancy bits packed C-order with numpy packbits.
    """
    mode_code = {OUTER: 0, INNER: 1, EXACT: 2}[a.mode]
    parts = [_MAGIC, struct.pack("<BB", a.dim, mode_code)]
    parts.append(struct.pack("<qQ", a.spacing.numerator, a.spacing.denominator))
    for e, an in zip(a.frame.extents, a.frame.anchor):
        parts.append(struct.pack("<QqQ", e, an.numerator, an.denominator))
    parts.append(np.packbits(a.cells.reshape(-1)).tobytes())
    return b"".join(parts)


def from_bytes(blob):
    if blob[: len(_MAGIC)] != _MAGIC:
        raise ValueError("bad magic")
    off = len(_MAGIC)
    dim, mode_code = struct.unpack_from("<BB", blob, off)
    off += 2
    num, den = struct.unpack_from("<qQ", blob, off)
    off += 16
    spacing = Fraction(num, den)
    extents = []
    anchor = []
    for _ in range(dim):
        e, an_num, an_den = struct.unpack_from("<QqQ", blob, off)
        off += 24
        extents.append(e)
        anchor.append(Fraction(an_num, an_den))
    frame = GridFrame(tuple(anchor), spacing, tuple(extents))
    n = frame.cell_count()
    bits = np.unpackbits(np.frombuffer(blob, dtype=np.uint8, offset=off))[:n]
    mode = {0: OUTER, 1: INNER, 2: EXACT}[mode_code]
    return GridSet(frame, bits.astype(bool).reshape(frame.extents), mode)

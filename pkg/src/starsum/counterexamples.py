"""Exact counterexample machinery: box unions, the block family that
breaks the three-set root-volume inequality, and the two measure checks
showing that k-fold volume monotonicity fails for non-uniform measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class AxisBox:
    """Closed axis-aligned box prod_i [lo_i, hi_i] with rational corners."""

    def __init__(self, lo, hi):
        self.lo = tuple(Fraction(x) for x in lo)
        self.hi = tuple(Fraction(x) for x in hi)
        if len(self.lo) != len(self.hi):
            raise ValueError("corner dimension mismatch")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box corners must satisfy lo <= hi")

    @property
    def dim(self):
        return len(self.lo)

    def volume(self):
        v = Fraction(1)
        for a, b in zip(self.lo, self.hi):
            v *= b - a
        return v

    def is_degenerate(self):
        return any(a == b for a, b in zip(self.lo, self.hi))

    def __add__(self, other):
        """Minkowski sum of boxes is the box of summed corners (exact)."""
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return AxisBox(
            tuple(a + b for a, b in zip(self.lo, other.lo)),
            tuple(a + b for a, b in zip(self.hi, other.hi)),
        )

    def __repr__(self):
        return "AxisBox(%s, %s)" % (self.lo, self.hi)


def box_union_volume(boxes):
    """Exact volume of a union of axis-aligned boxes.

    Coordinate compression: the boxes' corner coordinates cut space into a
    grid of elementary cells; a cell is covered iff it is covered by some
    box, and all cell volumes are exact rationals.
    """
    boxes = list(boxes)
    if not boxes:
        return Fraction(0)
    d = boxes[0].dim
    if any(b.dim != d for b in boxes):
        raise ValueError("boxes must share a dimension")
    boxes = [b for b in boxes if not b.is_degenerate()]
    if not boxes:
        return Fraction(0)
    cuts = []
    for j in range(d):
        vals = sorted({b.lo[j] for b in boxes} | {b.hi[j] for b in boxes})
        cuts.append(vals)
    shape = tuple(max(len(c) - 1, 0) for c in cuts)
    if any(s == 0 for s in shape):
        return Fraction(0)
    covered = np.zeros(shape, dtype=bool)
    index = [{v: i for i, v in enumerate(c)} for j, c in enumerate(cuts)]
    for b in boxes:
        region = tuple(
            slice(index[j][b.lo[j]], index[j][b.hi[j]]) for j in range(d)
        )
        covered[region] = True
    lengths = [
        [c[i + 1] - c[i] for i in range(len(c) - 1)] for c in cuts
    ]
    total = Fraction(0)
    for idx in np.argwhere(covered):
        v = Fraction(1)
        for j, i in enumerate(idx):
            v *= lengths[j][i]
        total += v
    return total


@dataclass(frozen=True)
class BlockFamily:
    """A1 = [0,1]^d1 x {0}^d2, A2 = {0}^d1 x [0,1]^d2,
    A3 = ([0,a]^d1 x {0}^d2) u ({0}^d1 x [0,b]^d2); all star-shaped at 0."""

    a: Fraction
    b: Fraction
    d1: int
    d2: int

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.a <= 0 or self.b <= 0:
            raise ValueError("block scales must be positive")
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("block dimensions must be positive")

    @property
    def dim(self):
        return self.d1 + self.d2

    def _block(self, first, second):
        lo = (0,) * self.dim
        hi = tuple([first] * self.d1 + [0] * self.d2)
        hi2 = tuple([0] * self.d1 + [second] * self.d2)
        return AxisBox(lo, hi), AxisBox(lo, hi2)

    def sets(self):
        """The three sets as lists of boxes (lower-dimensional blocks)."""
        one1, _ = self._block(1, 1)
        _, one2 = self._block(1, 1)
        a1, _ = self._block(self.a, 1)
        _, b2 = self._block(1, self.b)
        return [one1], [one2], [a1, b2]


def sum_of_box_unions(u, v):
    """Minkowski sum of two box unions, as a box union (exact)."""
    return [x + y for x in u for y in v]


def pairwise_sum_volumes(a, b=None, d1=None, d2=None):
    """(vol(A1+A2), vol(A1+A3), vol(A2+A3), vol(A1+A2+A3)), exact.

    Accepts either a BlockFamily or the four parameters (a, b, d1, d2).
    Computed from the box-union representations, not closed forms; tests
    compare against the closed forms 1, b^d2, a^d1 and
    (a+1)^d1 + (b+1)^d2 - 1.
    """
    fam = a if isinstance(a, BlockFamily) else BlockFamily(a, b, d1, d2)
    s1, s2, s3 = fam.sets()
    v12 = box_union_volume(sum_of_box_unions(s1, s2))
    v13 = box_union_volume(sum_of_box_unions(s1, s3))
    v23 = box_union_volume(sum_of_box_unions(s2, s3))
    v123 = box_union_volume(sum_of_box_unions(sum_of_box_unions(s1, s2), s3))
    return v12, v13, v23, v123


def _int_floor_root(n, d):
    """floor(n ** (1/d)) for non-negative integer n, exact (Newton)."""
    if n < 0:
        raise ValueError("negative radicand")
    if n == 0:
        return 0
    # start strictly above the root so Newton descends monotonically
    x = 1 << -(-n.bit_length() // d)
    while True:
        y = ((d - 1) * x + n // x ** (d - 1)) // d
        if y >= x:
            break
        x = y
    while x ** d > n:
        x -= 1
    return x


def nth_root_interval(value, d, digits=30):
    """Rational enclosure [lo, hi] of value ** (1/d), width <= 10^-digits."""
    value = Fraction(value)
    if value < 0:
        raise ValueError("negative radicand")
    s = 10**digits
    num = value.numerator * value.denominator ** (d - 1) * s**d
    r = _int_floor_root(num, d)
    den = value.denominator * s
    return Fraction(r, den), Fraction(r + 1, den)


@dataclass
class GapResult:
    value: float
    interval: tuple
    certified_negative: bool
    volumes: tuple


def conjecture2_gap(a=3, b=6, d1=4, d2=3, digits=30):
    """Certified sign of the three-set root-volume gap

        vol(A1+A2+A3)^(1/d) - (1/2) [vol(A1+A2)^(1/d)
            + vol(A1+A3)^(1/d) + vol(A2+A3)^(1/d)]

    for the block family.  Volumes are exact; the d-th roots are enclosed
    in rational intervals, so the sign of the reported gap is certified.
    """
    d = d1 + d2
    v12, v13, v23, v123 = pairwise_sum_volumes(a, b, d1, d2)
    lo123, hi123 = nth_root_interval(v123, d, digits)
    lo12, hi12 = nth_root_interval(v12, d, digits)
    lo13, hi13 = nth_root_interval(v13, d, digits)
    lo23, hi23 = nth_root_interval(v23, d, digits)
    gap_lo = lo123 - (hi12 + hi13 + hi23) / 2
    gap_hi = hi123 - (lo12 + lo13 + lo23) / 2
    return GapResult(
        value=float((gap_lo + gap_hi) / 2),
        interval=(gap_lo, gap_hi),
        certified_negative=gap_hi < 0,
        volumes=(v12, v13, v23, v123),
    )


def _staircase_slab_measure(d, m):
    """Exact vol({x in [0, 1/d]^d : sum_i ceil(m x_i) <= m}).

    Splitting each axis by the value of ceil(m x_i) = c_i >= 1 gives
    intervals ((c_i-1)/m, min(c_i/m, 1/d)]; sum the products over all
    positive integer vectors with sum at most m.
    """
    top = Fraction(1, d)
    lengths = []
    c = 1
    while Fraction(c - 1, m) < top:
        lengths.append(min(Fraction(c, m), top) - Fraction(c - 1, m))
        c += 1
    total = Fraction(0)
    stack = [(0, m, Fraction(1))]
    while stack:
        axis, budget, weight = stack.pop()
        if axis == d:
            total += weight
            continue
        for ci in range(1, min(len(lengths), budget - (d - 1 - axis)) + 1):
            stack.append((axis + 1, budget - ci, weight * lengths[ci - 1]))
    return total


@dataclass
class CubeMeasureReport:
    d: int
    k: int
    index_full: int
    index_next: int
    measure_full: Fraction
    measure_next: Fraction
    cube_volume: Fraction
    equality_holds: bool
    strict_drop: bool


def cube_measure_check(d, k):
    """Monotonicity failure for mu(K) = vol(K intersect [-1/d, 1/d]^d).

    With S the union of the d unit axis segments, the averaged m-fold sum
    (1/m) S[m] contains the whole corner cube [0, 1/d]^d exactly when d
    divides m, giving mu = vol(C) / 2^d at m = d*k, while the next index
    m = d*k + 1 gives a strictly smaller measure.  (For d = 2 these are
    exactly the even/odd indices 2k and 2k+1.)  All volumes exact.
    """
    if d < 2 or k < 1:
        raise ValueError("need d >= 2 and k >= 1")
    m_full = d * k
    m_next = m_full + 1
    mu_full = _staircase_slab_measure(d, m_full)
    mu_next = _staircase_slab_measure(d, m_next)
    cube_volume = Fraction(2, d) ** d
    return CubeMeasureReport(
        d=d,
        k=k,
        index_full=m_full,
        index_next=m_next,
        measure_full=mu_full,
        measure_next=mu_next,
        cube_volume=cube_volume,
        equality_holds=mu_full == cube_volume / 2**d,
        strict_drop=mu_next < mu_full,
    )


@dataclass
class EllipseMeasureReport:
    k: int
    resolution: int
    semi_axes_squared: tuple
    ratio_k: float
    ratio_next: float
    interior_point_strictly_inside: bool


def _ceil_ratio(num, den):
    return -((-num) // den)


def ellipse_measure_check(k, resolution=2048):
    """Rotation-invariant planar measure that breaks k-fold monotonicity.

    S is the two-segment spider [o,e1] u [o,e2]; E is the axis-aligned
    ellipse through (1-1/k, 0) and (1-2/k, 1/k).  Then
    vol((1/k) S[k] n E) = vol(E)/4, while the boundary point
    (1-2/(k+1), 1/(k+1)) of (1/(k+1)) S[k+1] lies strictly inside E, so
    the next index covers strictly less of E near that point.

    Ratios are evaluated on a resolution x resolution grid of cell
    centers over the first-quadrant bounding box of E; every center test
    (ellipse and staircase membership) is exact integer arithmetic.
    """
    if k < 2:
        raise ValueError("need k >= 2")
    p2 = Fraction(k - 1, k) ** 2
    x2 = Fraction(k - 2, k) ** 2
    denom = 1 - x2 / p2
    if denom <= 0:
        raise ValueError("degenerate defining points for the ellipse")
    q2 = Fraction(1, k * k) / denom
    # exact interior test of (1 - 2/(k+1), 1/(k+1))
    px = Fraction(k - 1, k + 1)
    py = Fraction(1, k + 1)
    inside = px**2 / p2 + py**2 / q2 < 1

    R = int(resolution)
    ii = np.arange(R, dtype=object)
    odd = 2 * ii + 1  # center offsets: x = p*(2i+1)/(2R), y = q*(2j+1)/(2R)
    # ellipse test is scale-free: (2i+1)^2 + (2j+1)^2 <= (2R)^2
    ox = np.array(odd, dtype=np.int64)
    in_e = (ox[:, None] ** 2 + ox[None, :] ** 2) <= (2 * R) ** 2

    def staircase_counts(m):
        # ceil(m * x) with x = p*(2i+1)/(2R): exact integer ceil division
        cx = np.array(
            [_ceil_ratio(m * (k - 1) * (2 * i + 1), 2 * R * k) for i in range(R)],
            dtype=np.int64,
        )
        # ceil(m * y) with y = sqrt(q2)*(2j+1)/(2R): smallest c with
        # (2Rc)^2 >= m^2 q2 (2j+1)^2, solved with integer square roots
        cy = np.empty(R, dtype=np.int64)
        qn, qd = q2.numerator, q2.denominator
        for j in range(R):
            t2 = m * m * qn * (2 * j + 1) ** 2
            den = 4 * R * R * qd
            c = int(math.isqrt(t2 // den))
            while c * c * den < t2:
                c += 1
            cy[j] = c
        return cx, cy

    def ratio(m):
        cx, cy = staircase_counts(m)
        ok = (cx[:, None] + cy[None, :]) <= m
        count = int(np.count_nonzero(ok & in_e))
        return count / (math.pi * R * R)

    return EllipseMeasureReport(
        k=k,
        resolution=R,
        semi_axes_squared=(p2, q2),
        ratio_k=ratio(k),
        ratio_next=ratio(k + 1),
        interior_point_strictly_inside=bool(inside),
    )

"""Star-shaped spiders, composition zonotopes and support-oracle distances.

A *spider* is a union of segments from a common apex to a finite tip set.
Its k-fold Minkowski sum decomposes into zonotopes, one per composition
(t_1, ..., t_m) of k: summing t_i points from segment i yields

    k * apex + sum_i [0, t_i * (tip_i - apex)].

Rational data (apices, tips, supports) is kept exact with Fractions; the
iterative distance solver works in floats and always returns a certified
lower/upper bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .combinatorics import enumerate_layer

INSIDE = "inside"
OUTSIDE = "outside"
BOUNDARY_BAND = "boundary-band"


def as_point(seq):
    """Coerce a coordinate sequence to a tuple of Fractions."""
    return tuple(Fraction(x) for x in seq)


def _rank_rational(rows):
    """Exact rank of a list of rational vectors via fraction-free elimination."""
    m = [list(r) for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for col in range(cols):
        pivot = None
        for r in range(rank, len(m)):
            if m[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        pv = m[rank][col]
        for r in range(rank + 1, len(m)):
            if m[r][col] != 0:
                f = m[r][col] / pv
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


class Spider:
    """Union of segments joining ``apex`` to each point of ``tips``."""

    def __init__(self, apex, tips):
        self.apex = as_point(apex)
        self.tips = tuple(as_point(t) for t in tips)
        if not self.tips:
            raise ValueError("spider needs at least one tip")
        d = len(self.apex)
        if any(len(t) != d for t in self.tips):
            raise ValueError("apex and tips must share a dimension")
        if any(t == self.apex for t in self.tips):
            raise ValueError("tips must differ from the apex")

    @property
    def dim(self):
        return len(self.apex)

    def legs(self):
        """Leg vectors tip - apex, exact."""
        return [tuple(t - a for t, a in zip(tip, self.apex)) for tip in self.tips]

    def rank(self):
        return _rank_rational(self.legs())

    def diameter(self):
        """Largest pairwise distance among apex and tips (float)."""
        pts = [self.apex] + list(self.tips)
        best = 0.0
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                best = max(
                    best,
                    math.sqrt(sum(float(a - b) ** 2 for a, b in zip(pts[i], pts[j]))),
                )
        return best

    def essential_tips(self):
        """Tips not contained in another leg's segment.

        A tip q is redundant when its leg is a non-negative multiple
        (of factor <= 1) of another leg: the segment to q then lies inside
        the longer segment and removing it leaves the set unchanged.
        """
        legs = self.legs()
        keep = []
        for i, g in enumerate(legs):
            dominated = False
            for j, h in enumerate(legs):
                if i == j:
                    continue
                # g = c * h with 0 < c <= 1 (c == 1 only for the earlier copy)
                nz = next((t for t in range(len(h)) if h[t] != 0), None)
                if nz is None or h[nz] == 0:
                    continue
                c = g[nz] / h[nz]
                if c <= 0:
                    continue
                if all(gk == c * hk for gk, hk in zip(g, h)):
                    if c < 1 or (c == 1 and j < i):
                        dominated = True
                        break
            if not dominated:
                keep.append(self.tips[i])
        return tuple(keep)


def compositions(k, m):
    """All m-tuples of non-negative integers summing to k (lexicographic)."""
    return enumerate_layer(m, k)


def _primitive(ints):
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    if g == 0:
        return None
    ints = tuple(v // g for v in ints)
    for v in ints:
        if v != 0:
            return ints if v > 0 else tuple(-w for w in ints)
    return None


def _clear_denominators(vec):
    """Scale a rational vector to a primitive integer vector."""
    lcm = 1
    for v in vec:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    return _primitive(tuple(int(v * lcm) for v in vec))


class Zonotope:
    """base + sum_i [0, g_i] with rational base and generators."""

    def __init__(self, base, generators):
        self.base = as_point(base)
        self.generators = tuple(as_point(g) for g in generators)
        d = len(self.base)
        if any(len(g) != d for g in self.generators):
            raise ValueError("generator dimension mismatch")

    @property
    def dim(self):
        return len(self.base)

    def rank(self):
        if not self.generators:
            return 0
        return _rank_rational(self.generators)

    def support(self, u):
        """Support value and a witness point, exact for rational directions.

        Ties are broken toward excluding the generator, so the witness is a
        vertex whenever u is not normal to any generator.
        """
        if all(v == 0 for v in u):
            raise ValueError("support direction must be non-zero")
        u = tuple(Fraction(x) for x in u)
        point = list(self.base)
        for g in self.generators:
            if sum(a * b for a, b in zip(g, u)) > 0:
                point = [p + a for p, a in zip(point, g)]
        value = sum(p * a for p, a in zip(point, u))
        return value, tuple(point)

    def support_float(self, u):
        """Float support witness for the iterative distance solver."""
        b = np.array([float(x) for x in self.base])
        for g in self.generators:
            gf = np.array([float(x) for x in g])
            if float(np.dot(gf, u)) > 0.0:
                b = b + gf
        return b

    def bbox(self):
        """Exact axis-aligned bounding box as (lo, hi) Fraction tuples."""
        lo = list(self.base)
        hi = list(self.base)
        for g in self.generators:
            for j, v in enumerate(g):
                if v < 0:
                    lo[j] += v
                else:
                    hi[j] += v
        return tuple(lo), tuple(hi)

    def halfspaces(self):
        """Exact facet half-spaces for full-dimensional zonotopes, d <= 3.

        Returns a list of (normal, offset) with integer primitive normal n
        and rational offset c meaning <n, x> <= c.  Returns None when the
        zonotope is lower-dimensional (no interior) or d > 3.
        """
        d = self.dim
        if d > 3 or self.rank() < d:
            return None
        normals = set()
        if d == 1:
            normals.add((1,))
        elif d == 2:
            for g in self.generators:
                n = _clear_denominators((-g[1], g[0]))
                if n is not None:
                    normals.add(n)
        else:
            gens = self.generators
            for i in range(len(gens)):
                for j in range(i + 1, len(gens)):
                    a, b = gens[i], gens[j]
                    cross = (
                        a[1] * b[2] - a[2] * b[1],
                        a[2] * b[0] - a[0] * b[2],
                        a[0] * b[1] - a[1] * b[0],
                    )
                    n = _clear_denominators(cross)
                    if n is not None:
                        normals.add(n)
        out = []
        for n in normals:
            for sign in (1, -1):
                direction = tuple(sign * v for v in n)
                value, _ = self.support(direction)
                out.append((direction, value))
        return out


def zonotope_from_composition(spider, comp):
    """Zonotope of the k-fold sum restricted to one tip-multiplicity pattern."""
    if len(comp) != len(spider.tips):
        raise ValueError("composition length must match tip count")
    k = sum(comp)
    base = tuple(k * a for a in spider.apex)
    gens = []
    for t, leg in zip(comp, spider.legs()):
        if t > 0:
            gens.append(tuple(t * v for v in leg))
    return Zonotope(base, gens)


def kfold_zonotopes(spider, k):
    """All composition zonotopes of the k-fold Minkowski sum."""
    return [zonotope_from_composition(spider, c) for c in compositions(k, len(spider.tips))]


class NonconvergenceError(RuntimeError):
    """Distance iteration hit its cap; carries the best bracket found."""

    def __init__(self, lower, upper, witness):
        super().__init__(
            "distance solver did not reach tolerance: bracket [%g, %g]" % (lower, upper)
        )
        self.lower = lower
        self.upper = upper
        self.witness = witness


@dataclass
class DistanceResult:
    lower: float
    upper: float
    witness: np.ndarray
    iterations: int


def _project_onto_hull(q, pts):
    """Project q onto conv(pts): min-norm active-set iteration.

    pts is a small list of points (the solver keeps at most dim+2 of them
    alive).  Returns (x, coeffs) with coeffs the convex weights over pts.
    """
    P = np.stack([np.asarray(p, dtype=float) for p in pts])
    n = len(P)
    scale = max(1.0, float(np.abs(P).max()), float(np.abs(q).max()))
    start = int(np.argmin(((P - q) ** 2).sum(axis=1)))
    active = [start]
    weights = [1.0]

    def affine_min(idx):
        # minimize |q - S a| with sum(a) = 1 over points idx (KKT system)
        S = P[idx]
        k = len(idx)
        A = np.zeros((k + 1, k + 1))
        A[:k, :k] = 2.0 * (S @ S.T)
        A[:k, k] = 1.0
        A[k, :k] = 1.0
        rhs = np.zeros(k + 1)
        rhs[:k] = 2.0 * (S @ q)
        rhs[k] = 1.0
        try:
            sol = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        return sol[:k]

    x = P[start].copy()
    for _ in range(8 * (n + 2)):
        # grow: most violating point of the optimality condition
        vals = (P - x) @ (q - x)
        j = int(np.argmax(vals))
        if vals[j] <= 1e-12 * scale * scale or j in active:
            if vals[j] <= 1e-12 * scale * scale:
                break
        if j not in active:
            active.append(j)
            weights.append(0.0)
        # shrink: affine minimizer, clipped back to the simplex face
        for _ in range(len(P) + 4):
            alpha = affine_min(active)
            if np.all(alpha > -1e-13):
                weights = [max(a, 0.0) for a in alpha]
                break
            cur = np.array(weights)
            diff = alpha - cur
            theta = 1.0
            for pos, dz in enumerate(diff):
                if dz < -1e-16:
                    theta = min(theta, -cur[pos] / dz)
            cur = cur + theta * diff
            keep = [pos for pos, c in enumerate(cur) if c > 1e-14]
            if not keep:
                keep = [int(np.argmax(cur))]
            active = [active[pos] for pos in keep]
            weights = [cur[pos] for pos in keep]
        total = sum(weights) or 1.0
        x = (np.array(weights) / total) @ P[active]
    lam = {i: w for i, w in zip(active, weights) if w > 1e-15} or {active[0]: 1.0}
    return x, lam


def gilbert_distance(support, q, tol, max_iter=None):
    """Certified distance from point q to a compact convex body.

    ``support`` maps a direction (ndarray) to a support witness point of
    the body.  Iterates support steps with exact projection onto the hull
    of collected witnesses; stops when the duality gap certifies
    upper - lower <= tol.  Raises NonconvergenceError past the iteration
    cap (10 * ceil(1/tol) by default), carrying the best bracket.
    """
    q = np.asarray(q, dtype=float)
    if max_iter is None:
        max_iter = min(10 * math.ceil(1.0 / tol), 100000) if tol > 0 else 100000
        max_iter = max(max_iter, 64)
    start = support(-q if np.any(q) else np.ones_like(q))
    pts = [np.asarray(start, dtype=float)]
    x = pts[0].copy()
    best_lower = 0.0
    scale = max(1.0, float(np.linalg.norm(x)), float(np.linalg.norm(q)))
    for it in range(1, max_iter + 1):
        u = q - x
        un = float(np.linalg.norm(u))
        if un <= max(tol, 1e-14 * scale):
            return DistanceResult(best_lower, un, x, it)
        s = np.asarray(support(u), dtype=float)
        # supporting half-space bound: dist >= (<q,u> - h(u)) / |u|
        lower = (float(np.dot(q, u)) - float(np.dot(s, u))) / un
        best_lower = max(best_lower, lower, 0.0)
        if un - best_lower <= tol:
            return DistanceResult(best_lower, un, x, it)
        progress = float(np.dot(s - x, u))
        if progress <= 1e-13 * scale * un:
            # no support point improves on x: x is the metric projection up
            # to round-off, so close the bracket at float precision
            best_lower = max(best_lower, un * (1.0 - 1e-10))
            return DistanceResult(best_lower, un, x, it)
        pts.append(s)
        x, lam = _project_onto_hull(q, pts)
        pts = [pts[i] for i in sorted(lam)]
    raise NonconvergenceError(best_lower, float(np.linalg.norm(q - x)), x)


def membership_kfold(spider, k, point, tol=None):
    """Classify point against (1/k) A[k] for a spider A.

    Returns "inside", "outside" or "boundary-band" (distance bracket
    straddles the tolerance).  Default tolerance is 1e-9 * diameter(A).
    """
    if tol is None:
        tol = 1e-9 * max(spider.diameter(), 1.0)
    target = np.array([float(Fraction(x)) * k for x in point])
    ktol = tol * k
    best_lower = math.inf
    for z in kfold_zonotopes(spider, k):
        lo, hi = z.bbox()
        margin = 0.0
        for t, a, b in zip(target, lo, hi):
            margin = max(margin, float(a) - t, t - float(b))
        if margin > ktol:
            best_lower = min(best_lower, margin)
            continue
        res = gilbert_distance(z.support_float, target, ktol)
        if res.upper <= ktol:
            return INSIDE
        best_lower = min(best_lower, res.lower)
    return OUTSIDE if best_lower > ktol else BOUNDARY_BAND


def hull_membership(points, point, tol=1e-9):
    """Classify point against the convex hull of a finite point set."""
    arr = np.array([[float(Fraction(x)) for x in p] for p in points])

    def support(u):
        return arr[int(np.argmax(arr @ u))]

    res = gilbert_distance(support, np.array([float(Fraction(x)) for x in point]), tol)
    if res.upper <= tol:
        return INSIDE
    if res.lower > tol:
        return OUTSIDE
    return BOUNDARY_BAND

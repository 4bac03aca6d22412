"""Declarative set specifications and their JSON (de)serialization.

A spec document is {"dim": int, "kind": ..., kind-specific fields}; all
coordinates are rationals serialized as "num/den" strings (plain integers
allowed).  parse errors carry the document path of the offending field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .geometry import Spider, _rank_rational
from .counterexamples import AxisBox


class SpecError(ValueError):
    """Located parse/validation error."""

    def __init__(self, path, reason):
        super().__init__("%s: %s" % (path, reason))
        self.path = path
        self.reason = reason


def parse_rational(value, path):
    if isinstance(value, bool):
        raise SpecError(path, "expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as e:
            raise SpecError(path, "bad rational %r (%s)" % (value, e))
    raise SpecError(path, "expected int or 'num/den' string, got %r" % (value,))


def format_rational(x):
    x = Fraction(x)
    if x.denominator == 1:
        return int(x)
    return "%d/%d" % (x.numerator, x.denominator)


def _parse_point(doc, dim, path):
    if not isinstance(doc, (list, tuple)):
        raise SpecError(path, "expected a coordinate list")
    if len(doc) != dim:
        raise SpecError(path, "expected %d coordinates, got %d" % (dim, len(doc)))
    return tuple(parse_rational(v, "%s[%d]" % (path, i)) for i, v in enumerate(doc))


@dataclass(frozen=True)
class SpiderSpec:
    dim: int
    apex: tuple
    tips: tuple
    kind = "spider"


@dataclass(frozen=True)
class HullSpec:
    dim: int
    points: tuple
    kind = "hull"


@dataclass(frozen=True)
class BoxUnionSpec:
    dim: int
    boxes: tuple  # of (lo, hi) tuples
    kind = "box-union"


@dataclass(frozen=True)
class PlanarHolesSpec:
    dim: int
    outer: tuple  # CCW convex polygon vertices
    bites: tuple  # tuple of polygons
    kind = "planar-holes"


@dataclass(frozen=True)
class AffineSpec:
    dim: int
    matrix: tuple  # rows
    translation: tuple
    inner: object
    kind = "affine"

    def determinant(self):
        m = [list(r) for r in self.matrix]
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


def parse_spec(doc, path="$"):
    """Validate a spec document into a typed SetSpec."""
    if not isinstance(doc, dict):
        raise SpecError(path, "spec document must be an object")
    kind = doc.get("kind")
    dim = doc.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise SpecError(path + ".dim", "dim must be a positive integer")
    if kind == "spider":
        apex = _parse_point(doc.get("apex"), dim, path + ".apex")
        tips_doc = doc.get("tips")
        if not isinstance(tips_doc, list) or not tips_doc:
            raise SpecError(path + ".tips", "expected a non-empty list of tips")
        tips = tuple(
            _parse_point(t, dim, "%s.tips[%d]" % (path, i))
            for i, t in enumerate(tips_doc)
        )
        for i, t in enumerate(tips):
            if t == apex:
                raise SpecError("%s.tips[%d]" % (path, i), "tip equals apex")
        return SpiderSpec(dim, apex, tips)
    if kind == "hull":
        pts_doc = doc.get("points")
        if not isinstance(pts_doc, list) or not pts_doc:
            raise SpecError(path + ".points", "expected a non-empty point list")
        points = tuple(
            _parse_point(p, dim, "%s.points[%d]" % (path, i))
            for i, p in enumerate(pts_doc)
        )
        return HullSpec(dim, points)
    if kind == "box-union":
        boxes_doc = doc.get("boxes")
        if not isinstance(boxes_doc, list) or not boxes_doc:
            raise SpecError(path + ".boxes", "expected a non-empty box list")
        boxes = []
        for i, b in enumerate(boxes_doc):
            bp = "%s.boxes[%d]" % (path, i)
            if not isinstance(b, dict):
                raise SpecError(bp, "box must be an object with lo/hi")
            lo = _parse_point(b.get("lo"), dim, bp + ".lo")
            hi = _parse_point(b.get("hi"), dim, bp + ".hi")
            if any(a > c for a, c in zip(lo, hi)):
                raise SpecError(bp, "box corners must satisfy lo <= hi")
            boxes.append((lo, hi))
        return BoxUnionSpec(dim, tuple(boxes))
    if kind == "planar-holes":
        if dim != 2:
            raise SpecError(path + ".dim", "planar-holes requires dim = 2")
        outer_doc = doc.get("outer")
        if not isinstance(outer_doc, list) or len(outer_doc) < 3:
            raise SpecError(path + ".outer", "expected a polygon (>= 3 vertices)")
        outer = tuple(
            _parse_point(p, 2, "%s.outer[%d]" % (path, i))
            for i, p in enumerate(outer_doc)
        )
        bites = []
        for i, poly in enumerate(doc.get("bites", [])):
            bp = "%s.bites[%d]" % (path, i)
            if not isinstance(poly, list) or len(poly) < 3:
                raise SpecError(bp, "expected a polygon (>= 3 vertices)")
            bites.append(
                tuple(_parse_point(p, 2, "%s[%d]" % (bp, j)) for j, p in enumerate(poly))
            )
        return PlanarHolesSpec(2, outer, tuple(bites))
    if kind == "affine":
        mat_doc = doc.get("matrix")
        if not isinstance(mat_doc, list) or len(mat_doc) != dim:
            raise SpecError(path + ".matrix", "expected %d matrix rows" % dim)
        matrix = tuple(
            _parse_point(r, dim, "%s.matrix[%d]" % (path, i))
            for i, r in enumerate(mat_doc)
        )
        translation = _parse_point(
            doc.get("translation", [0] * dim), dim, path + ".translation"
        )
        inner = parse_spec(doc.get("of"), path + ".of")
        if inner.dim != dim:
            raise SpecError(path + ".of", "inner spec dimension mismatch")
        return AffineSpec(dim, matrix, translation, inner)
    raise SpecError(path + ".kind", "unknown kind %r" % (kind,))


def serialize(spec):
    """Inverse of parse_spec: a JSON-ready document."""
    if isinstance(spec, SpiderSpec):
        return {
            "dim": spec.dim,
            "kind": "spider",
            "apex": [format_rational(x) for x in spec.apex],
            "tips": [[format_rational(x) for x in t] for t in spec.tips],
        }
    if isinstance(spec, HullSpec):
        return {
            "dim": spec.dim,
            "kind": "hull",
            "points": [[format_rational(x) for x in p] for p in spec.points],
        }
    if isinstance(spec, BoxUnionSpec):
        return {
            "dim": spec.dim,
            "kind": "box-union",
            "boxes": [
                {
                    "lo": [format_rational(x) for x in lo],
                    "hi": [format_rational(x) for x in hi],
                }
                for lo, hi in spec.boxes
            ],
        }
    if isinstance(spec, PlanarHolesSpec):
        return {
            "dim": 2,
            "kind": "planar-holes",
            "outer": [[format_rational(x) for x in p] for p in spec.outer],
            "bites": [
                [[format_rational(x) for x in p] for p in poly] for poly in spec.bites
            ],
        }
    if isinstance(spec, AffineSpec):
        return {
            "dim": spec.dim,
            "kind": "affine",
            "matrix": [[format_rational(x) for x in r] for r in spec.matrix],
            "translation": [format_rational(x) for x in spec.translation],
            "of": serialize(spec.inner),
        }
    raise TypeError("not a SetSpec: %r" % (spec,))


def _affine_point(matrix, translation, p):
    return tuple(
        sum(m * x for m, x in zip(row, p)) + t for row, t in zip(matrix, translation)
    )


def materialize(spec, require_invertible=False):
    """Resolve affine wrappers to a concrete base spec.

    Affine images of spiders and hulls stay in kind; box unions only admit
    monomial (scaled-permutation) matrices, since a general linear image of
    a box is not a box.  With require_invertible=True a zero determinant is
    rejected (volume audits need a non-collapsing map).
    """
    if not isinstance(spec, AffineSpec):
        return spec
    det = spec.determinant()
    if require_invertible and det == 0:
        raise SpecError("$", "affine map is singular; audits need an invertible map")
    inner = materialize(spec.inner, require_invertible)
    f = lambda p: _affine_point(spec.matrix, spec.translation, p)
    if isinstance(inner, SpiderSpec):
        return SpiderSpec(spec.dim, f(inner.apex), tuple(f(t) for t in inner.tips))
    if isinstance(inner, HullSpec):
        return HullSpec(spec.dim, tuple(f(p) for p in inner.points))
    if isinstance(inner, PlanarHolesSpec):
        return PlanarHolesSpec(
            2,
            tuple(f(p) for p in inner.outer),
            tuple(tuple(f(p) for p in poly) for poly in inner.bites),
        )
    if isinstance(inner, BoxUnionSpec):
        # monomial matrix: exactly one non-zero per row and column
        for i, row in enumerate(spec.matrix):
            if sum(1 for v in row if v != 0) != 1:
                raise SpecError(
                    "$.matrix[%d]" % i,
                    "box unions only support scaled-permutation affine maps",
                )
        boxes = []
        for lo, hi in inner.boxes:
            a = f(lo)
            b = f(hi)
            boxes.append(
                (
                    tuple(min(x, y) for x, y in zip(a, b)),
                    tuple(max(x, y) for x, y in zip(a, b)),
                )
            )
        return BoxUnionSpec(spec.dim, tuple(boxes))
    raise SpecError("$", "cannot materialize affine over %r" % inner.kind)


def spec_spider(spec):
    """Spider object for a spider spec."""
    return Spider(spec.apex, spec.tips)


def spec_boxes(spec):
    return [AxisBox(lo, hi) for lo, hi in spec.boxes]


def affine_rank(points):
    base = points[0]
    return _rank_rational([tuple(a - b for a, b in zip(p, base)) for p in points[1:]]) if len(points) > 1 else 0

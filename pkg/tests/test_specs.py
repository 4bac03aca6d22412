from fractions import Fraction

import pytest

from starsum.specs import (
    AffineSpec,
    BoxUnionSpec,
    HullSpec,
    PlanarHolesSpec,
    SpecError,
    SpiderSpec,
    materialize,
    parse_rational,
    parse_spec,
    serialize,
)


SPIDER_DOC = {
    "dim": 2,
    "kind": "spider",
    "apex": [0, 0],
    "tips": [[1, 0], ["1/2", "1/2"], [0, 1]],
}


def test_parse_rational():
    assert parse_rational(3, "$") == 3
    assert parse_rational("2/7", "$") == Fraction(2, 7)
    assert parse_rational("-5", "$") == -5
    with pytest.raises(SpecError):
        parse_rational(True, "$")
    with pytest.raises(SpecError):
        parse_rational(1.5, "$")
    with pytest.raises(SpecError):
        parse_rational("a/b", "$")


def test_spider_round_trip():
    spec = parse_spec(SPIDER_DOC)
    assert isinstance(spec, SpiderSpec)
    assert spec.tips[1] == (Fraction(1, 2), Fraction(1, 2))
    assert parse_spec(serialize(spec)) == spec


def test_hull_round_trip():
    doc = {"dim": 3, "kind": "hull", "points": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]}
    spec = parse_spec(doc)
    assert isinstance(spec, HullSpec)
    assert parse_spec(serialize(spec)) == spec


def test_box_union_round_trip():
    doc = {
        "dim": 2,
        "kind": "box-union",
        "boxes": [
            {"lo": [0, 0], "hi": [1, 1]},
            {"lo": ["1/2", 0], "hi": ["3/2", "1/3"]},
        ],
    }
    spec = parse_spec(doc)
    assert isinstance(spec, BoxUnionSpec)
    assert parse_spec(serialize(spec)) == spec


def test_planar_holes_round_trip():
    doc = {
        "dim": 2,
        "kind": "planar-holes",
        "outer": [[0, 0], [2, 0], [2, 2], [0, 2]],
        "bites": [[["1/2", "1/2"], [1, "1/2"], [1, 1]]],
    }
    spec = parse_spec(doc)
    assert isinstance(spec, PlanarHolesSpec)
    assert parse_spec(serialize(spec)) == spec


def test_affine_round_trip_and_materialize():
    doc = {
        "dim": 2,
        "kind": "affine",
        "matrix": [[2, 0], [0, 1]],
        "translation": [1, 0],
        "of": SPIDER_DOC,
    }
    spec = parse_spec(doc)
    assert isinstance(spec, AffineSpec)
    assert parse_spec(serialize(spec)) == spec
    base = materialize(spec)
    assert isinstance(base, SpiderSpec)
    assert base.apex == (1, 0)
    assert base.tips[0] == (3, 0)


def test_located_errors():
    with pytest.raises(SpecError) as e:
        parse_spec({"dim": 2, "kind": "spider", "apex": [0, 0], "tips": [[1, 0], [1]]})
    assert ".tips[1]" in str(e.value)
    with pytest.raises(SpecError) as e:
        parse_spec({"dim": 0, "kind": "hull", "points": [[0]]})
    assert ".dim" in str(e.value)
    with pytest.raises(SpecError) as e:
        parse_spec({"dim": 2, "kind": "box-union", "boxes": [{"lo": [1, 0], "hi": [0, 0]}]})
    assert ".boxes[0]" in str(e.value)
    with pytest.raises(SpecError) as e:
        parse_spec({"dim": 3, "kind": "planar-holes", "outer": [[0, 0]] * 4})
    assert ".dim" in str(e.value)
    with pytest.raises(SpecError) as e:
        parse_spec({"dim": 2, "kind": "mystery"})
    assert ".kind" in str(e.value)
    with pytest.raises(SpecError):
        parse_spec({"dim": 2, "kind": "spider", "apex": [0, 0], "tips": [[0, 0]]})


def test_affine_singular():
    doc = {
        "dim": 2,
        "kind": "affine",
        "matrix": [[1, 1], [1, 1]],
        "of": SPIDER_DOC,
    }
    spec = parse_spec(doc)
    assert spec.determinant() == 0
    # degenerate maps are fine for membership-style use ...
    base = materialize(spec)
    assert isinstance(base, SpiderSpec)
    # ... but rejected when an invertible image is required
    with pytest.raises(SpecError):
        materialize(spec, require_invertible=True)


def test_affine_box_union_monomial_only():
    box_doc = {"dim": 2, "kind": "box-union", "boxes": [{"lo": [0, 0], "hi": [1, 2]}]}
    good = parse_spec(
        {"dim": 2, "kind": "affine", "matrix": [[0, -1], [2, 0]], "of": box_doc}
    )
    out = materialize(good)
    assert isinstance(out, BoxUnionSpec)
    assert out.boxes[0] == ((-2, 0), (0, 2))
    bad = parse_spec(
        {"dim": 2, "kind": "affine", "matrix": [[1, 1], [0, 1]], "of": box_doc}
    )
    with pytest.raises(SpecError):
        materialize(bad)


def test_affine_inner_dim_mismatch():
    with pytest.raises(SpecError) as e:
        parse_spec(
            {
                "dim": 3,
                "kind": "affine",
                "matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                "of": SPIDER_DOC,
            }
        )
    assert ".of" in str(e.value)

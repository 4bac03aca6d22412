import math
from fractions import Fraction

import numpy as np
import pytest

from starsum.grid import GridFrame, GridSet, OUTER, dilate
from starsum.sequence import (
    CERTIFIED_NONDECREASING,
    DisconnectedBoundaryError,
    SandwichError,
    annulus_raster,
    audit_monotonicity,
    boundary_lemma_check,
    default_schedule,
    disc_raster,
    external_boundary_cells,
    hausdorff_convergence,
    holes_audit,
    hull_halfspaces,
    hull_volume,
    lemma2_check,
    make_sandwiched_m,
    square_raster,
)
from starsum.specs import (
    BoxUnionSpec,
    HullSpec,
    PlanarHolesSpec,
    SpecError,
    SpiderSpec,
)


F = Fraction


# ---------------------------------------------------------------------------
# audit_monotonicity


def test_axis_spider_exact_values():
    spec = SpiderSpec(2, (F(0), F(0)), ((F(1), F(0)), (F(0), F(1))))
    rep = audit_monotonicity(spec, 5)
    got = [(e.lower, e.upper) for e in rep.entries]
    want = [F(k * (k - 1), 2) / k**2 for k in range(1, 6)]
    assert got == [(v, v) for v in want]
    assert rep.all_certified_nondecreasing()
    assert not rep.dim_deficient


def test_generic_planar_spider_certifies():
    spec = SpiderSpec(
        2,
        (F(0), F(0)),
        ((F(3), F(1)), (F(-1), F(2)), (F(1), F(-2)), (F(2), F(2))),
    )
    rep = audit_monotonicity(spec, 5)
    assert rep.all_certified_nondecreasing()
    for prev, cur in zip(rep.entries, rep.entries[1:]):
        assert cur.lower >= prev.upper


def test_rank_deficient_spider():
    spec = SpiderSpec(2, (F(0), F(0)), ((F(1), F(1)), (F(2), F(2)), (F(-3), F(-3))))
    rep = audit_monotonicity(spec, 4)
    assert rep.dim_deficient
    assert all(e.lower == e.upper == 0 for e in rep.entries)


def test_hull_audit_is_constant():
    spec = HullSpec(2, ((F(0), F(0)), (F(1), F(0)), (F(1), F(1)), (F(0), F(1))))
    rep = audit_monotonicity(spec, 4)
    assert all(e.lower == e.upper == 1 for e in rep.entries)
    assert rep.hull_reached
    assert rep.all_certified_nondecreasing()


def test_hull_audit_rejects_high_dim():
    pts = tuple(tuple(F(int(i == j)) for j in range(4)) for i in range(4))
    spec = HullSpec(4, pts + ((F(0),) * 4,))
    with pytest.raises(ValueError):
        audit_monotonicity(spec, 3)


def test_box_union_audit():
    spec = BoxUnionSpec(
        2,
        (
            ((F(0), F(0)), (F(1), F(1))),
            ((F(2), F(0)), (F(3), F(1))),
        ),
    )
    rep = audit_monotonicity(spec, 4)
    assert rep.entries[0].lower == 2  # two unit boxes, disjoint
    assert rep.all_certified_nondecreasing()
    # averaged sums fill the gap between the boxes as k grows
    assert rep.entries[-1].lower > rep.entries[0].lower


def test_default_schedule():
    sched = default_schedule(2)
    assert sched[0] == F(1, 64)
    assert all(b == a / 2 for a, b in zip(sched, sched[1:]))
    assert default_schedule(3)[0] == F(1, 16)
    assert default_schedule(2, start=F(1, 32), refinements=2) == [
        F(1, 32), F(1, 64), F(1, 128)]


# ---------------------------------------------------------------------------
# exact hull helpers


def test_hull_volume_exact():
    square = [(F(0), F(0)), (F(2), F(0)), (F(2), F(2)), (F(0), F(2)), (F(1), F(1))]
    assert hull_volume(square) == 4
    tetra = [(F(0),) * 3, (F(1), F(0), F(0)), (F(0), F(1), F(0)), (F(0), F(0), F(1))]
    assert hull_volume(tetra) == F(1, 6)


def test_hull_halfspaces_cube():
    pts = [tuple(F(b) for b in bits) for bits in
           [(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]]
    hs = hull_halfspaces(pts)
    assert len(hs) == 6
    for p in pts:
        assert all(sum(n * x for n, x in zip(normal, p)) <= off
                   for normal, off in hs)
    inside = (F(1, 2),) * 3
    assert all(sum(n * x for n, x in zip(normal, inside)) < off
               for normal, off in hs)


# ---------------------------------------------------------------------------
# cell-mass inequalities (sandwiched grid sets)


@pytest.mark.parametrize("d,k", [(2, 4), (3, 2), (3, 3)])
def test_lemma2_random_fills(d, k):
    spacing = F(1, 8) if d == 2 else F(1, 4)
    for seed in range(3):
        rep = lemma2_check(d, k, spacing=spacing,
                           rng=np.random.default_rng(seed), fill=0.5)
        assert rep.per_cell_ok and rep.per_layer_ok
        assert rep.weights_sum_ok and rep.weights_dual_ok
        assert rep.volume_inequality_ok
        assert rep.stability_ok
        assert rep.vol_m <= rep.vol_kconv


def test_lemma2_extreme_fills():
    for fill in (0.0, 1.0):
        rep = lemma2_check(2, 3, fill=fill)
        assert rep.volume_inequality_ok and rep.stability_ok


def test_lemma2_rejects_bad_sandwich():
    m = make_sandwiched_m(2, 3, 8, fill=0.0)
    cells = m.cells.copy()
    cells[0, 0] = False  # knock out a cell of the mandatory base raster
    bad = GridSet(m.frame, cells, m.mode)
    with pytest.raises(SandwichError):
        lemma2_check(2, 3, M=bad)
    wrong_frame = GridSet(
        GridFrame((F(1), F(1)), m.spacing, m.frame.extents), m.cells, m.mode
    )
    with pytest.raises(SandwichError):
        lemma2_check(2, 3, M=wrong_frame)


def test_lemma2_rejects_bad_spacing():
    with pytest.raises(ValueError):
        lemma2_check(2, 3, spacing=F(2, 3))


def test_make_sandwiched_m_bounds():
    base = make_sandwiched_m(2, 4, 8, fill=0.0)
    full = make_sandwiched_m(2, 4, 8, fill=1.0)
    mid = make_sandwiched_m(2, 4, 8, rng=np.random.default_rng(7), fill=0.5)
    assert np.all(base.cells <= mid.cells)
    assert np.all(mid.cells <= full.cells)
    # the full set is exactly the corner simplex of the grid
    idx = np.indices(full.cells.shape, dtype=np.int64)
    assert np.array_equal(full.cells, (idx + 1).sum(axis=0) <= 4 * 8)


# ---------------------------------------------------------------------------
# boundary sum identities


def test_boundary_disc_and_square():
    for g in (disc_raster(16, F(1, 32)), square_raster(24, F(1, 32))):
        rep = boundary_lemma_check(g)
        assert rep.boundary_components == 1
        assert not rep.used_external_boundary
        assert rep.passed
        # A + dA recovers A + A exactly; dA + dA is one cell-shell thinner
        assert rep.vol_ab == rep.vol_aa
        assert rep.vol_bb <= rep.vol_aa
        assert rep.hausdorff_aa_bb <= rep.tolerance


def test_boundary_annulus_uses_external_boundary():
    g = annulus_raster(16, 6, F(1, 32))
    rep = boundary_lemma_check(g)
    assert rep.boundary_components > 1
    assert rep.used_external_boundary
    assert rep.passed


def test_boundary_rejects_disconnected_set():
    disc = disc_raster(8, F(1, 16))
    cells = np.zeros(tuple(e + 8 for e in disc.cells.shape), dtype=bool)
    cells[: disc.cells.shape[0], : disc.cells.shape[1]] = disc.cells
    cells[-1, -1] = True  # an island far from the disc
    g = GridSet(GridFrame(disc.frame.anchor, disc.spacing, cells.shape), cells, OUTER)
    with pytest.raises(DisconnectedBoundaryError) as e:
        boundary_lemma_check(g)
    rep = e.value.report
    assert rep.rejected
    # with a disconnected boundary the sum identity genuinely fails
    assert rep.vol_bb < rep.vol_aa


def test_external_boundary_of_annulus():
    g = annulus_raster(12, 5, F(1, 16))
    ext = external_boundary_cells(g)
    assert 0 < ext.count() < g.count()
    # external boundary ignores the inner rim: a thickened annulus keeps it
    inner = annulus_raster(12, 5, F(1, 16))
    assert ext.count() < dilate(inner, inner).count()


# ---------------------------------------------------------------------------
# planar regions with convex bites


def _square(side):
    s = F(side)
    return ((F(0), F(0)), (s, F(0)), (s, s), (F(0), s))


def test_holes_interior_hole_fills_at_k2():
    hole = ((F(1), F(1)), (F(2), F(1)), (F(2), F(2)), (F(1), F(2)))
    spec = PlanarHolesSpec(2, _square(3), (hole,))
    rep = holes_audit(spec, 4)
    # k = 1 carries a float band (the region is not convex), later steps
    # certify exact equality with the full square
    assert float(rep.entries[0].lower) == pytest.approx(8, abs=1e-6)
    assert float(rep.entries[0].upper) == pytest.approx(8, abs=1e-6)
    for e in rep.entries[1:]:
        assert e.lower == e.upper == 9
        assert e.verdict == CERTIFIED_NONDECREASING
    assert rep.hull_reached


def test_holes_edge_bite_fills_gradually():
    bite = ((F(1), F(0)), (F(2), F(0)), (F(3, 2), F(1)))
    spec = PlanarHolesSpec(2, _square(3), (bite,))
    rep = holes_audit(spec, 4)
    vals = [float(e.lower) for e in rep.entries]
    assert vals[0] == pytest.approx(8.5, abs=1e-6)
    assert vals == sorted(vals)
    assert rep.entries[-1].upper == 9
    assert rep.all_certified_nondecreasing()
    checks = rep.extra["bite_checks"]
    assert checks and all(c["verdict"] in ("holds", "within-band") for c in checks)


def test_holes_no_bites_is_constant():
    spec = PlanarHolesSpec(2, _square(2), ())
    rep = holes_audit(spec, 3)
    assert all(e.lower == e.upper == 4 for e in rep.entries)
    assert rep.all_certified_nondecreasing()


def test_holes_rejects_overlapping_bites():
    b1 = ((F(1), F(1)), (F(2), F(1)), (F(2), F(2)), (F(1), F(2)))
    b2 = ((F(3, 2), F(3, 2)), (F(5, 2), F(3, 2)), (F(5, 2), F(5, 2)))
    spec = PlanarHolesSpec(2, _square(3), (b1, b2))
    with pytest.raises(SpecError):
        holes_audit(spec, 3)


def test_holes_rejects_nonconvex_outer():
    outer = ((F(0), F(0)), (F(2), F(0)), (F(1), F(1)), (F(2), F(2)), (F(0), F(2)))
    spec = PlanarHolesSpec(2, outer, ())
    with pytest.raises(SpecError):
        holes_audit(spec, 3)


# ---------------------------------------------------------------------------
# convergence to the hull


def test_hausdorff_convergence_rate():
    spec = SpiderSpec(2, (F(0), F(0)), ((F(1), F(0)), (F(0), F(1)), (F(1), F(1))))
    hc = hausdorff_convergence(spec, [2, 4, 8], F(1, 64))
    assert hc.values == sorted(hc.values, reverse=True)
    assert hc.fitted_exponent < -0.7
    for k, v in zip(hc.ks, hc.values):
        assert v <= 2.0 / k + hc.slack

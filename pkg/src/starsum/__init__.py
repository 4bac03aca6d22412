"""Certified volume bounds for k-fold Minkowski sums of star-shaped sets."""

__version__ = "0.1.0"

from .combinatorics import (
    corner_volume,
    enumerate_layer,
    layer_count,
    simplex_spider_volume,
    stability_constant,
    threshold_k,
)
from .counterexamples import (
    AxisBox,
    BlockFamily,
    box_union_volume,
    conjecture2_gap,
    cube_measure_check,
    ellipse_measure_check,
    nth_root_interval,
    pairwise_sum_volumes,
    sum_of_box_unions,
)
from .geometry import (
    DistanceResult,
    NonconvergenceError,
    Spider,
    Zonotope,
    compositions,
    gilbert_distance,
    hull_membership,
    kfold_zonotopes,
    membership_kfold,
    zonotope_from_composition,
)
from .grid import (
    CELL_CAP_DEFAULT,
    CellCapError,
    GridFrame,
    GridSet,
    boundary_cells,
    dilate,
    distance_transform,
    from_bytes,
    hausdorff,
    kfold_volume_bounds,
    rasterize_convex,
    rasterize_halfspaces,
    rasterize_segment,
    rasterize_spider,
    self_sum,
    to_bytes,
)
from .sequence import (
    AuditReport,
    DisconnectedBoundaryError,
    Lemma2Report,
    SandwichError,
    StepEntry,
    audit_monotonicity,
    boundary_lemma_check,
    hausdorff_convergence,
    holes_audit,
    hull_halfspaces,
    hull_volume,
    lemma2_check,
    make_sandwiched_m,
)
from .specs import (
    AffineSpec,
    BoxUnionSpec,
    HullSpec,
    PlanarHolesSpec,
    SpecError,
    SpiderSpec,
    materialize,
    parse_spec,
    serialize,
)

__all__ = [name for name in dir() if not name.startswith("_")]

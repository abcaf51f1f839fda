"""Slow-fast vector fields on the 2-torus: knotted critical curves, slow
divergence integrals, and the links of limit cycles they generate."""

from .geometry import (
    TAU,
    ClosedCurve,
    LiftPoint,
    TorusPoint,
    WindingPair,
    curve_proximity,
    hausdorff_dist,
    torus_dist,
    winding,
    wrap,
    wrap_point,
)
from .models import (
    AssumptionReport,
    ContactPoint,
    CriticalCurve,
    ModelError,
    SlowFastModel,
    catalog_model,
    contact_points,
    critical_curves,
    graph_model,
    model_from_json,
    sine_link_model,
    trig_model,
    validate_assumptions,
)
from .sdi import SdiValue, slow_divergence_integral, sdi_by_segments
from .integrate import IntegrationError, SolverOptions, Trajectory, flow
from .cycles import (
    BasinCensus,
    CycleCensus,
    CycleDetectionError,
    LimitCycle,
    basin_census,
    cycle_census,
    find_limit_cycle,
    hausdorff_convergence,
    return_map_log_derivative,
    rotation_number,
    verify_divergence_bracket,
)
from .knots import KnotClass, homeo_class, is_ambient_isotopic, link_consistent

__version__ = "0.1.0"

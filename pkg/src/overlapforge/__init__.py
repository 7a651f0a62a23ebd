"""Exact construction of IFSs with no exact overlaps but super-close cylinders."""

from .contfrac import (
    ConvergentTable,
    PartialQuotients,
    approx_error_bounds,
    best_approx_min,
    convergents,
    cylinder_interval,
)
from .construction import (
    ConstructionState,
    DeltaCertificate,
    EpsilonSpec,
    NoOverlapCertificate,
    certify_delta,
    eps_range_min,
    initial_step,
    iterate_step,
    no_overlap_certificate,
    run,
)
from .errors import *  # noqa: F401,F403
from .exact import (
    BigRational,
    Log2Bounds,
    Pow8,
    RationalInterval,
    base8_zero_one_check,
    interval_combine,
    log2_bounds,
)
from .ifs import (
    CodedPoint,
    DeltaReport,
    IfsFamily,
    delta_brute,
    enumerate_coded_points,
    overlap_exclusion_search,
    similarity_dimension,
)

__version__ = "0.1.0"

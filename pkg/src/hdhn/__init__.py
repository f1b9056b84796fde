"""Throughput analysis of hybrid full-/half-duplex multi-tier wireless
networks: special functions, closed forms, a point-process Monte Carlo
oracle, and a CLI for sweeps and cross-validation."""

from .analytic import (
    StpBreakdown,
    StpMethod,
    ThroughputReport,
    association_probability,
    gi_moment,
    laplace_fd,
    laplace_hd,
    link_distance_pdf,
    optimal_fd_portions,
    stp,
    stp_alpha4,
    stp_general,
    stp_perfect_ic,
    throughput,
    throughput_closed,
)
from .model import (
    DuplexMode,
    HdhnConfig,
    LinkDirection,
    LinkQuery,
    TierParams,
    dump_config,
    load_config,
    default_two_tier_config,
    target_sirs,
    validate,
)
from .montecarlo import (
    ApproxMode,
    Estimate,
    NetworkRealization,
    SimSettings,
    associate,
    default_window_radius,
    estimate_laplace,
    estimate_laplace_sweep,
    estimate_stp,
    estimate_throughput,
    sample_ppp,
    sample_realization,
)
from .specfun import (
    EvalResult,
    erfcx,
    hyp2f1_one,
    integral_i0,
    integral_i1,
    upper_inc_gamma,
)

__version__ = "0.1.0"

"""Segment utilization and multicast capacity of WDM packet rings with a hotspot.

Bidirectional ring, N nodes, Lambda wavelengths, destination stripping and
spatial reuse; traffic mixes uniform, hotspot-destination, and hotspot-source
packets with arbitrary multicast fanout.  The package computes per-segment
utilization probabilities three ways (closed-form bounds/approximations,
exact enumeration, Monte-Carlo simulation), the multicast capacity, and the
thresholds for switching between shortest-path and one-copy routing.
"""

from .analytics import (
    CapacityReport,
    CriticalBounds,
    Routing,
    bounds_segment_1_1,
    bounds_segment_L_L,
    bounds_segment_N_L,
    max_utilization_sp,
    oc_upper_bound,
    recommend_routing,
    thresholds,
)
from .gaps import (
    LargestGapPmf,
    WavelengthFanoutPmf,
    expected_largest_gap,
    gap_pmf,
    largest_gap_pmf,
    wavelength_fanout_pmf,
)
from .oracle import (
    ExactUtilization,
    InstanceTooLargeError,
    exact_expected_clg,
    exact_gap_start_distribution,
    exact_utilization,
)
from .simulate import (
    Packet,
    RoutingDecision,
    SimCapacity,
    StopRule,
    UtilizationMatrix,
    estimate_capacity,
    estimate_utilization,
    route_one_copy,
    route_shortest_path,
    sample_packet,
)
from .sweep import ConfigError, ExperimentConfig, advise_report, rows_to_csv, run_sweep
from .topology import Direction, RingTopology, SegmentId
from .traffic import TrafficClass, TrafficModel, fanout_preset, make_traffic

__version__ = "0.1.0"

__all__ = [
    "CapacityReport", "CriticalBounds", "Routing",
    "bounds_segment_1_1", "bounds_segment_L_L", "bounds_segment_N_L",
    "max_utilization_sp", "oc_upper_bound", "recommend_routing", "thresholds",
    "LargestGapPmf", "WavelengthFanoutPmf", "expected_largest_gap",
    "gap_pmf", "largest_gap_pmf", "wavelength_fanout_pmf",
    "ExactUtilization", "InstanceTooLargeError", "exact_expected_clg",
    "exact_gap_start_distribution", "exact_utilization",
    "Packet", "RoutingDecision", "SimCapacity", "StopRule",
    "UtilizationMatrix", "estimate_capacity", "estimate_utilization",
    "route_one_copy", "route_shortest_path", "sample_packet",
    "ConfigError", "ExperimentConfig", "advise_report", "rows_to_csv", "run_sweep",
    "Direction", "RingTopology", "SegmentId",
    "TrafficClass", "TrafficModel", "fanout_preset", "make_traffic",
]

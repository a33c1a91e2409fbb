"""Closed-form segment utilization bounds, approximations, and capacity.

Under shortest-path routing, three segments can carry the maximum
utilization: the first segment on wavelength 1 (leaving the hotspot), the
segment entering node Lambda on wavelength Lambda, and the segment entering
the hotspot on wavelength Lambda.  This module evaluates the printed
lower/upper bounds and large-eta approximations for each, the multicast
capacity (reciprocal of the maximum utilization), the gamma thresholds of
the shortest-path / one-copy switching strategy, and the one-copy
utilization bound.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .gaps import expected_largest_gap, wavelength_fanout_pmf
from .topology import Direction, RingTopology, SegmentId
from .traffic import TrafficClass, TrafficModel


class Routing(enum.Enum):
    SHORTEST_PATH = "shortest_path"
    ONE_COPY = "one_copy"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class CriticalBounds:
    """Lower/upper bounds and approximation for one critical segment."""

    segment: SegmentId
    lower: float
    upper: float
    approx: float


@dataclass(frozen=True)
class CapacityReport:
    max_util_approx: float
    critical_values: tuple[CriticalBounds, CriticalBounds, CriticalBounds]
    capacity: float
    gamma_th1: float
    gamma_th2: float
    recommendation: Routing


def _check(topology: RingTopology, traffic: TrafficModel) -> None:
    if traffic.n_nodes != topology.n_nodes:
        raise ValueError(
            f"traffic model is for N={traffic.n_nodes}, topology has N={topology.n_nodes}"
        )


class _Terms:
    """Shared per-wavelength pmfs and gap expectations for the formulas."""

    def __init__(self, topology: RingTopology, traffic: TrafficModel):
        _check(topology, traffic)
        self.topology = topology
        self.traffic = traffic
        n, lam = topology.n_nodes, topology.n_wavelengths
        eta = topology.nodes_per_wavelength
        self.n, self.lam, self.eta = n, lam, eta
        # mu_{lambda,ell} is independent of lambda; the hotspot wavelength
        # matters only for the nu and kappa mixtures.
        self.mu = wavelength_fanout_pmf(topology, 1, TrafficClass.UNIFORM, traffic.fanout_uniform).probs
        self.nu_1 = wavelength_fanout_pmf(topology, 1, TrafficClass.HOTSPOT_DEST, traffic.fanout_hotspot_dest).probs
        self.nu_L = wavelength_fanout_pmf(topology, lam, TrafficClass.HOTSPOT_DEST, traffic.fanout_hotspot_dest).probs
        self.kap_1 = wavelength_fanout_pmf(topology, 1, TrafficClass.HOTSPOT_SRC, traffic.fanout_hotspot_src).probs
        self.kap_L = wavelength_fanout_pmf(topology, lam, TrafficClass.HOTSPOT_SRC, traffic.fanout_hotspot_src).probs
        if lam == 1:
            # Single wavelength: wavelength 1 is the hotspot wavelength.
            self.nu_1 = self.nu_L
            self.kap_1 = self.kap_L
        ells = np.arange(eta + 1)
        self.g_eta = np.array([expected_largest_gap(e, eta) for e in ells])
        self.g_up = np.array([expected_largest_gap(e, eta + 1) for e in ells])
        self.g_dn = np.array([expected_largest_gap(e, eta - 1) for e in ells])
        self.frac = ells / (ells + 1.0)  # ell/(ell+1)
        self.inv = 1.0 / (ells + 1.0)  # 1/(ell+1)


def _segment_1_1(topology: RingTopology) -> SegmentId:
    return SegmentId(Direction.CW, 1, 1)


def _segment_L_L(topology: RingTopology) -> SegmentId:
    lam = topology.n_wavelengths
    return SegmentId(Direction.CW, lam, lam)


def _segment_N_L(topology: RingTopology) -> SegmentId:
    return SegmentId(Direction.CW, topology.n_nodes, topology.n_wavelengths)


def bounds_segment_1_1(topology: RingTopology, traffic: TrafficModel, terms: _Terms | None = None) -> CriticalBounds:
    """Bounds and approximation for the first segment on wavelength 1."""
    t = terms if terms is not None else _Terms(topology, traffic)
    a, b, g = traffic.alpha, traffic.beta, traffic.gamma
    n, lam, eta = t.n, t.lam, t.eta
    ab = a + n / (n - 1) * b if n > 1 else a
    mix = a * t.mu + (n / (n - 1)) * b * t.nu_1
    hot = g * t.kap_1 - (b / (n - 1)) * t.nu_1
    lower = 0.5 * ab - (1.0 / (2 * eta)) * float(t.g_up @ mix) + float(t.frac @ hot)
    upper = (
        0.5 * (1 + (lam - 1) / n) * ab
        - (1.0 / (2 * eta)) * float(t.g_dn @ mix)
        + float((t.frac * (eta + 1) / eta) @ hot)
    )
    approx = (
        0.5 * (a + b)
        - (1.0 / (2 * eta)) * float(t.g_eta @ (a * t.mu + b * t.nu_1))
        + g * float(t.frac @ t.kap_1)
    )
    return CriticalBounds(_segment_1_1(topology), lower, upper, approx)


def bounds_segment_L_L(topology: RingTopology, traffic: TrafficModel, terms: _Terms | None = None) -> CriticalBounds:
    """Bounds and approximation for the segment entering node Lambda on
    the hotspot wavelength."""
    t = terms if terms is not None else _Terms(topology, traffic)
    a, b, g = traffic.alpha, traffic.beta, traffic.gamma
    n, lam, eta = t.n, t.lam, t.eta
    gamma_term = g * float(t.frac[: eta] @ t.kap_L[: eta]) if eta >= 1 else 0.0
    lower = (
        0.5 * a * (1 - (1.0 / eta) * float(t.g_up @ t.mu))
        + 0.5 * b * (1 - float((2 * (eta + 1) / eta) * t.inv @ t.nu_L))
        + gamma_term
    )
    # 2(ell*eta - 1)/((ell+1)*ell*eta) = 2/(ell+1) * (1 - 1/(ell*eta)); ell >= 1
    ells = np.arange(1, eta + 1)
    beta_up = 2.0 * (ells * eta - 1) / ((ells + 1) * ells * eta)
    upper = (
        0.5 * a * (1 + (lam - 1) / n - (1.0 / eta) * float(t.g_dn @ t.mu))
        + 0.5 * b * (1 + (lam - 1) / n - float(beta_up @ t.nu_L[1:]))
        + gamma_term
    )
    approx = (
        0.5 * (a + b)
        - (a / (2 * eta)) * float(t.g_eta @ t.mu)
        - b * float(t.inv @ t.nu_L)
        + gamma_term
    )
    return CriticalBounds(_segment_L_L(topology), lower, upper, approx)


def bounds_segment_N_L(topology: RingTopology, traffic: TrafficModel, terms: _Terms | None = None) -> CriticalBounds:
    """Bounds and approximation for the segment entering the hotspot on its
    own wavelength.  Hotspot-source packets never use it; hotspot-destination
    packets reach the hotspot clockwise with probability one half."""
    t = terms if terms is not None else _Terms(topology, traffic)
    a, b = traffic.alpha, traffic.beta
    n, lam, eta = t.n, t.lam, t.eta
    lower = 0.5 * a * (1 - (1.0 / eta) * float(t.g_up @ t.mu)) + 0.5 * b
    upper = 0.5 * a * (1 + (lam - 1) / n - (1.0 / eta) * float(t.g_dn @ t.mu)) + 0.5 * b
    approx = 0.5 * (a + b) - (a / (2 * eta)) * float(t.g_eta @ t.mu)
    return CriticalBounds(_segment_N_L(topology), lower, upper, approx)


def thresholds(topology: RingTopology, traffic: TrafficModel, terms: _Terms | None = None) -> tuple[float, float]:
    """(gamma_th1, gamma_th2) of the routing switching strategy.

    Below gamma_th1 hotspot-source traffic cannot set the maximum
    utilization, so shortest path is safe; above gamma_th2 one-copy routing
    is guaranteed no worse.  Components with an impossible denominator are
    +inf: for gamma_th1 that means no hotspot-source traffic can land on the
    wavelength, for gamma_th2 that the one-copy crossover never happens.
    """
    t = terms if terms is not None else _Terms(topology, traffic)
    b, eta = traffic.beta, t.eta

    num_1 = (b / (2 * eta)) * float(t.g_eta @ t.nu_1)
    den_1 = float(t.frac @ t.kap_1)
    num_L = b * float(t.inv @ t.nu_L)
    den_L = float(t.frac[: eta] @ t.kap_L[: eta]) if eta >= 1 else 0.0

    th1_1 = num_1 / den_1 if den_1 > 0 else math.inf
    th1_L = num_L / den_L if den_L > 0 else math.inf
    th2_1 = num_1 / (den_1 - 0.5) if den_1 > 0.5 else math.inf
    th2_L = num_L / (den_L - 0.5) if den_L > 0.5 else math.inf
    return min(th1_1, th1_L), max(th2_1, th2_L)


def oc_upper_bound(topology: RingTopology, traffic: TrafficModel, terms: _Terms | None = None) -> float:
    """Approximate cap on the maximum utilization under one-copy routing."""
    t = terms if terms is not None else _Terms(topology, traffic)
    eta = t.eta
    return 0.5 - (traffic.alpha / (2 * eta)) * float(t.g_eta[:eta] @ t.mu[:eta])


def recommend_routing(topology: RingTopology, traffic: TrafficModel, terms: _Terms | None = None) -> Routing:
    """Pick a routing strategy: thresholds first, then the one-half test."""
    t = terms if terms is not None else _Terms(topology, traffic)
    th1, th2 = thresholds(topology, traffic, t)
    g = traffic.gamma
    if g <= th1:
        return Routing.SHORTEST_PATH
    if g >= th2:
        return Routing.ONE_COPY
    p1 = bounds_segment_1_1(topology, traffic, t).approx
    pL = bounds_segment_L_L(topology, traffic, t).approx
    if p1 < 0.5 and pL < 0.5:
        return Routing.SHORTEST_PATH
    if p1 > 0.5 or pL > 0.5:
        return Routing.ONE_COPY
    return Routing.INDETERMINATE


def max_utilization_sp(topology: RingTopology, traffic: TrafficModel) -> CapacityReport:
    """Approximate maximum utilization and capacity under shortest path.

    The maximum over all segments equals the maximum over the three critical
    segments, so the capacity is the reciprocal of the largest of the three
    approximations.
    """
    t = _Terms(topology, traffic)
    triple = (
        bounds_segment_1_1(topology, traffic, t),
        bounds_segment_L_L(topology, traffic, t),
        bounds_segment_N_L(topology, traffic, t),
    )
    max_util = max(cb.approx for cb in triple)
    th1, th2 = thresholds(topology, traffic, t)
    return CapacityReport(
        max_util_approx=max_util,
        critical_values=triple,
        capacity=1.0 / max_util if max_util > 0 else math.inf,
        gamma_th1=th1,
        gamma_th2=th2,
        recommendation=recommend_routing(topology, traffic, t),
    )

"""Experiment driver: sweeps over (N, beta, gamma) emitting CSV rows.

A declarative config selects the topology sweep, the traffic mix, fanout
presets (or explicit pmfs), the routing strategy, and the evaluation engine
(closed-form analytics, exact oracle enumeration, or Monte-Carlo
simulation).  Every run produces rows with a fixed, versioned column set;
row order is deterministic (sweep order, then segment order) and simulation
seeds are derived from the run seed per sweep point, so a given
(config, seed, threads) always yields byte-identical CSV.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np

from . import analytics
from .oracle import exact_utilization
from .simulate import StopRule, UtilizationMatrix, estimate_capacity, estimate_utilization
from .topology import Direction, RingTopology, SegmentId
from .traffic import TrafficModel, make_traffic

CSV_COLUMNS = [
    "N", "Lambda", "eta", "alpha", "beta", "gamma", "fanout_preset",
    "strategy", "segment_dir", "segment_index", "segment_wavelength",
    "util_lower", "util_upper", "util_approx", "util_exact", "util_sim",
    "ci_halfwidth", "samples", "capacity", "gamma_th1", "gamma_th2",
    "recommendation", "seed",
]

ENGINES = ("analytic", "simulate", "oracle")
STRATEGIES = ("sp", "oc", "both", "auto")


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending field."""


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


@dataclass
class ExperimentConfig:
    """Declarative description of one sweep (see README for the schema)."""

    n_nodes: list = field(default_factory=lambda: [64])
    n_wavelengths: int = 4
    alpha: float | None = None  # None: derived as 1 - beta - gamma
    beta: list = field(default_factory=lambda: [0.0])
    gamma: list = field(default_factory=lambda: [0.0])
    fanout: object = "uc"
    fanout_hotspot_dest: object = None
    fanout_hotspot_src: object = None
    strategy: str = "sp"
    engine: str = "analytic"
    seed: int = 0
    threads: int = 1
    stop_rule: dict = field(default_factory=dict)
    output: str | None = None

    def __post_init__(self):
        self.n_nodes = [int(n) for n in _as_list(self.n_nodes)]
        self.beta = [float(b) for b in _as_list(self.beta)]
        self.gamma = [float(g) for g in _as_list(self.gamma)]
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy: must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine: must be one of {ENGINES}, got {self.engine!r}")
        if self.threads < 1:
            raise ConfigError("threads: must be >= 1")
        for key in self.stop_rule:
            if key not in {f.name for f in fields(StopRule)}:
                raise ConfigError(f"stop_rule.{key}: unknown field")

    # -- (de)serialization ---------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be an object")
        top = dict(raw.get("topology", {}))
        tr = dict(raw.get("traffic", {}))
        known_top = {"n_nodes", "n_wavelengths"}
        known_tr = {"alpha", "beta", "gamma", "fanout", "fanout_hotspot_dest", "fanout_hotspot_src"}
        for k in top:
            if k not in known_top:
                raise ConfigError(f"topology.{k}: unknown field")
        for k in tr:
            if k not in known_tr:
                raise ConfigError(f"traffic.{k}: unknown field")
        known_root = {"topology", "traffic", "strategy", "engine", "seed", "threads", "stop_rule", "output"}
        for k in raw:
            if k not in known_root:
                raise ConfigError(f"{k}: unknown field")
        kwargs = {}
        if "n_nodes" in top:
            kwargs["n_nodes"] = top["n_nodes"]
        if "n_wavelengths" in top:
            kwargs["n_wavelengths"] = int(top["n_wavelengths"])
        for k in known_tr:
            if k in tr and tr[k] is not None:
                kwargs[k] = tr[k]
        if "alpha" in tr and tr["alpha"] is None:
            kwargs["alpha"] = None
        for k in ("strategy", "engine", "seed", "threads", "stop_rule", "output"):
            if k in raw and raw[k] is not None:
                kwargs[k] = raw[k]
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    def to_dict(self) -> dict:
        def plain(x):
            if isinstance(x, np.ndarray):
                return [float(v) for v in x]
            return x

        return {
            "topology": {"n_nodes": self.n_nodes, "n_wavelengths": self.n_wavelengths},
            "traffic": {
                "alpha": self.alpha,
                "beta": self.beta,
                "gamma": self.gamma,
                "fanout": plain(self.fanout),
                "fanout_hotspot_dest": plain(self.fanout_hotspot_dest),
                "fanout_hotspot_src": plain(self.fanout_hotspot_src),
            },
            "strategy": self.strategy,
            "engine": self.engine,
            "seed": self.seed,
            "threads": self.threads,
            "stop_rule": dict(self.stop_rule),
            "output": self.output,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    # -- helpers ---------------------------------------------------------

    def fanout_label(self) -> str:
        def lbl(x):
            if x is None:
                return ""
            return x if isinstance(x, str) else "custom"

        parts = [lbl(self.fanout)]
        if self.fanout_hotspot_dest is not None:
            parts.append("nu=" + lbl(self.fanout_hotspot_dest))
        if self.fanout_hotspot_src is not None:
            parts.append("kappa=" + lbl(self.fanout_hotspot_src))
        return ";".join(parts)

    def traffic_for(self, n: int, beta: float, gamma: float) -> TrafficModel:
        alpha = self.alpha if self.alpha is not None else 1.0 - beta - gamma
        if alpha < -1e-12:
            raise ConfigError(f"traffic: derived alpha={alpha} negative at beta={beta}, gamma={gamma}")
        try:
            return make_traffic(
                n, max(alpha, 0.0), beta, gamma,
                fanout=self.fanout,
                fanout_hotspot_dest=self.fanout_hotspot_dest,
                fanout_hotspot_src=self.fanout_hotspot_src,
            )
        except ValueError as e:
            raise ConfigError(f"traffic: {e}") from None

    def make_stop_rule(self) -> StopRule:
        kwargs = dict(self.stop_rule)
        if "tracked" in kwargs and isinstance(kwargs["tracked"], list):
            kwargs["tracked"] = [
                SegmentId(Direction(d), int(i), int(w)) for d, i, w in kwargs["tracked"]
            ]
        return StopRule(**kwargs)


def fmt(x) -> str:
    """CSV cell formatting: '' for absent, 'inf' for infinity, repr floats."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        x = float(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def _critical_segments(topology: RingTopology) -> list[SegmentId]:
    lam = topology.n_wavelengths
    return [
        SegmentId(Direction.CW, 1, 1),
        SegmentId(Direction.CW, lam, lam),
        SegmentId(Direction.CW, topology.n_nodes, lam),
    ]


def _point_rows(config, topology, traffic, beta, gamma, strategies, point_index):
    """Rows for one sweep point.  Returns (rows, nonconverged_flag)."""
    n = topology.n_nodes
    report = analytics.max_utilization_sp(topology, traffic)
    base = {
        "N": n,
        "Lambda": topology.n_wavelengths,
        "eta": topology.nodes_per_wavelength,
        "alpha": traffic.alpha,
        "beta": beta,
        "gamma": gamma,
        "fanout_preset": config.fanout_label(),
        "gamma_th1": report.gamma_th1,
        "gamma_th2": report.gamma_th2,
        "recommendation": report.recommendation.value,
        "seed": config.seed,
    }
    rows = []
    flagged = False
    for strat_i, strat in enumerate(strategies):
        if config.engine == "analytic":
            if strat == "sp":
                for cb in report.critical_values:
                    rows.append(base | {
                        "strategy": strat,
                        "segment_dir": cb.segment.direction.value,
                        "segment_index": cb.segment.index,
                        "segment_wavelength": cb.segment.wavelength,
                        "util_lower": cb.lower,
                        "util_upper": cb.upper,
                        "util_approx": cb.approx,
                        "capacity": report.capacity,
                    })
            else:
                # One-copy analytics only bound the maximum over all segments.
                rows.append(base | {
                    "strategy": strat,
                    "util_upper": analytics.oc_upper_bound(topology, traffic),
                })
        elif config.engine == "oracle":
            ex = exact_utilization(topology, traffic, strat)
            cap = 1.0 / float(ex.max_overall())
            for seg in _critical_segments(topology):
                rows.append(base | {
                    "strategy": strat,
                    "segment_dir": seg.direction.value,
                    "segment_index": seg.index,
                    "segment_wavelength": seg.wavelength,
                    "util_exact": float(ex.prob(seg)),
                    "capacity": cap,
                })
        else:  # simulate
            seed_seq = np.random.SeedSequence(
                entropy=config.seed, spawn_key=(point_index, strat_i)
            )
            matrix = estimate_utilization(
                topology, traffic, strat,
                seed=seed_seq,
                stop_rule=config.make_stop_rule(),
                n_workers=config.threads,
            )
            flagged |= not matrix.converged
            cap = estimate_capacity(matrix)
            segs = _critical_segments(topology) + [cap.segment]
            for seg in segs:
                rows.append(base | {
                    "strategy": strat,
                    "segment_dir": seg.direction.value,
                    "segment_index": seg.index,
                    "segment_wavelength": seg.wavelength,
                    "util_sim": matrix.estimate(seg),
                    "ci_halfwidth": matrix.halfwidth(seg),
                    "samples": matrix.n_samples,
                    "capacity": cap.capacity,
                })
    return rows, flagged


def run_sweep(config: ExperimentConfig) -> tuple[list[dict], bool]:
    """Execute the sweep; returns (rows, any_nonconverged)."""
    rows: list[dict] = []
    flagged = False
    point_index = 0
    for n in config.n_nodes:
        try:
            topology = RingTopology(n, config.n_wavelengths)
        except ValueError as e:
            raise ConfigError(f"topology: {e}") from None
        for beta in config.beta:
            for gamma in config.gamma:
                traffic = config.traffic_for(n, beta, gamma)
                if config.strategy == "both":
                    strategies = ["sp", "oc"]
                elif config.strategy == "auto":
                    rec = analytics.recommend_routing(topology, traffic)
                    strategies = {
                        analytics.Routing.SHORTEST_PATH: ["sp"],
                        analytics.Routing.ONE_COPY: ["oc"],
                        analytics.Routing.INDETERMINATE: ["sp", "oc"],
                    }[rec]
                else:
                    strategies = [config.strategy]
                prow, pflag = _point_rows(
                    config, topology, traffic, beta, gamma, strategies, point_index
                )
                rows.extend(prow)
                flagged |= pflag
                point_index += 1
    return rows, flagged


def rows_to_csv(rows: list[dict]) -> str:
    """RFC-4180 style CSV with the stable column header."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(fmt(row.get(c)) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def advise_report(config: ExperimentConfig) -> str:
    """Human-readable routing advice for a single (non-sweep) scenario."""
    if len(config.n_nodes) != 1 or len(config.beta) != 1 or len(config.gamma) != 1:
        raise ConfigError("advise needs a single scenario (no sweep lists)")
    topology = RingTopology(config.n_nodes[0], config.n_wavelengths)
    traffic = config.traffic_for(topology.n_nodes, config.beta[0], config.gamma[0])
    report = analytics.max_utilization_sp(topology, traffic)
    oc_bound = analytics.oc_upper_bound(topology, traffic)
    p1, pL, pN = report.critical_values
    lines = [
        f"ring: N={topology.n_nodes} nodes, Lambda={topology.n_wavelengths} wavelengths"
        f" (eta={topology.nodes_per_wavelength})",
        f"traffic: alpha={traffic.alpha:.4g} beta={traffic.beta:.4g} gamma={traffic.gamma:.4g}"
        f" fanout={config.fanout_label()}",
        "",
        "shortest-path critical segment approximations:",
        f"  P({p1.segment})  = {p1.approx:.4f}   [{p1.lower:.4f}, {p1.upper:.4f}]",
        f"  P({pL.segment})  = {pL.approx:.4f}   [{pL.lower:.4f}, {pL.upper:.4f}]",
        f"  P({pN.segment}) = {pN.approx:.4f}   [{pN.lower:.4f}, {pN.upper:.4f}]",
        f"max utilization (SP approx): {report.max_util_approx:.4f}"
        f"  ->  C_M = {report.capacity:.3f}",
        f"one-copy utilization bound: {oc_bound:.4f}",
        f"thresholds: gamma_th1 = {fmt(report.gamma_th1)}  gamma_th2 = {fmt(report.gamma_th2)}",
    ]
    if config.engine == "simulate":
        for strat in ("sp", "oc"):
            seed_seq = np.random.SeedSequence(entropy=config.seed, spawn_key=(0, 0 if strat == "sp" else 1))
            matrix = estimate_utilization(
                topology, traffic, strat, seed=seed_seq,
                stop_rule=config.make_stop_rule(), n_workers=config.threads,
            )
            cap = estimate_capacity(matrix)
            conv = "" if matrix.converged else "  (not converged)"
            lines.append(
                f"simulated {strat.upper()}: max util = {cap.max_utilization:.4f}"
                f" +/- {cap.ci_halfwidth:.4f} at {cap.segment}"
                f"  ->  C_M = {cap.capacity:.3f}  [n={cap.n_samples}]{conv}"
            )
    lines.append(f"recommendation: {report.recommendation.value}")
    return "\n".join(lines) + "\n"

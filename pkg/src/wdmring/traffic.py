"""Traffic mix and fanout distributions.

A traffic model is a mix (alpha, beta, gamma) of uniform, hotspot-destination,
and hotspot-source packets, plus one fanout pmf per class giving the number of
destinations l in {1..N-1}.  Fanout pmfs are stored as arrays indexed by l-1.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

import numpy as np

PMF_TOL = 1e-9


class TrafficClass(enum.Enum):
    UNIFORM = "uniform"
    HOTSPOT_DEST = "hotspot_dest"
    HOTSPOT_SRC = "hotspot_src"


def _check_pmf(name: str, pmf: np.ndarray, n_nodes: int) -> np.ndarray:
    pmf = np.asarray(pmf, dtype=float)
    if pmf.shape != (n_nodes - 1,):
        raise ValueError(
            f"{name}: expected {n_nodes - 1} entries (fanout 1..N-1), got {pmf.shape}"
        )
    if np.any(pmf < -PMF_TOL):
        raise ValueError(f"{name}: negative probabilities")
    if abs(pmf.sum() - 1.0) > PMF_TOL:
        raise ValueError(f"{name}: probabilities sum to {pmf.sum()}, not 1")
    return pmf


@dataclass(frozen=True)
class TrafficModel:
    """Mix (alpha, beta, gamma) plus per-class fanout pmfs on {1..N-1}."""

    alpha: float
    beta: float
    gamma: float
    fanout_uniform: np.ndarray
    fanout_hotspot_dest: np.ndarray
    fanout_hotspot_src: np.ndarray

    def __post_init__(self) -> None:
        for name, x in (("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)):
            if x < -PMF_TOL:
                raise ValueError(f"{name} must be non-negative, got {x}")
        if abs(self.alpha + self.beta + self.gamma - 1.0) > PMF_TOL:
            raise ValueError(
                f"alpha+beta+gamma = {self.alpha + self.beta + self.gamma}, expected 1"
            )
        n = len(self.fanout_uniform) + 1
        object.__setattr__(
            self, "fanout_uniform", _check_pmf("fanout_uniform", self.fanout_uniform, n)
        )
        object.__setattr__(
            self,
            "fanout_hotspot_dest",
            _check_pmf("fanout_hotspot_dest", self.fanout_hotspot_dest, n),
        )
        object.__setattr__(
            self,
            "fanout_hotspot_src",
            _check_pmf("fanout_hotspot_src", self.fanout_hotspot_src, n),
        )

    @property
    def n_nodes(self) -> int:
        return len(self.fanout_uniform) + 1

    def fanout(self, traffic_class: TrafficClass) -> np.ndarray:
        return {
            TrafficClass.UNIFORM: self.fanout_uniform,
            TrafficClass.HOTSPOT_DEST: self.fanout_hotspot_dest,
            TrafficClass.HOTSPOT_SRC: self.fanout_hotspot_src,
        }[traffic_class]

    def class_weight(self, traffic_class: TrafficClass) -> float:
        return {
            TrafficClass.UNIFORM: self.alpha,
            TrafficClass.HOTSPOT_DEST: self.beta,
            TrafficClass.HOTSPOT_SRC: self.gamma,
        }[traffic_class]


# ---------------------------------------------------------------------------
# Named fanout presets.  "uc", "mi", "mc", "bc" and "fig2" follow the standard
# evaluation scenarios; "point:<d>" is a deterministic fanout d and
# "uniform:<k>" spreads mass evenly over 1..k.
# ---------------------------------------------------------------------------

_POINT_RE = re.compile(r"^point:(\d+)$")
_UNIFORM_RE = re.compile(r"^uniform:(\d+)$")

PRESET_NAMES = ("uc", "mi", "mc", "bc", "fig2")


def fanout_preset(spec: str, n_nodes: int) -> np.ndarray:
    """Expand a named fanout preset into a pmf over fanouts 1..N-1."""
    n = n_nodes
    if n < 3 and spec not in ("uc",) and not _POINT_RE.match(spec):
        # mi/mc/bc/fig2 divide by (N-2) or need fanout > 1
        raise ValueError(f"preset {spec!r} needs at least 3 nodes")
    pmf = np.zeros(n - 1)
    if spec == "uc":
        pmf[0] = 1.0
    elif spec == "mi":
        pmf[0] = 0.5
        pmf[1:] = 0.5 / (n - 2)
    elif spec == "mc":
        pmf[:] = 1.0 / (n - 1)
    elif spec == "bc":
        pmf[n - 2] = 1.0
    elif spec == "fig2":
        pmf[0] = 0.25
        pmf[1:] = 0.75 / (n - 2)
    elif m := _POINT_RE.match(spec):
        d = int(m.group(1))
        if not 1 <= d <= n - 1:
            raise ValueError(f"point fanout {d} outside 1..{n - 1}")
        pmf[d - 1] = 1.0
    elif m := _UNIFORM_RE.match(spec):
        k = int(m.group(1))
        if not 1 <= k <= n - 1:
            raise ValueError(f"uniform fanout cap {k} outside 1..{n - 1}")
        pmf[:k] = 1.0 / k
    else:
        raise ValueError(f"unknown fanout preset {spec!r}")
    return pmf


def make_traffic(
    n_nodes: int,
    alpha: float,
    beta: float,
    gamma: float,
    fanout: str | np.ndarray = "uc",
    fanout_hotspot_dest: str | np.ndarray | None = None,
    fanout_hotspot_src: str | np.ndarray | None = None,
) -> TrafficModel:
    """Build a TrafficModel, expanding preset names where given.

    A single ``fanout`` is used for all three classes unless the hotspot
    classes are overridden.
    """

    def expand(spec):
        if isinstance(spec, str):
            return fanout_preset(spec, n_nodes)
        return np.asarray(spec, dtype=float)

    mu = expand(fanout)
    nu = expand(fanout_hotspot_dest) if fanout_hotspot_dest is not None else mu
    kappa = expand(fanout_hotspot_src) if fanout_hotspot_src is not None else mu
    return TrafficModel(alpha, beta, gamma, mu, nu, kappa)

"""Monte-Carlo packet simulator for segment utilization.

Packets are sampled i.i.d. from the traffic model and routed per wavelength:
shortest path avoids the chosen largest gap (CLG) of the active set, one-copy
routing sends hotspot-source packets in the single direction that traverses
fewer nodes homed on the wavelength (fair coin when both directions traverse
equally many).  Per-segment usage indicators are averaged into utilization
estimates with 99% confidence intervals and a relative-half-width stopping
rule.

A scalar per-packet API (``sample_packet``, ``route_shortest_path``,
``route_one_copy``) exposes individual routing decisions; the estimator runs
a vectorized engine over batches, with one independent RNG stream per worker
so results are reproducible for a fixed (seed, worker count).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .topology import Direction, RingTopology, SegmentId
from .traffic import TrafficClass, TrafficModel

Z99 = 2.5758293035489004  # two-sided 99% normal quantile


# ---------------------------------------------------------------------------
# Scalar packet API
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Packet:
    """One multicast packet: class, sender S, and fanout (destination) set."""

    traffic_class: TrafficClass
    sender: int
    fanout_set: frozenset

    def validate(self, topology: RingTopology) -> "Packet":
        n = topology.n_nodes
        topology.check_node(self.sender)
        if not self.fanout_set or len(self.fanout_set) > n - 1:
            raise ValueError("fanout set must have 1..N-1 nodes")
        if self.sender in self.fanout_set:
            raise ValueError("sender cannot be a destination")
        for d in self.fanout_set:
            topology.check_node(d)
        if self.traffic_class is TrafficClass.HOTSPOT_DEST and n not in self.fanout_set:
            raise ValueError("hotspot-destination packet must include node N")
        if self.traffic_class is TrafficClass.HOTSPOT_SRC and self.sender != n:
            raise ValueError("hotspot-source packet must be sent by node N")
        return self


@dataclass(frozen=True)
class WavelengthRoute:
    """Arcs transmitted on one wavelength.

    ``cw_to`` / ``ccw_to`` give the last node reached by the clockwise /
    counter-clockwise copy; an arc equal to the sender is empty.  For
    shortest path, ``clg_start`` is the clockwise start node of the chosen
    largest gap (0 stands for node N).
    """

    sender: int
    cw_to: int
    ccw_to: int
    clg_start: int | None = None


@dataclass(frozen=True)
class RoutingDecision:
    topology: RingTopology
    routes: dict  # wavelength -> WavelengthRoute; absent = no transmission

    def segments_used(self) -> set[SegmentId]:
        n = self.topology.n_nodes
        out: set[SegmentId] = set()
        for lam, r in self.routes.items():
            d_cw = (r.cw_to - r.sender) % n
            for i in range(1, d_cw + 1):
                out.add(SegmentId(Direction.CW, (r.sender + i - 1) % n + 1, lam))
            d_ccw = (r.sender - r.ccw_to) % n
            for i in range(d_ccw):
                out.add(SegmentId(Direction.CCW, (r.sender - i - 1) % n + 1, lam))
        return out


def sample_packet(topology: RingTopology, traffic: TrafficModel, rng: np.random.Generator) -> Packet:
    """Draw one packet: class ~ (alpha,beta,gamma), then sender, fanout, set."""
    n = topology.n_nodes
    u = rng.random()
    if u < traffic.alpha:
        cls = TrafficClass.UNIFORM
        sender = int(rng.integers(1, n + 1))
        l = int(rng.choice(n - 1, p=traffic.fanout_uniform)) + 1
        pool = [x for x in range(1, n + 1) if x != sender]
        fan = rng.choice(len(pool), size=l, replace=False)
        fset = frozenset(pool[i] for i in fan)
    elif u < traffic.alpha + traffic.beta:
        cls = TrafficClass.HOTSPOT_DEST
        sender = int(rng.integers(1, n))
        l = int(rng.choice(n - 1, p=traffic.fanout_hotspot_dest)) + 1
        pool = [x for x in range(1, n) if x != sender]
        fan = rng.choice(len(pool), size=l - 1, replace=False)
        fset = frozenset(pool[i] for i in fan) | {n}
    else:
        cls = TrafficClass.HOTSPOT_SRC
        sender = n
        l = int(rng.choice(n - 1, p=traffic.fanout_hotspot_src)) + 1
        fan = rng.choice(n - 1, size=l, replace=False)
        fset = frozenset(int(x) + 1 for x in fan)
    return Packet(cls, sender, fset).validate(topology)


def largest_gap_choices(n_nodes: int, active_sorted: list[int]) -> list[tuple[int, int]]:
    """All maximal gaps of a sorted active set, as (start, end) node pairs.

    The gap from start to end (clockwise) contains no active node; ties are
    returned in clockwise start order for the caller to pick from.
    """
    m = len(active_sorted)
    if m < 2:
        return [(active_sorted[0], active_sorted[0])]
    gaps = []
    for i in range(m):
        a = active_sorted[i]
        b = active_sorted[(i + 1) % m]
        length = (b - a) % n_nodes or n_nodes
        gaps.append((length, a, b))
    best = max(g[0] for g in gaps)
    return [(a, b) for length, a, b in gaps if length == best]


def route_shortest_path(topology: RingTopology, packet: Packet, rng: np.random.Generator) -> RoutingDecision:
    """Route per wavelength avoiding the chosen largest gap of F_lambda u {S}.

    The clockwise copy runs from S to the CLG start node and the
    counter-clockwise copy from S to the CLG end node; either may be empty.
    Wavelengths without destinations carry nothing.
    """
    n = topology.n_nodes
    routes = {}
    for lam in range(1, topology.n_wavelengths + 1):
        f_lam = packet.fanout_set.intersection(topology.nodes_on_wavelength(lam))
        if not f_lam:
            continue
        active = sorted(f_lam | {packet.sender})
        choices = largest_gap_choices(n, active)
        start, end = choices[int(rng.integers(0, len(choices)))]
        routes[lam] = WavelengthRoute(
            sender=packet.sender, cw_to=start, ccw_to=end, clg_start=start % n
        )
    return RoutingDecision(topology, routes)


def one_copy_direction(eta_star: int, positions: list[int]) -> tuple[int, int]:
    """Traversal counters (Y_cw, Y_ccw) for destination positions 1..eta_star.

    Positions count nodes homed on the wavelength clockwise from the hotspot;
    the final destination counts as traversed.  The copy goes in the
    direction with the smaller counter, coin-flipping on equality.
    """
    y_cw = max(positions)
    y_ccw = eta_star + 1 - min(positions)
    return y_cw, y_ccw


def route_one_copy(topology: RingTopology, packet: Packet, rng: np.random.Generator) -> RoutingDecision:
    """One-copy routing: only hotspot-source packets change behavior.

    Uniform and hotspot-destination packets still use shortest path.  A
    hotspot-source packet sends, per wavelength with destinations, a single
    copy in the ring direction that traverses fewer homed nodes, so no
    segment is loaded by more than half of the hotspot-source packets.
    """
    if packet.traffic_class is not TrafficClass.HOTSPOT_SRC:
        return route_shortest_path(topology, packet, rng)
    n = topology.n_nodes
    routes = {}
    for lam in range(1, topology.n_wavelengths + 1):
        members = [x for x in topology.nodes_on_wavelength(lam) if x != n]
        f_lam = packet.fanout_set.intersection(members)
        if not f_lam:
            continue
        eta_star = len(members)  # eta, or eta-1 on the hotspot wavelength
        posmap = {node: i + 1 for i, node in enumerate(members)}  # clockwise from N
        positions = [posmap[d] for d in f_lam]
        y_cw, y_ccw = one_copy_direction(eta_star, positions)
        if y_cw < y_ccw or (y_cw == y_ccw and rng.random() < 0.5):
            routes[lam] = WavelengthRoute(sender=n, cw_to=max(f_lam), ccw_to=n)
        else:
            routes[lam] = WavelengthRoute(sender=n, cw_to=n, ccw_to=min(f_lam))
    return RoutingDecision(topology, routes)


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StopRule:
    """Stopping rule: run until every tracked segment whose estimate exceeds
    ``floor`` has a 99% CI half-width below ``rel_halfwidth`` times its mean."""

    rel_halfwidth: float = 0.01
    min_samples: int = 10_000
    max_samples: int = 10_000_000
    batch_size: int = 50_000
    floor: float = 0.01
    tracked: object = "all"  # "all" | "critical" | iterable of SegmentId


@dataclass
class UtilizationMatrix:
    """Per-segment usage counts and estimates, paper-indexed.

    ``counts[d, n-1, lam-1]`` is the number of sampled packets that used
    segment n on wavelength lam in direction d (0=cw, 1=ccw).
    """

    topology: RingTopology
    counts: np.ndarray  # (2, N, Lambda) int64
    n_samples: int
    converged: bool
    seed: object = None

    @property
    def estimates(self) -> np.ndarray:
        return self.counts / max(self.n_samples, 1)

    @property
    def ci_halfwidth(self) -> np.ndarray:
        p = self.estimates
        return Z99 * np.sqrt(p * (1 - p) / max(self.n_samples, 1))

    def _index(self, segment: SegmentId) -> tuple[int, int, int]:
        d = 0 if segment.direction is Direction.CW else 1
        return d, segment.index - 1, segment.wavelength - 1

    def estimate(self, segment: SegmentId) -> float:
        return float(self.estimates[self._index(segment)])

    def halfwidth(self, segment: SegmentId) -> float:
        return float(self.ci_halfwidth[self._index(segment)])

    def argmax_segment(self) -> SegmentId:
        flat = int(np.argmax(self.estimates))
        d, n, lam = np.unravel_index(flat, self.estimates.shape)
        return SegmentId(Direction.CW if d == 0 else Direction.CCW, int(n) + 1, int(lam) + 1)


@dataclass(frozen=True)
class SimCapacity:
    capacity: float
    max_utilization: float
    segment: SegmentId
    ci_halfwidth: float
    n_samples: int
    converged: bool


def estimate_capacity(matrix: UtilizationMatrix) -> SimCapacity:
    """Capacity = 1 / largest estimated utilization over every segment."""
    seg = matrix.argmax_segment()
    p = matrix.estimate(seg)
    if p <= 0.0:
        raise ValueError("no utilization observed; cannot estimate capacity")
    return SimCapacity(
        capacity=1.0 / p,
        max_utilization=p,
        segment=seg,
        ci_halfwidth=matrix.halfwidth(seg),
        n_samples=matrix.n_samples,
        converged=matrix.converged,
    )


class _WavelengthPlan:
    """Precomputed per-wavelength index tables for the batch engine."""

    def __init__(self, topology: RingTopology, lam: int):
        n = topology.n_nodes
        members_paper = topology.nodes_on_wavelength(lam)
        self.members = np.array(sorted(p % n for p in members_paper), dtype=np.int64)
        self.eta = self.members.size
        col = np.full(n, -1, dtype=np.int64)
        col[self.members] = np.arange(self.eta)
        self.member_col = col
        hot = lam == topology.n_wavelengths
        # Clockwise position (1-based) of each member as seen from the
        # hotspot; the hotspot itself (internal node 0) is excluded.
        if hot:
            self.kvals = np.arange(self.eta, dtype=np.int64)  # members[0] == 0
            self.eta_star = self.eta - 1
        else:
            self.kvals = np.arange(1, self.eta + 1, dtype=np.int64)
            self.eta_star = self.eta


class _BatchEngine:
    """Vectorized sampler/router accumulating per-segment usage counts."""

    def __init__(self, topology: RingTopology, traffic: TrafficModel, strategy: str):
        if strategy not in ("sp", "oc"):
            raise ValueError(f"strategy must be 'sp' or 'oc', got {strategy!r}")
        self.topology = topology
        self.traffic = traffic
        self.strategy = strategy
        self.n = topology.n_nodes
        self.n_wavelengths = topology.n_wavelengths
        self.plans = [_WavelengthPlan(topology, lam) for lam in range(1, topology.n_wavelengths + 1)]
        self.class_cum = np.array([traffic.alpha, traffic.alpha + traffic.beta])
        self.fanout_cdf = {
            cls: np.cumsum(traffic.fanout(cls)) for cls in TrafficClass
        }

    def run_batch(self, rng: np.random.Generator, batch: int) -> np.ndarray:
        n, lam_count = self.n, self.n_wavelengths
        cls = np.searchsorted(self.class_cum, rng.random(batch), side="right")
        idx_u = np.nonzero(cls == 0)[0]
        idx_b = np.nonzero(cls == 1)[0]
        idx_g = np.nonzero(cls == 2)[0]

        sender = np.zeros(batch, dtype=np.int64)
        # Internal ids: 0 is the hotspot (paper node N), 1..N-1 as printed.
        sender[idx_u] = rng.integers(0, n, size=idx_u.size)
        sender[idx_b] = rng.integers(1, n, size=idx_b.size)

        l_eff = np.zeros(batch, dtype=np.int64)
        for idx, tc in ((idx_u, TrafficClass.UNIFORM), (idx_b, TrafficClass.HOTSPOT_DEST), (idx_g, TrafficClass.HOTSPOT_SRC)):
            if idx.size:
                l = np.searchsorted(self.fanout_cdf[tc], rng.random(idx.size), side="right") + 1
                l_eff[idx] = l
        l_eff[idx_b] -= 1  # node N is added deterministically below

        # Uniform subset of admissible nodes via smallest random keys.
        keys = rng.random((batch, n))
        keys[np.arange(batch), sender] = np.inf
        keys[idx_b, 0] = np.inf  # hotspot cannot be drawn, it is always in F
        order = np.argsort(keys, axis=1)
        sel = np.arange(n)[None, :] < l_eff[:, None]
        mask = np.zeros((batch, n), dtype=bool)
        np.put_along_axis(mask, order, sel, axis=1)
        mask[idx_b, 0] = True

        counts = np.zeros((2, n, lam_count), dtype=np.int64)
        for w, plan in enumerate(self.plans):
            fmask = mask[:, plan.members]
            if self.strategy == "oc" and idx_g.size:
                sp_rows = np.nonzero((cls != 2) & fmask.any(axis=1))[0]
                oc_rows = idx_g[fmask[idx_g].any(axis=1)]
            else:
                sp_rows = np.nonzero(fmask.any(axis=1))[0]
                oc_rows = np.empty(0, dtype=np.int64)
            cw_diff = np.zeros(2 * n + 1, dtype=np.int64)
            ccw_diff = np.zeros(2 * n + 1, dtype=np.int64)
            if sp_rows.size:
                self._route_sp(rng, plan, fmask[sp_rows], sender[sp_rows], cw_diff, ccw_diff)
            if oc_rows.size:
                self._route_oc(rng, plan, fmask[oc_rows], cw_diff, ccw_diff)
            lin_cw = np.cumsum(cw_diff[: 2 * n])
            lin_ccw = np.cumsum(ccw_diff[: 2 * n])
            internal_cw = lin_cw[:n] + lin_cw[n:]
            internal_ccw = lin_ccw[:n] + lin_ccw[n:]
            # Internal index x = segment entering node x; paper segment n is
            # internal n mod N, so paper order is internal rolled by one.
            counts[0, :, w] = np.roll(internal_cw, -1)
            counts[1, :, w] = np.roll(internal_ccw, -1)
        return counts

    def _route_sp(self, rng, plan, fmask, sender, cw_diff, ccw_diff):
        n = self.n
        rows = fmask.shape[0]
        eta = plan.eta
        nslots = 2 * eta
        pos = np.zeros((rows, nslots), dtype=np.int64)
        act = np.zeros((rows, nslots), dtype=bool)
        pos[:, 0::2] = plan.members
        act[:, 0::2] = fmask
        scol = plan.member_col[sender]
        on = scol >= 0
        r_on = np.nonzero(on)[0]
        act[r_on, 2 * scol[r_on]] = True
        r_off = np.nonzero(~on)[0]
        if r_off.size:
            j0 = np.searchsorted(plan.members, sender[r_off])
            slot = 2 * ((j0 - 1) % eta) + 1
            act[r_off, slot] = True
            # Senders below the first member sit in the wrap interval after
            # the last member; store them shifted by N to keep positions
            # ascending along the slot order.
            pos[r_off, slot] = np.where(j0 == 0, sender[r_off] + n, sender[r_off])

        # Next active position clockwise of each slot (wrapping adds N).
        nextpos = np.zeros((rows, nslots), dtype=np.int64)
        run = np.full(rows, -1, dtype=np.int64)
        for i in range(nslots - 1, -1, -1):
            nextpos[:, i] = run
            run = np.where(act[:, i], pos[:, i], run)
        wrapped = nextpos < 0
        nextpos = np.where(wrapped, run[:, None] + n, nextpos)

        gap = np.where(act, nextpos - pos, -1)
        best = gap.max(axis=1)
        ties = gap == best[:, None]
        cnt = ties.sum(axis=1)
        pick = rng.integers(0, cnt)
        cum = np.cumsum(ties, axis=1)
        chosen = np.argmax((cum == (pick + 1)[:, None]) & ties, axis=1)
        rr = np.arange(rows)
        g_start = pos[rr, chosen] % n
        g_end = nextpos[rr, chosen] % n

        d_cw = (g_start - sender) % n
        d_ccw = (sender - g_end) % n
        self._mark(cw_diff, (sender + 1) % n, d_cw)
        self._mark(ccw_diff, (g_end + 1) % n, d_ccw)

    def _route_oc(self, rng, plan, fmask, cw_diff, ccw_diff):
        n = self.n
        big = np.int64(1 << 40)
        kv = np.where(fmask, plan.kvals[None, :], 0)
        y_cw = kv.max(axis=1)
        kvmin = np.where(fmask, plan.kvals[None, :], big).min(axis=1)
        y_ccw = plan.eta_star + 1 - kvmin
        coin = rng.random(fmask.shape[0]) < 0.5
        go_cw = (y_cw < y_ccw) | ((y_cw == y_ccw) & coin)

        far_cw = plan.members[np.argmax(kv, axis=1)]
        far_ccw = plan.members[np.argmin(np.where(fmask, plan.kvals[None, :], big), axis=1)]
        # Clockwise copy 0 -> far_cw covers internal cw segments 1..far_cw;
        # counter-clockwise copy 0 -> far_ccw covers ccw segments far_ccw+1..0.
        d_cw = np.where(go_cw, far_cw, 0)
        d_ccw = np.where(go_cw, 0, n - far_ccw)
        ones = np.ones(fmask.shape[0], dtype=np.int64)
        self._mark(cw_diff, ones, d_cw)
        self._mark(ccw_diff, (far_ccw + 1) % n, d_ccw)

    @staticmethod
    def _mark(diff, start, length):
        use = length > 0
        if not np.any(use):
            return
        a = start[use]
        np.add.at(diff, a, 1)
        np.add.at(diff, a + length[use], -1)


def _resolve_tracked(topology: RingTopology, stop_rule: StopRule):
    """Boolean mask (2, N, Lambda) of segments subject to the stopping rule."""
    n, lams = topology.n_nodes, topology.n_wavelengths
    if isinstance(stop_rule.tracked, str):
        if stop_rule.tracked == "all":
            return np.ones((2, n, lams), dtype=bool)
        if stop_rule.tracked == "critical":
            segs = [
                SegmentId(Direction.CW, 1, 1),
                SegmentId(Direction.CW, lams, lams),
                SegmentId(Direction.CW, n, lams),
            ]
        else:
            raise ValueError(f"unknown tracked spec {stop_rule.tracked!r}")
    else:
        segs = list(stop_rule.tracked)
    m = np.zeros((2, n, lams), dtype=bool)
    for s in segs:
        d = 0 if s.direction is Direction.CW else 1
        m[d, s.index - 1, s.wavelength - 1] = True
    return m


def estimate_utilization(
    topology: RingTopology,
    traffic: TrafficModel,
    strategy: str = "sp",
    seed=None,
    stop_rule: StopRule | None = None,
    n_workers: int = 1,
) -> UtilizationMatrix:
    """Estimate P(segment used) for every (direction, segment, wavelength).

    Samples i.i.d. packets in batches until the stopping rule is met or the
    sample budget is exhausted (then the matrix is flagged non-converged).
    One RNG stream per worker, spawned from the seed, makes results
    bit-identical for a fixed (seed, n_workers).
    """
    rule = stop_rule or StopRule()
    if traffic.n_nodes != topology.n_nodes:
        raise ValueError("traffic model and topology disagree on N")
    engine = _BatchEngine(topology, traffic, strategy)
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = [np.random.default_rng(s) for s in seq.spawn(max(1, n_workers))]
    tracked = _resolve_tracked(topology, rule)

    counts = np.zeros((2, topology.n_nodes, topology.n_wavelengths), dtype=np.int64)
    n_done = 0
    converged = False
    while n_done < rule.max_samples:
        todo = rule.max_samples - n_done
        per_worker = min(rule.batch_size, -(-todo // len(streams)))
        sizes = [min(per_worker, max(0, todo - i * per_worker)) for i in range(len(streams))]
        if len(streams) > 1:
            with ThreadPoolExecutor(max_workers=len(streams)) as pool:
                futs = [
                    pool.submit(engine.run_batch, rng, b)
                    for rng, b in zip(streams, sizes)
                    if b > 0
                ]
                for f in futs:
                    counts += f.result()
        else:
            for rng, b in zip(streams, sizes):
                if b > 0:
                    counts += engine.run_batch(rng, b)
        n_done += sum(sizes)
        if n_done >= rule.min_samples:
            p = counts / n_done
            hw = Z99 * np.sqrt(p * (1 - p) / n_done)
            active = tracked & (p > rule.floor)
            if not np.any(active) or np.all(hw[active] < rule.rel_halfwidth * p[active]):
                converged = True
                break
    return UtilizationMatrix(
        topology=topology,
        counts=counts,
        n_samples=n_done,
        converged=converged,
        seed=seed,
    )

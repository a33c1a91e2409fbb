"""Exact small-instance evaluation of the probabilistic routing model.

Routing on a wavelength depends on a packet only through the sender and the
destinations homed there, so utilization probabilities can be computed
per wavelength by enumerating (sender, on-wavelength fanout set) pairs and
weighting each with its exact probability under the traffic model.  Routing
ties contribute 1/#ties per choice and the one-copy coin 1/2 per branch, so
the result is a deterministic table of rational probabilities that serves as
ground truth for both the closed-form analytics and the Monte-Carlo
estimates.

Cost per wavelength and class is roughly N * sum_ell C(eta, ell) over the
fanout counts ell that the traffic model can actually produce; instances
beyond eta <= 16, N <= 64 (or an explicit evaluation budget) are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, lcm

from .simulate import largest_gap_choices, one_copy_direction
from .topology import Direction, RingTopology, SegmentId
from .traffic import TrafficClass, TrafficModel

__all__ = [
    "ExactUtilization",
    "InstanceTooLargeError",
    "exact_utilization",
    "exact_gap_start_distribution",
    "exact_expected_clg",
]


class InstanceTooLargeError(ValueError):
    """Raised when exact enumeration would be unreasonably expensive."""


def _comb0(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


def _sender_space(traffic_class: TrafficClass, n: int) -> tuple[list[int], Fraction]:
    if traffic_class is TrafficClass.UNIFORM:
        return list(range(1, n + 1)), Fraction(1, n)
    if traffic_class is TrafficClass.HOTSPOT_DEST:
        return list(range(1, n)), Fraction(1, n - 1)
    return [n], Fraction(1)


def _lambda_pool(
    topology: RingTopology, traffic_class: TrafficClass, wavelength: int, sender: int
) -> tuple[list[int], list[int]]:
    """(on-wavelength destination pool, pinned destinations) for one sender."""
    n = topology.n_nodes
    members = topology.nodes_on_wavelength(wavelength)
    hot = wavelength == topology.n_wavelengths
    if traffic_class is TrafficClass.UNIFORM:
        return [x for x in members if x != sender], []
    if traffic_class is TrafficClass.HOTSPOT_DEST:
        if hot:
            return [x for x in members if x not in (n, sender)], [n]
        return [x for x in members if x != sender], []
    return [x for x in members if x != n], []


def _free_weight(
    traffic_class: TrafficClass,
    n: int,
    other: int,
    pmf: list[Fraction],
    ell_free: int,
) -> Fraction:
    """Probability that the fanout set equals one specific admissible set
    whose on-wavelength free part has ``ell_free`` nodes; ``other`` counts the
    admissible nodes living on other wavelengths."""
    total = Fraction(0)
    for l0, p in enumerate(pmf):
        if p == 0:
            continue
        l = l0 + 1
        if traffic_class is TrafficClass.HOTSPOT_DEST:
            num = _comb0(other, (l - 1) - ell_free)
            den = comb(n - 2, l - 1)
        else:
            num = _comb0(other, l - ell_free)
            den = comb(n - 1, l)
        if num:
            total += p * Fraction(num, den)
    return total


@dataclass
class ExactUtilization:
    """Exact per-segment utilization probabilities (and CLG statistics)."""

    topology: RingTopology
    strategy: str
    probs: list  # [dir][n-1][lam-1] -> Fraction, paper indexing
    gap_start: list  # [lam-1][node 0..N-1] -> Fraction (SP only, else zeros)
    sender_pmf: list  # [node 0..N-1] -> Fraction
    clg_expected: list  # [lam-1] -> Fraction, E|CLG_lambda| incl. empty copies

    def prob(self, segment: SegmentId) -> Fraction:
        d = 0 if segment.direction is Direction.CW else 1
        return self.probs[d][segment.index - 1][segment.wavelength - 1]

    def max_clockwise(self) -> Fraction:
        return max(
            self.probs[0][i][w]
            for i in range(self.topology.n_nodes)
            for w in range(self.topology.n_wavelengths)
        )

    def max_overall(self) -> Fraction:
        return max(
            self.probs[d][i][w]
            for d in (0, 1)
            for i in range(self.topology.n_nodes)
            for w in range(self.topology.n_wavelengths)
        )


def _check_instance(topology: RingTopology, traffic: TrafficModel, max_evals: int) -> None:
    n = topology.n_nodes
    eta = topology.nodes_per_wavelength
    if eta > 16 or n > 64:
        raise InstanceTooLargeError(f"exact oracle limited to eta<=16, N<=64 (got eta={eta}, N={n})")
    evals = 0
    for cls in TrafficClass:
        if traffic.class_weight(cls) == 0:
            continue
        pmf = traffic.fanout(cls)
        support = [l0 + 1 for l0, p in enumerate(pmf) if p != 0]
        if not support:
            continue
        lmax = max(support)
        senders = n if cls is TrafficClass.UNIFORM else (n - 1 if cls is TrafficClass.HOTSPOT_DEST else 1)
        for _ in range(topology.n_wavelengths):
            cap = min(eta, lmax)
            evals += senders * sum(comb(eta, e) for e in range(cap + 1))
    if evals > max_evals:
        raise InstanceTooLargeError(f"estimated {evals} routing evaluations exceed budget {max_evals}")


def exact_utilization(
    topology: RingTopology,
    traffic: TrafficModel,
    strategy: str = "sp",
    max_evals: int = 5_000_000,
) -> ExactUtilization:
    """Enumerate the model exactly; see module docstring for the method."""
    if strategy not in ("sp", "oc"):
        raise ValueError(f"strategy must be 'sp' or 'oc', got {strategy!r}")
    _check_instance(topology, traffic, max_evals)
    n = topology.n_nodes
    lams = topology.n_wavelengths

    # Normalize the float-derived rationals so the enumeration is a true
    # probability measure; otherwise identities hold only up to ~1e-16.
    raw_w = {cls: Fraction(traffic.class_weight(cls)) for cls in TrafficClass}
    mix_total = sum(raw_w.values())
    class_w = {cls: w / mix_total for cls, w in raw_w.items()}
    pmfs = {}
    for cls in TrafficClass:
        p = [Fraction(x) for x in traffic.fanout(cls)]
        tot = sum(p)
        pmfs[cls] = [x / tot for x in p]

    probs = [[[Fraction(0)] * lams for _ in range(n)] for _ in (0, 1)]
    gap_start = [[Fraction(0)] * n for _ in range(lams)]
    clg_expected = [Fraction(0) for _ in range(lams)]
    # Scale factor covering every tie count and the one-copy coin.
    scale = lcm(*range(1, topology.nodes_per_wavelength + 3))

    for lam in range(1, lams + 1):
        w_idx = lam - 1
        for cls in TrafficClass:
            if class_w[cls] == 0:
                continue
            senders, p_sender = _sender_space(cls, n)
            sp_routed = strategy == "sp" or cls is not TrafficClass.HOTSPOT_SRC
            # Integer usage counters keyed by the per-subset weight; the
            # weight only depends on (sender-on-wavelength, ell_free).
            acc: dict[Fraction, list] = {}
            for s in senders:
                pool, pinned = _lambda_pool(topology, cls, lam, s)
                other = (n - 2 if cls is TrafficClass.HOTSPOT_DEST else n - 1) - len(pool)
                for ell_free in range(len(pool) + 1):
                    w = _free_weight(cls, n, other, pmfs[cls], ell_free)
                    if w == 0:
                        continue
                    rec = acc.setdefault(w, [[0] * (2 * n + 1), [0] * (2 * n + 1), [0] * n, 0])
                    cw_cnt, ccw_cnt, gs_cnt, clg_sum = rec
                    for combo in combinations(pool, ell_free):
                        f_lam = list(combo) + pinned
                        if sp_routed:
                            active = sorted(set(f_lam) | {s})
                            choices = largest_gap_choices(n, active)
                            share = scale // len(choices)
                            if len(active) == 1:
                                # no transmission; CLG is the whole ring at S
                                gs_cnt[s % n] += scale
                                rec[3] += scale * n
                                continue
                            for start, end in choices:
                                gs_cnt[start % n] += share
                                rec[3] += share * ((end - start) % n)
                                d_cw = (start - s) % n
                                if d_cw:
                                    a = (s + 1) % n
                                    cw_cnt[a] += share
                                    cw_cnt[a + d_cw] -= share
                                d_ccw = (s - end) % n
                                if d_ccw:
                                    a = (end + 1) % n
                                    ccw_cnt[a] += share
                                    ccw_cnt[a + d_ccw] -= share
                        else:
                            # one-copy routing for hotspot-source packets
                            if not f_lam:
                                continue
                            members = [x for x in topology.nodes_on_wavelength(lam) if x != n]
                            posmap = {node: i + 1 for i, node in enumerate(members)}
                            y_cw, y_ccw = one_copy_direction(len(members), [posmap[d] for d in f_lam])
                            branches = []
                            if y_cw <= y_ccw:
                                branches.append(("cw", scale if y_cw < y_ccw else scale // 2))
                            if y_ccw <= y_cw:
                                branches.append(("ccw", scale if y_ccw < y_cw else scale // 2))
                            for direction, share in branches:
                                if direction == "cw":
                                    d_cw = max(f_lam) % n
                                    cw_cnt[1] += share
                                    cw_cnt[1 + d_cw] -= share
                                else:
                                    far = min(f_lam)
                                    a = (far + 1) % n
                                    ccw_cnt[a] += share
                                    ccw_cnt[a + (n - far)] -= share
            for w, (cw_cnt, ccw_cnt, gs_cnt, clg_sum) in acc.items():
                wgt = class_w[cls] * p_sender * w / scale
                for arr, d in ((cw_cnt, 0), (ccw_cnt, 1)):
                    run = 0
                    usage = [0] * n
                    for i in range(2 * n):
                        run += arr[i]
                        usage[i % n] += run
                    for i in range(n):
                        if usage[i]:
                            # internal index i = segment entering node i;
                            # paper segment index is i for i>=1, N for i=0
                            paper = i if i >= 1 else n
                            probs[d][paper - 1][w_idx] += wgt * usage[i]
                for node in range(n):
                    if gs_cnt[node]:
                        gap_start[w_idx][node] += wgt * gs_cnt[node]
                clg_expected[w_idx] += wgt * clg_sum

    sender_pmf = [Fraction(0)] * n
    for cls in TrafficClass:
        if class_w[cls] == 0:
            continue
        senders, p_sender = _sender_space(cls, n)
        for s in senders:
            sender_pmf[s % n] += class_w[cls] * p_sender

    return ExactUtilization(
        topology=topology,
        strategy=strategy,
        probs=probs,
        gap_start=gap_start,
        sender_pmf=sender_pmf,
        clg_expected=clg_expected,
    )


def exact_gap_start_distribution(
    topology: RingTopology,
    traffic_class: TrafficClass,
    wavelength: int,
    ell: int,
    fanout_pmf=None,
) -> list[Fraction]:
    """Exact pmf of the CLG start node given ell destinations on the wavelength.

    Senders are weighted by the class sender measure; with ``fanout_pmf`` the
    conditioning on the on-wavelength fanout count is exact, otherwise each
    admissible sender contributes its uniform fanout-set average directly.
    Entry ``node % N`` of the result is P(G_lambda = node), node N appearing
    as 0.
    """
    n = topology.n_nodes
    topology.check_wavelength(wavelength)
    if topology.nodes_per_wavelength > 16 or n > 64:
        raise InstanceTooLargeError("limited to eta<=16, N<=64")
    pinned_count = 1 if (
        traffic_class is TrafficClass.HOTSPOT_DEST and wavelength == topology.n_wavelengths
    ) else 0
    ell_free = ell - pinned_count
    if ell_free < 0:
        raise ValueError(f"ell={ell} impossible for this class/wavelength")
    pmf = None if fanout_pmf is None else [Fraction(x) for x in fanout_pmf]
    senders, p_sender = _sender_space(traffic_class, n)
    dist = [Fraction(0)] * n
    total = Fraction(0)
    for s in senders:
        pool, pinned = _lambda_pool(topology, traffic_class, wavelength, s)
        if ell_free > len(pool):
            continue
        if pmf is None:
            w_subset = Fraction(1, comb(len(pool), ell_free))
        else:
            other = (n - 2 if traffic_class is TrafficClass.HOTSPOT_DEST else n - 1) - len(pool)
            w_subset = _free_weight(traffic_class, n, other, pmf, ell_free)
        if w_subset == 0:
            continue
        for combo in combinations(pool, ell_free):
            active = sorted(set(combo) | set(pinned) | {s})
            choices = largest_gap_choices(n, active)
            share = w_subset * p_sender / len(choices)
            for start, _end in choices:
                dist[start % n] += share
            total += w_subset * p_sender
    if total == 0:
        raise ValueError(f"ell={ell} has zero probability on wavelength {wavelength}")
    return [x / total for x in dist]


def exact_expected_clg(topology: RingTopology, wavelength: int, ell: int) -> Fraction:
    """E(|CLG_lambda|) for uniform traffic given ell on-wavelength destinations.

    Senders are uniform over all nodes and the fanout set uniform over the
    admissible ell-subsets of the wavelength's home nodes.
    """
    n = topology.n_nodes
    topology.check_wavelength(wavelength)
    if topology.nodes_per_wavelength > 16 or n > 64:
        raise InstanceTooLargeError("limited to eta<=16, N<=64")
    total = Fraction(0)
    weight = Fraction(0)
    for s in range(1, n + 1):
        pool, _ = _lambda_pool(topology, TrafficClass.UNIFORM, wavelength, s)
        if ell > len(pool):
            continue
        w = Fraction(1, n) * Fraction(1, comb(len(pool), ell))
        for combo in combinations(pool, ell):
            active = sorted(set(combo) | {s})
            if len(active) == 1:
                total += w * n
            else:
                m = len(active)
                best = max(
                    ((active[(i + 1) % m] - active[i]) % n or n) for i in range(m)
                )
                total += w * best
        weight += w * comb(len(pool), ell)
    return total / weight

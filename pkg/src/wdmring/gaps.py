"""Exact gap combinatorics on a ring.

Place l+1 active nodes uniformly at random on a ring of N nodes and look at
the l+1 gaps (hop runs) between circularly consecutive active nodes.  This
module computes

* ``gap_pmf``            -- probability that one particular gap has k hops,
* ``largest_gap_pmf``    -- distribution of the longest gap (two-term
                            recursion, memoized over (l, N)),
* ``expected_largest_gap`` -- its mean g(l, N), with the conventions
                            g(0,N)=N, g(N-1,N)=1 and g(l,N)=0 for l >= N,
* ``wavelength_fanout_pmf`` -- the hypergeometric mixtures that map a global
                            fanout pmf to the per-wavelength destination
                            count pmf for each traffic class.

Float mode drives the numeric sweeps; exact Fraction mode certifies the
recursion against brute-force enumeration in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping

import numpy as np

from .topology import RingTopology
from .traffic import PMF_TOL, TrafficClass

__all__ = [
    "gap_pmf",
    "largest_gap_pmf",
    "expected_largest_gap",
    "wavelength_fanout_pmf",
    "LargestGapPmf",
    "WavelengthFanoutPmf",
]


def _comb0(n: int, k: int) -> int:
    """Binomial coefficient that is zero for impossible arguments."""
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


def _check_gap_args(l: int, n: int) -> None:
    if n < 1:
        raise ValueError(f"ring size N={n} must be positive")
    if not 0 <= l <= n - 1:
        raise ValueError(f"l={l} outside 0..N-1={n - 1}")


def gap_pmf(l: int, n: int, k: int, exact: bool = False) -> float | Fraction:
    """P(an arbitrary gap has k hops) with l+1 active nodes on an N-ring.

    Equals C(N-k-1, l-1) / C(N-1, l); the degenerate l=0 case has a single
    gap of length N.
    """
    _check_gap_args(l, n)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..N={n}")
    if l == 0:
        p = Fraction(1 if k == n else 0)
    else:
        p = Fraction(_comb0(n - k - 1, l - 1), comb(n - 1, l))
    return p if exact else float(p)


@dataclass(frozen=True)
class LargestGapPmf:
    """Distribution of the longest gap for l+1 active nodes on an N-ring."""

    n_nodes: int
    n_active_minus_one: int
    probs: tuple  # index k in 0..N, entry 0 unused

    def prob(self, k: int) -> float | Fraction:
        if 1 <= k <= self.n_nodes:
            return self.probs[k]
        return type(self.probs[1])(0)

    def as_dict(self) -> Mapping[int, float | Fraction]:
        return {k: p for k, p in enumerate(self.probs) if k >= 1 and p != 0}

    def expected(self):
        return sum(k * p for k, p in enumerate(self.probs))

    @property
    def support(self) -> tuple[int, int]:
        ks = [k for k, p in enumerate(self.probs) if k >= 1 and p != 0]
        return (min(ks), max(ks))


# Memo tables: write-once per key, safe for concurrent readers once filled.
_Q_FLOAT: dict[tuple[int, int], np.ndarray] = {}
_Q_EXACT: dict[tuple[int, int], tuple[Fraction, ...]] = {}


def _delta(n: int, at: int, exact: bool):
    if exact:
        row = [Fraction(0)] * (n + 1)
        row[at] = Fraction(1)
        return tuple(row)
    row = np.zeros(n + 1)
    row[at] = 1.0
    return row


def _q_exact(l: int, n: int) -> tuple[Fraction, ...]:
    key = (l, n)
    cached = _Q_EXACT.get(key)
    if cached is not None:
        return cached
    if l == 0:
        q = _delta(n, n, exact=True)
    elif l == n - 1:
        q = _delta(n, 1, exact=True)
    else:
        p = [Fraction(0)] + [gap_pmf(l, n, m, exact=True) for m in range(1, n + 1)]
        q = [Fraction(0)] * (n + 1)
        for k in range(1, n - l + 1):
            child = _q_exact(l - 1, n - k)
            total = p[k] * sum(child[1 : min(k, n - k) + 1])
            for m in range(1, k):
                childm = _q_exact(l - 1, n - m)
                if k <= n - m:
                    total += p[m] * childm[k]
            q[k] = total
        q = tuple(q)
    _Q_EXACT[key] = tuple(q)
    return _Q_EXACT[key]


def _q_float(l: int, n: int) -> np.ndarray:
    key = (l, n)
    cached = _Q_FLOAT.get(key)
    if cached is not None:
        return cached
    if l == 0:
        q = _delta(n, n, exact=False)
    elif l == n - 1:
        q = _delta(n, 1, exact=False)
    else:
        # Children first: level l-1 at every smaller ring size that can occur.
        for np_ in range(l, n):
            _q_float(l - 1, np_)
        p = np.zeros(n + 1)
        for m in range(1, n - l + 1):
            p[m] = gap_pmf(l, n, m)
        # Row m holds q_{l-1, n-m} padded to length n+1 (m = 1..n-l).
        mat = np.zeros((n + 1, n + 1))
        for m in range(1, n - l + 1):
            child = _Q_FLOAT[(l - 1, n - m)]
            mat[m, : child.size] = child
        cum = np.cumsum(mat, axis=1)
        ks = np.arange(n + 1)
        term1 = p * cum[ks, ks]  # p(k) * sum_{m<=k} q_{l-1,n-k}(m)
        lower = (ks[:, None] < ks[None, :]).astype(float)  # m < k mask
        term2 = p @ (mat * lower)
        q = term1 + term2
    _Q_FLOAT[key] = q
    return q


def largest_gap_pmf(l: int, n: int, exact: bool = False) -> LargestGapPmf:
    """Distribution q_{l,N} of the longest gap, by the two-term recursion.

    Conditions on the length of the gap that ends at a fixed active node:
    either it is itself the maximum (no later gap exceeds it) or the maximum
    sits among the remaining l gaps on the shortened ring.
    """
    _check_gap_args(l, n)
    probs = _q_exact(l, n) if exact else tuple(_q_float(l, n))
    return LargestGapPmf(n_nodes=n, n_active_minus_one=l, probs=probs)


def expected_largest_gap(l: int, n: int, exact: bool = False) -> float | Fraction:
    """g(l, N): expected longest gap; 0 for l >= N, N at l=0, 1 at l=N-1."""
    if n < 1:
        raise ValueError(f"ring size N={n} must be positive")
    if l < 0:
        raise ValueError(f"l={l} must be non-negative")
    zero = Fraction(0) if exact else 0.0
    if l >= n:
        return zero
    if l == 0:
        return Fraction(n) if exact else float(n)
    if l == n - 1:
        return Fraction(1) if exact else 1.0
    return largest_gap_pmf(l, n, exact=exact).expected()


# ---------------------------------------------------------------------------
# Per-wavelength fanout distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WavelengthFanoutPmf:
    """pmf of the number of destinations landing on one wavelength."""

    wavelength: int
    traffic_class: TrafficClass
    probs: np.ndarray  # index ell, length eta+1 (trailing entries may be 0)

    def prob(self, ell: int) -> float:
        if 0 <= ell < self.probs.size:
            return float(self.probs[ell])
        return 0.0  # out-of-support queries are zero by convention

    @property
    def support_max(self) -> int:
        return self.probs.size - 1


def wavelength_fanout_pmf(
    topology: RingTopology,
    wavelength: int,
    traffic_class: TrafficClass,
    base_pmf: np.ndarray,
) -> WavelengthFanoutPmf:
    """Mix the global fanout pmf down to one wavelength.

    The kernels are hypergeometric: of the l destinations drawn, how many
    fall among the (roughly) eta nodes homed on the wavelength.  The hotspot
    wavelength Lambda is special for hotspot traffic because node N is
    pinned there (always a destination for hotspot-destination packets,
    never available for hotspot-source packets).  Binomial factors with
    impossible arguments contribute zero.
    """
    topology.check_wavelength(wavelength)
    n = topology.n_nodes
    eta = topology.nodes_per_wavelength
    base_pmf = np.asarray(base_pmf, dtype=float)
    if base_pmf.shape != (n - 1,):
        raise ValueError(f"base_pmf must have N-1={n - 1} entries")
    if abs(base_pmf.sum() - 1.0) > PMF_TOL:
        raise ValueError(f"base_pmf sums to {base_pmf.sum()}, not 1")

    hot = wavelength == topology.n_wavelengths
    out = np.zeros(eta + 1)
    for ell in range(eta + 1):
        acc = 0.0
        for l in range(1, n):
            w = base_pmf[l - 1]
            if w == 0.0:
                continue
            if traffic_class is TrafficClass.UNIFORM:
                num = _comb0(eta, ell) * _comb0(n - eta, l - ell)
                den = comb(n, l)
            elif traffic_class is TrafficClass.HOTSPOT_DEST:
                if hot:
                    num = _comb0(eta - 1, ell - 1) * _comb0(n - eta, l - ell)
                else:
                    num = _comb0(eta, ell) * _comb0(n - eta - 1, l - ell - 1)
                den = comb(n - 1, l - 1)
            else:  # HOTSPOT_SRC
                if hot:
                    num = _comb0(eta - 1, ell) * _comb0(n - eta, l - ell)
                else:
                    num = _comb0(eta, ell) * _comb0(n - 1 - eta, l - ell)
                den = comb(n - 1, l)
            if num:
                acc += w * num / den
        out[ell] = acc
    return WavelengthFanoutPmf(wavelength=wavelength, traffic_class=traffic_class, probs=out)

"""Ring topology: node/wavelength indexing, shifts, and critical segments.

Nodes are indexed 1..N clockwise.  Node N is the hotspot; in modular
arithmetic it is the same entity as node 0, and every public function
normalizes results back into {1..N}.  Node n listens (drops) on wavelength
((n-1) mod Lambda) + 1, so the hotspot is homed on wavelength Lambda.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Direction(enum.Enum):
    CW = "cw"
    CCW = "ccw"


@dataclass(frozen=True)
class RingTopology:
    """Bidirectional WDM ring with N nodes and Lambda wavelengths per fiber."""

    n_nodes: int
    n_wavelengths: int

    def __post_init__(self) -> None:
        n, lam = self.n_nodes, self.n_wavelengths
        if not (isinstance(n, int) and isinstance(lam, int)):
            raise TypeError("n_nodes and n_wavelengths must be integers")
        if n < 1 or lam < 1:
            raise ValueError("n_nodes and n_wavelengths must be positive")
        if n % lam != 0:
            raise ValueError(
                f"n_nodes={n} must be a multiple of n_wavelengths={lam} "
                "(integer number of nodes per drop wavelength)"
            )

    @property
    def nodes_per_wavelength(self) -> int:
        """eta = N / Lambda, the number of nodes sharing one drop wavelength."""
        return self.n_nodes // self.n_wavelengths

    @property
    def hotspot(self) -> int:
        return self.n_nodes

    def normalize_node(self, node: int) -> int:
        """Map any integer node label onto the canonical range {1..N}."""
        return (node - 1) % self.n_nodes + 1

    def check_node(self, node: int) -> int:
        if not 1 <= node <= self.n_nodes:
            raise ValueError(f"node {node} outside 1..{self.n_nodes}")
        return node

    def check_wavelength(self, wavelength: int) -> int:
        if not 1 <= wavelength <= self.n_wavelengths:
            raise ValueError(
                f"wavelength {wavelength} outside 1..{self.n_wavelengths}"
            )
        return wavelength

    def home_wavelength(self, node: int) -> int:
        """Drop wavelength of ``node``: ((node-1) mod Lambda) + 1."""
        self.check_node(node)
        return (node - 1) % self.n_wavelengths + 1

    def nodes_on_wavelength(self, wavelength: int) -> list[int]:
        """M_lambda = {lambda + k*Lambda}, ascending; contains N iff lambda == Lambda."""
        self.check_wavelength(wavelength)
        lam = self.n_wavelengths
        return [wavelength + k * lam for k in range(self.nodes_per_wavelength)]

    def shift_down(self, node: int, wavelength: int) -> int:
        """Nearest node homed on ``wavelength`` counter-clockwise of ``node``.

        Fixed point when ``node`` is itself homed there.
        """
        self.check_node(node)
        self.check_wavelength(wavelength)
        lam = self.n_wavelengths
        raw = ((node - wavelength) // lam) * lam + wavelength
        return self.normalize_node(raw)

    def shift_up(self, node: int, wavelength: int) -> int:
        """Nearest node homed on ``wavelength`` clockwise of ``node``."""
        self.check_node(node)
        self.check_wavelength(wavelength)
        lam = self.n_wavelengths
        raw = -((wavelength - node) // lam) * lam + wavelength  # ceil division
        return self.normalize_node(raw)

    def hop_distance_cw(self, a: int, b: int) -> int:
        """Number of clockwise hops from node a to node b."""
        return (b - a) % self.n_nodes

    def critical_segments(self, wavelength: int) -> list["SegmentId"]:
        """Segments entering the nodes of M_lambda, in both ring directions.

        Clockwise these are the segments u_{lambda+k*Lambda}; counter-clockwise
        the segments u_{lambda+1+k*Lambda}.  Non-critical segments never carry
        more traffic than the next critical one downstream.
        """
        self.check_wavelength(wavelength)
        lam = self.n_wavelengths
        out = []
        for k in range(self.nodes_per_wavelength):
            out.append(SegmentId(Direction.CW, wavelength + k * lam, wavelength))
        for k in range(self.nodes_per_wavelength):
            idx = self.normalize_node(wavelength + 1 + k * lam)
            out.append(SegmentId(Direction.CCW, idx, wavelength))
        return out


@dataclass(frozen=True)
class SegmentId:
    """One directed fiber segment on one wavelength.

    Clockwise segment n connects node n-1 to node n; counter-clockwise
    segment n connects node n to node n-1.
    """

    direction: Direction
    index: int
    wavelength: int

    def __str__(self) -> str:
        return f"{self.direction.value}:u_{self.index}@{self.wavelength}"

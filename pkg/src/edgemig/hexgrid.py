"""Hexagonal cell geometry in axial coordinates.

Offsets are indexed as (ring, index): ring i holds 6i cells, index 0 sits
at i * DIRECTIONS[0] and indices increase counterclockwise. With this
convention (3, 2) -> (2, 1) -> (1, 0) is a shortest path, and (3, 2) is
one hop from both (2, 1) and (2, 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# axial (q, r); DIRECTIONS[k + 1] - DIRECTIONS[k] == DIRECTIONS[k + 2]
DIRECTIONS = ((1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1))


def axial_distance(a, b) -> int:
    dq = a[0] - b[0]
    dr = a[1] - b[1]
    return (abs(dq) + abs(dr) + abs(dq + dr)) // 2


def axial_norm(a) -> int:
    return (abs(a[0]) + abs(a[1]) + abs(a[0] + a[1])) // 2


@dataclass(frozen=True, order=True)
class HexOffset:
    ring: int
    index: int = 0

    def __post_init__(self):
        if self.ring < 0:
            raise ValueError(f"ring must be >= 0, got {self.ring}")
        hi = 1 if self.ring == 0 else 6 * self.ring
        if not 0 <= self.index < hi:
            raise ValueError(f"index {self.index} outside [0, {hi}) for ring {self.ring}")

    @property
    def axial(self) -> tuple[int, int]:
        return ring_index_to_axial(self.ring, self.index)

    @classmethod
    def from_axial(cls, q, r) -> "HexOffset":
        return cls(*axial_to_ring_index(q, r))

    def __repr__(self):
        return f"HexOffset({self.ring}, {self.index})"


def ring_index_to_axial(ring: int, index: int) -> tuple[int, int]:
    if ring == 0:
        return (0, 0)
    side, step = divmod(index, ring)
    cq, cr = DIRECTIONS[side]
    tq, tr = DIRECTIONS[(side + 2) % 6]
    return (ring * cq + step * tq, ring * cr + step * tr)


def axial_to_ring_index(q: int, r: int) -> tuple[int, int]:
    ring = axial_norm((q, r))
    if ring == 0:
        return (0, 0)
    for side in range(6):
        cq, cr = DIRECTIONS[side]
        tq, tr = DIRECTIONS[(side + 2) % 6]
        # solve (q, r) = ring * corner + step * tangent for an integer step
        dq, dr = q - ring * cq, r - ring * cr
        if tq != 0:
            step, rest = divmod(dq, tq)
            ok = rest == 0 and dr == step * tr
        else:
            step, rest = divmod(dr, tr)
            ok = rest == 0 and dq == 0
        if ok and 0 <= step < ring:
            return ring, side * ring + step
    raise AssertionError(f"no ring position for {(q, r)}")  # unreachable


def ring_cells(ring: int) -> list[tuple[int, int]]:
    if ring == 0:
        return [(0, 0)]
    return [ring_index_to_axial(ring, j) for j in range(6 * ring)]


def hex_distance(s1: HexOffset, s2: HexOffset) -> int:
    return axial_distance(s1.axial, s2.axial)


def neighbors(s: HexOffset) -> list[HexOffset]:
    q, r = s.axial
    return [HexOffset.from_axial(q + dq, r + dr) for dq, dr in DIRECTIONS]


def state_count(n_max: int) -> int:
    """Number of offsets with ring <= n_max (3N^2 + 3N plus the origin)."""
    return 3 * n_max * n_max + 3 * n_max + 1


def toward_ring(cell, target_ring: int) -> tuple[int, int]:
    """Cell of ring ``target_ring`` on a shortest path from ``cell`` to the origin.

    Among the valid end points the one with the smallest ring index wins.
    Works for any axial cell, inside or outside a truncated grid.
    """
    ring = axial_norm(cell)
    if target_ring >= ring:
        return tuple(cell)
    hops = ring - target_ring
    for c in ring_cells(target_ring):
        if axial_distance(cell, c) == hops:
            return c
    raise AssertionError("hexagon rings always admit a shortest path")  # unreachable


class HexGrid:
    """All offsets with ring <= n_max plus the dense tables the solvers need.

    States are numbered in (ring, index) order, so state 0 is the origin.
    """

    def __init__(self, n_max: int):
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        self.n_max = n_max
        self.offsets = [HexOffset(i, j) for i in range(n_max + 1) for j in range(1 if i == 0 else 6 * i)]
        self.axial = np.array([o.axial for o in self.offsets], dtype=np.int64)
        self.index_of = {tuple(a): k for k, a in enumerate(map(tuple, self.axial.tolist()))}
        self.ring = np.array([o.ring for o in self.offsets], dtype=np.int64)
        self.size = len(self.offsets)
        dq = self.axial[:, None, 0] - self.axial[None, :, 0]
        dr = self.axial[:, None, 1] - self.axial[None, :, 1]
        self.dist = (np.abs(dq) + np.abs(dr) + np.abs(dq + dr)) // 2

        # neighbour table; -1 marks cells beyond ring n_max
        nb = np.full((self.size, 6), -1, dtype=np.int64)
        for k, (q, r) in enumerate(self.axial.tolist()):
            for m, (a, b) in enumerate(DIRECTIONS):
                nb[k, m] = self.index_of.get((q + a, r + b), -1)
        self.neighbor_index = nb

        # toward[s, i']: shortest-path cell in ring i' (s itself when i' >= ring(s))
        toward = np.empty((self.size, n_max + 1), dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum([1] + [6 * i for i in range(1, n_max + 1)])])
        for s in range(self.size):
            i = self.ring[s]
            for t in range(n_max + 1):
                if t >= i:
                    toward[s, t] = s
                    continue
                lo, hi = starts[t], starts[t + 1]
                hits = np.nonzero(self.dist[s, lo:hi] == i - t)[0]
                toward[s, t] = lo + hits[0]
        self.toward = toward
        self.ring_start = starts

    def state(self, offset: HexOffset) -> int:
        return self.index_of[offset.axial]

    def state_of_axial(self, q, r) -> int:
        return self.index_of[(q, r)]


@lru_cache(maxsize=32)
def grid(n_max: int) -> HexGrid:
    """Shared, read-only grid for ``n_max``."""
    return HexGrid(n_max)

from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from edgemig.hexgrid import (
    HexGrid,
    HexOffset,
    axial_distance,
    axial_norm,
    axial_to_ring_index,
    grid,
    hex_distance,
    neighbors,
    ring_cells,
    ring_index_to_axial,
    state_count,
    toward_ring,
)


@st.composite
def offsets(draw, max_ring=8):
    i = draw(st.integers(0, max_ring))
    j = draw(st.integers(0, max(6 * i - 1, 0)))
    return HexOffset(i, j)


def test_offset_validation():
    with pytest.raises(ValueError):
        HexOffset(0, 1)
    with pytest.raises(ValueError):
        HexOffset(2, 12)
    with pytest.raises(ValueError):
        HexOffset(-1, 0)


@given(offsets())
def test_round_trip_and_ring_norm(o):
    q, r = o.axial
    assert axial_norm((q, r)) == o.ring
    assert HexOffset.from_axial(q, r) == o
    assert axial_to_ring_index(q, r) == (o.ring, o.index)


def test_ring_sizes_and_state_count():
    for i in range(6):
        cells = ring_cells(i)
        assert len(cells) == (1 if i == 0 else 6 * i)
        assert len(set(cells)) == len(cells)
    assert state_count(10) == 331
    assert grid(10).size == 331
    assert grid(3).size == 37


@given(offsets(), offsets(), offsets())
def test_distance_is_a_metric(a, b, c):
    assert hex_distance(a, a) == 0
    assert hex_distance(a, b) == hex_distance(b, a)
    assert hex_distance(a, c) <= hex_distance(a, b) + hex_distance(b, c)
    assert hex_distance(HexOffset(0, 0), a) == a.ring


def test_shortest_path_example():
    s = HexOffset(3, 2)
    assert min(hex_distance(s, HexOffset(1, j)) for j in range(6)) == 2
    assert hex_distance(s, HexOffset(2, 1)) == 1
    assert hex_distance(s, HexOffset(2, 2)) == 1
    assert hex_distance(HexOffset(2, 1), HexOffset(1, 0)) == 1
    assert hex_distance(s, HexOffset(1, 0)) == 2


def test_origin_neighbors_are_ring_one():
    assert sorted(neighbors(HexOffset(0, 0))) == [HexOffset(1, j) for j in range(6)]


def test_neighbor_ring_multisets():
    # corner cells: one inward, two same-ring, three outward; other cells: two / two / two
    corner = Counter({-1: 1, 0: 2, 1: 3})
    side = Counter({-1: 2, 0: 2, 1: 2})
    for i in range(1, 5):
        for j in range(6 * i):
            o = HexOffset(i, j)
            counts = Counter(n.ring - i for n in neighbors(o))
            assert counts == (corner if j % i == 0 else side)


def test_handshake_between_rings():
    for i in range(0, 5):
        out_edges = sum(1 for c in ring_cells(i) for n in neighbors(HexOffset.from_axial(*c)) if n.ring == i + 1)
        in_edges = sum(1 for c in ring_cells(i + 1) for n in neighbors(HexOffset.from_axial(*c)) if n.ring == i)
        assert out_edges == in_edges == 12 * i + 6


def test_grid_tables():
    g = HexGrid(4)
    assert g.ring_start.tolist()[:6] == [0, 1, 7, 19, 37, 61]
    for s in range(g.size):
        o = g.offsets[s]
        assert g.state(o) == s
        for k, nb in enumerate(g.neighbor_index[s]):
            if nb >= 0:
                assert g.dist[s, nb] == 1
            else:
                assert o.ring == 4
    assert np.array_equal(g.dist, g.dist.T)


def test_toward_table_is_shortest_path_and_smallest_index():
    g = grid(5)
    for s in range(g.size):
        i = g.ring[s]
        for t in range(6):
            a = g.toward[s, t]
            if t >= i:
                assert a == s
                continue
            assert g.ring[a] == t
            assert g.dist[s, a] == i - t
            candidates = [k for k in range(g.size) if g.ring[k] == t and g.dist[s, k] == i - t]
            assert a == min(candidates)
    # (3, 2) -> ring 2 picks (2, 1), the smaller of the two shortest-path options
    assert g.offsets[g.toward[g.state(HexOffset(3, 2)), 2]] == HexOffset(2, 1)


def test_toward_ring_outside_grid():
    cell = ring_index_to_axial(14, 5)
    t = toward_ring(cell, 9)
    assert axial_norm(t) == 9
    assert axial_distance(cell, t) == 5
    assert toward_ring(cell, 20) == cell

import json

import numpy as np
import pandas as pd
import pytest

from edgemig.errors import DivergentLoad, EmptyTrace, InsufficientData, ParseError
from edgemig.hexgrid import axial_distance
from edgemig.traces import (
    LoadSnapshot,
    SlottedTrace,
    TraceSet,
    TraceSimConfig,
    cell_center,
    estimate_r,
    ingest_traces,
    load_costs,
    nearest_cell,
    project,
    run_trace_simulation,
    slotted_to_records,
    synthetic_population,
    tessellate,
    unproject,
    write_cabspotting,
)

ORIGIN = (37.77, -122.42)


# --- ingestion --------------------------------------------------------------


def test_cabspotting_line(tmp_path):
    (tmp_path / "new_abc.txt").write_text("37.75134 -122.39488 0 1213084687\n")
    ts = ingest_traces(tmp_path)
    rec = next(ts.records())
    assert (rec.entity, rec.timestamp, rec.lat, rec.lon) == ("new_abc", 1213084687.0, 37.75134, -122.39488)
    assert ts.malformed == 0


def test_empty_input(tmp_path):
    (tmp_path / "a.txt").write_text("")
    with pytest.raises(EmptyTrace):
        ingest_traces(tmp_path)
    f = tmp_path / "e.csv"
    f.write_text("id,timestamp,lat,lon\n")
    with pytest.raises(EmptyTrace):
        ingest_traces(f)


def test_missing_path(tmp_path):
    with pytest.raises(FileNotFoundError):
        ingest_traces(tmp_path / "nope")


def test_out_of_order_sorted_and_counted(tmp_path):
    (tmp_path / "t1.txt").write_text("37.1 -122.1 1 300\n37.2 -122.2 0 200\n37.3 -122.3 0 100\n")
    ts = ingest_traces(tmp_path)
    assert ts.frame["timestamp"].tolist() == [100.0, 200.0, 300.0]
    assert ts.reordered == 2


def test_malformed_lines_counted_or_raised(tmp_path):
    (tmp_path / "t1.txt").write_text("37.1 -122.1 1 300\ngarbage\n95.0 0 0 5\n37.2 -122.2 0 400\n")
    ts = ingest_traces(tmp_path)
    assert len(ts) == 2 and ts.malformed == 2
    with pytest.raises(ParseError) as err:
        ingest_traces(tmp_path, strict=True)
    assert err.value.line == 2


def test_csv_format(tmp_path):
    f = tmp_path / "fixes.csv"
    f.write_text("id,timestamp,lat,lon\nb,10,37.0,-122.0\na,5,37.1,-122.1\na,1,37.2,-122.2\n")
    ts = ingest_traces(f)
    assert ts.entities == ["a", "b"]
    assert ts.frame["timestamp"].tolist() == [1.0, 5.0, 10.0]
    bad = tmp_path / "bad.csv"
    bad.write_text("who,when\n1,2\n")
    with pytest.raises(ParseError):
        ingest_traces(bad)


def test_cabspotting_round_trip(tmp_path):
    pop = synthetic_population(5, 20, 0.1, seed=3)
    recs = slotted_to_records(pop, origin=ORIGIN)
    write_cabspotting(recs, tmp_path)
    back = ingest_traces(tmp_path)
    assert len(back) == len(recs)
    assert back.reordered == len(recs) - 5  # files are written newest first
    np.testing.assert_allclose(back.frame["lat"], recs.frame["lat"], atol=1e-6)


# --- geometry and slotting --------------------------------------------------


def test_projection_round_trip():
    lat = np.array([37.7, 37.8])
    lon = np.array([-122.5, -122.3])
    x, y = project(lat, lon, ORIGIN)
    lat2, lon2 = unproject(x, y, ORIGIN)
    np.testing.assert_allclose(lat2, lat, atol=1e-12)
    np.testing.assert_allclose(lon2, lon, atol=1e-12)


def test_cell_center_and_ties():
    for q, r in [(0, 0), (3, -2), (-4, 7)]:
        x, y = cell_center(q, r, 500.0)
        assert tuple(int(v[0]) for v in nearest_cell(x, y, 500.0)) == (q, r)
    # midway between (0, 0) and (1, 0): the lexicographically smaller cell wins
    q, r = nearest_cell(250.0, 0.0, 500.0)
    assert (q[0], r[0]) == (0, 0)
    q, r = nearest_cell(-250.0, 0.0, 500.0)
    assert (q[0], r[0]) == (-1, 0)


def test_nearest_cell_matches_brute_force():
    rng = np.random.default_rng(0)
    x, y = rng.uniform(-3000, 3000, 500), rng.uniform(-3000, 3000, 500)
    q, r = nearest_cell(x, y, 500.0)
    cq, cr = (a.ravel() for a in np.meshgrid(np.arange(-12, 13), np.arange(-12, 13)))
    cx, cy = cell_center(cq, cr, 500.0)
    for k in range(len(x)):
        d2 = (cx - x[k]) ** 2 + (cy - y[k]) ** 2
        mine = np.flatnonzero((cq == q[k]) & (cr == r[k]))[0]
        assert d2[mine] == pytest.approx(d2.min())


def test_fixes_600m_apart_are_adjacent_cells():
    lat, lon = unproject(np.array([0.0, 600.0]), np.array([0.0, 0.0]), ORIGIN)
    frame = pd.DataFrame({"entity": ["a", "a"], "timestamp": [0.0, 60.0], "lat": lat, "lon": lon})
    st = tessellate(TraceSet(frame), 500.0, origin=ORIGIN)
    cells = list(zip(st.q[0], st.r[0]))
    assert axial_distance(cells[0], cells[1]) == 1


def test_last_fix_in_slot_and_gaps():
    x = np.array([0.0, 1000.0, 2000.0, 0.0])
    lat, lon = unproject(x, np.zeros(4), ORIGIN)
    # slot 0 has two fixes (the later one wins); then silence until slot 8
    frame = pd.DataFrame({"entity": ["a"] * 4, "timestamp": [1.0, 50.0, 130.0, 490.0], "lat": lat, "lon": lon})
    st = tessellate(TraceSet(frame), 500.0, origin=ORIGIN, max_gap_slots=5, t0=0.0)
    assert st.n_slots == 9
    assert (st.q[0, 0], st.r[0, 0]) == (2, 0)
    assert st.observed[0].tolist() == [True, False, True, False, False, False, False, False, True]
    assert st.active[0].tolist() == [True, True, True, True, True, True, True, True, True]
    assert st.q[0, 5] == 4  # carried forward
    st2 = tessellate(TraceSet(frame), 500.0, origin=ORIGIN, max_gap_slots=2, t0=0.0)
    assert st2.active[0].tolist() == [True, True, True, True, True, False, False, False, True]
    assert st2.fresh[0].tolist() == [True, False, False, False, False, False, False, False, True]


# --- estimation -------------------------------------------------------------


def _slotted(q, r):
    q = np.asarray(q)
    r = np.asarray(r)
    ones = np.ones(q.shape, dtype=bool)
    return SlottedTrace([f"e{i}" for i in range(q.shape[0])], q, r, ones, ones.copy(), 60.0)


def test_estimate_r_extremes():
    st = _slotted(np.zeros((3, 10), int), np.zeros((3, 10), int))
    assert estimate_r(st, 3600, 9) == 0.0
    mover = np.tile(np.arange(10), (3, 1))
    assert estimate_r(_slotted(mover, np.zeros((3, 10), int)), 3600, 9) == pytest.approx(1 / 6)
    with pytest.raises(InsufficientData):
        estimate_r(st, 3600, 0)


def test_estimate_r_recovers_r0():
    for r0 in (0.02, 0.08, 0.15):
        st = synthetic_population(500, 60, r0, seed=0)
        assert abs(estimate_r(st, 3600, 59) - r0) <= 0.01


def test_estimate_r_error_shrinks_with_population():
    def err(n):
        return np.mean([abs(estimate_r(synthetic_population(n, 60, 0.08, seed=s), 3600, 59) - 0.08) for s in range(3)])

    assert err(4000) < err(500)


# --- load costs -------------------------------------------------------------


def test_load_costs_examples():
    snap = LoadSnapshot(100, 100, 1.5, 1.5)
    assert snap.g_t == pytest.approx(3.0)
    c_m, c_d = load_costs(snap)
    assert (c_m.const_term, c_m.lin_term, c_m.base) == pytest.approx((6.0, -3.0, 0.8))
    assert (c_d.const_term, c_d.lin_term, c_d.base) == pytest.approx((3.0, -3.0, 0.8))
    c_m, c_d = load_costs(LoadSnapshot(1e-12, 100, 1.5, 1.5))
    assert (c_m.const_term, c_m.lin_term) == pytest.approx((2.0, -1.0))
    assert (c_d.const_term, c_d.lin_term) == pytest.approx((1.0, -1.0))


def test_load_costs_grow_with_load():
    gs = [LoadSnapshot(m, 100, 1.5, 1.5).g_t for m in range(0, 101, 10)]
    assert all(b > a for a, b in zip(gs, gs[1:]))


def test_divergent_load():
    with pytest.raises(DivergentLoad):
        LoadSnapshot(100, 100, 1.0, 1.5)
    with pytest.raises(ValueError):
        LoadSnapshot(120, 100, 1.5, 1.5)


# --- trace simulation -------------------------------------------------------


def test_stationary_user_costs_nothing():
    st = _slotted(np.full((1, 30), 4), np.full((1, 30), -2))
    rep = run_trace_simulation(st, TraceSimConfig(n_max=5))
    assert np.all(rep.slot_cost["proposed"] == 0.0)


def test_fast_users_are_pulled_back_inside_n():
    # one hop of 40 cells per slot: every observation is far beyond ring N
    q = np.tile(np.arange(0, 400, 40), (2, 1))
    st = _slotted(q, np.zeros_like(q))
    rep = run_trace_simulation(st, TraceSimConfig(n_max=5))
    assert rep.max_post_action_ring < 5
    assert np.all(rep.slot_cost["never"][1:] > 0)


def test_synthetic_population_ranking_and_report(tmp_path):
    st = synthetic_population(150, 90, 0.06, seed=2)
    rep = run_trace_simulation(st, TraceSimConfig(n_max=10))
    tot = rep.totals
    for base in ("never", "always", "myopic"):
        assert tot["proposed"] <= tot[base] + 3 * rep.paired_standard_error("proposed", base)
    assert rep.max_post_action_ring < 10
    assert len(rep.r_series) == 90
    rep.write(tmp_path)
    summary = json.loads((tmp_path / "sim_summary.json").read_text())
    assert set(summary["reductions"]) == {"never", "always", "myopic"}
    per_slot = pd.read_csv(tmp_path / "sim_per_slot.csv")
    assert list(per_slot.columns[:3]) == ["slot", "time_s", "active"]
    assert len(per_slot) == 90


def test_simulation_is_deterministic():
    st = synthetic_population(30, 30, 0.1, seed=5)
    a = run_trace_simulation(st, TraceSimConfig(n_max=6))
    b = run_trace_simulation(st, TraceSimConfig(n_max=6))
    for p in a.policies:
        np.testing.assert_array_equal(a.slot_cost[p], b.slot_cost[p])


def test_config_validation():
    with pytest.raises(ValueError):
        TraceSimConfig(update_s=30.0)
    with pytest.raises(ValueError):
        TraceSimConfig(policies=("proposed", "random"))

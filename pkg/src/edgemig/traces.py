"""Trace-driven simulation: GPS fixes -> hexagon cells -> per-slot policy runs.

Pipeline::

    ingest_traces -> tessellate -> run_trace_simulation -> SimReport

Every ``update_s`` seconds the controller re-estimates the move probability
r from the trailing window, rebuilds the load-dependent costs and re-solves
the distance-MDP policy; between updates every entity follows the same
frozen policy.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from edgemig import hex_mdp
from edgemig.baselines import BaselineKind, build_baseline
from edgemig.costs import ConstPlusExpCost, eval_cost, validate
from edgemig.errors import DivergentLoad, EmptyTrace, InsufficientData, ParseError
from edgemig.hex_mdp import HexMdpSpec
from edgemig.hexgrid import DIRECTIONS, HexGrid, axial_norm, grid, toward_ring
from edgemig.simulator import cost_reduction

log = logging.getLogger(__name__)

EARTH_RADIUS_M = 6_371_000.0
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class TraceRecord:
    entity: str
    timestamp: float
    lat: float
    lon: float


@dataclass
class TraceSet:
    """Parsed fixes, sorted by (entity, timestamp)."""

    frame: pd.DataFrame  # columns: entity, timestamp, lat, lon
    malformed: int = 0
    reordered: int = 0
    sources: int = 0

    def __len__(self):
        return len(self.frame)

    def records(self):
        for row in self.frame.itertuples(index=False):
            yield TraceRecord(row.entity, float(row.timestamp), float(row.lat), float(row.lon))

    @property
    def entities(self) -> list[str]:
        return sorted(self.frame["entity"].unique())


def _valid_fix(lat, lon, ts):
    return -90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0 and math.isfinite(ts)


def _read_cabspotting(path: Path, strict: bool):
    """One taxi per file: 'lat lon occupancy epoch' lines."""
    rows, bad = [], 0
    entity = path.stem
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.split()
            try:
                if len(parts) != 4:
                    raise ValueError(f"expected 4 fields, got {len(parts)}")
                lat, lon, ts = float(parts[0]), float(parts[1]), float(parts[3])
                if not _valid_fix(lat, lon, ts):
                    raise ValueError("coordinates out of range")
            except ValueError as exc:
                if strict:
                    raise ParseError(str(exc), path, lineno) from None
                bad += 1
                continue
            rows.append((entity, ts, lat, lon))
    return rows, bad


def _read_csv(path: Path, strict: bool):
    rows, bad = [], 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return rows, bad
        cols = [h.strip().lower() for h in header]
        need = ["id", "timestamp", "lat", "lon"]
        if any(c not in cols for c in need):
            raise ParseError(f"CSV header must contain {need}, got {header}", path, 1)
        idx = [cols.index(c) for c in need]
        for lineno, rec in enumerate(reader, 2):
            if not rec or all(not x.strip() for x in rec):
                continue
            try:
                ent = rec[idx[0]].strip()
                ts, lat, lon = float(rec[idx[1]]), float(rec[idx[2]]), float(rec[idx[3]])
                if not ent or not _valid_fix(lat, lon, ts):
                    raise ValueError("missing id or coordinates out of range")
            except (ValueError, IndexError) as exc:
                if strict:
                    raise ParseError(str(exc), path, lineno) from None
                bad += 1
                continue
            rows.append((ent, ts, lat, lon))
    return rows, bad


def ingest_traces(path, format="auto", strict=False) -> TraceSet:
    """Read GPS fixes from a cabspotting directory/file or a generic CSV.

    Malformed lines are skipped and counted unless ``strict``, in which case
    the first one raises ParseError with its line number.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"trace path does not exist: {path}")
    if format == "auto":
        format = "csv" if path.is_file() and path.suffix.lower() == ".csv" else "cabspotting"
    if format == "cabspotting":
        files = sorted(p for p in path.iterdir() if p.is_file() and p.suffix == ".txt") if path.is_dir() else [path]
        reader = _read_cabspotting
    elif format == "csv":
        files = sorted(path.glob("*.csv")) if path.is_dir() else [path]
        reader = _read_csv
    else:
        raise ValueError(f"unknown trace format {format!r}")

    rows, bad = [], 0
    for f in files:
        r, b = reader(f, strict)
        rows += r
        bad += b
    if not rows:
        raise EmptyTrace(f"no valid fixes found under {path}")
    frame = pd.DataFrame(rows, columns=["entity", "timestamp", "lat", "lon"])
    frame["entity"] = frame["entity"].astype(str)
    # adjacent inversions in file order, per entity
    reordered = int((frame.groupby("entity", sort=False)["timestamp"].diff() < 0).sum())
    frame = frame.sort_values(["entity", "timestamp"], kind="mergesort").reset_index(drop=True)
    if reordered:
        log.info("sorted %d out-of-order fixes", reordered)
    if bad:
        log.warning("skipped %d malformed lines", bad)
    return TraceSet(frame, malformed=bad, reordered=reordered, sources=len(files))


# --- geometry ---------------------------------------------------------------


def project(lat, lon, origin):
    """Local equirectangular plane (metres) anchored at ``origin = (lat0, lon0)``."""
    lat0, lon0 = origin
    x = EARTH_RADIUS_M * np.radians(np.asarray(lon) - lon0) * math.cos(math.radians(lat0))
    y = EARTH_RADIUS_M * np.radians(np.asarray(lat) - lat0)
    return x, y


def unproject(x, y, origin):
    lat0, lon0 = origin
    lat = lat0 + np.degrees(np.asarray(y) / EARTH_RADIUS_M)
    lon = lon0 + np.degrees(np.asarray(x) / (EARTH_RADIUS_M * math.cos(math.radians(lat0))))
    return lat, lon


def cell_center(q, r, sep):
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    return sep * (q + r / 2.0), sep * (SQRT3 / 2.0) * r


def nearest_cell(x, y, sep):
    """Axial cell whose centre is nearest to each (x, y).

    Equidistant points go to the lexicographically smallest (q, r).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    rf = 2.0 * y / (SQRT3 * sep)
    qf = x / sep - rf / 2.0
    sf = -qf - rf
    q, r, s = np.round(qf), np.round(rf), np.round(sf)
    dq, dr, ds = np.abs(q - qf), np.abs(r - rf), np.abs(s - sf)
    fix_q = (dq > dr) & (dq > ds)
    fix_r = ~fix_q & (dr > ds)
    q = np.where(fix_q, -r - s, q)
    r = np.where(fix_r, -q - s, r)
    offs = np.array([(0, 0)] + list(DIRECTIONS), dtype=float)
    cq = q[:, None] + offs[None, :, 0]
    cr = r[:, None] + offs[None, :, 1]
    cx, cy = cell_center(cq, cr, sep)
    d2 = (cx - x[:, None]) ** 2 + (cy - y[:, None]) ** 2
    near = d2 <= d2.min(axis=1, keepdims=True) + 1e-9 * sep * sep
    # lexicographic (q, r) among the tied candidates
    key = np.where(near, cq * 1e6 + cr, np.inf)
    pick = np.argmin(key, axis=1)
    rows = np.arange(len(x))
    return cq[rows, pick].astype(np.int64), cr[rows, pick].astype(np.int64)


# --- slotting ---------------------------------------------------------------


@dataclass
class SlottedTrace:
    """Per-entity cell sequence, one column per slot.

    ``observed`` marks slots with a real fix; ``active`` also covers slots
    carried forward over short gaps. Cells are only meaningful where active.
    """

    entities: list
    q: np.ndarray
    r: np.ndarray
    observed: np.ndarray
    active: np.ndarray
    slot_s: float
    t0: float = 0.0
    origin: tuple = (0.0, 0.0)
    cell_separation_m: float = 500.0

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_slots(self) -> int:
        return self.q.shape[1]

    @property
    def fresh(self) -> np.ndarray:
        """Slots where an entity (re)appears and its service is placed."""
        prev = np.zeros_like(self.active)
        prev[:, 1:] = self.active[:, :-1]
        return self.active & ~prev


def tessellate(traces: TraceSet, cell_separation_m=500.0, slot_s=60.0, origin=None, t0=None, max_gap_slots=5):
    """Assign fixes to hexagon cells and resample onto slots of ``slot_s`` seconds.

    The last fix inside a slot wins. An entity without a fix keeps its last
    cell for up to ``max_gap_slots`` slots and is inactive after that.
    """
    if cell_separation_m <= 0:
        raise ValueError("cell_separation_m must be positive")
    df = traces.frame
    if len(df) == 0:
        raise EmptyTrace("no fixes to tessellate")
    if origin is None:
        origin = (float(df["lat"].mean()), float(df["lon"].mean()))
    t0 = float(df["timestamp"].min()) if t0 is None else float(t0)
    x, y = project(df["lat"].to_numpy(), df["lon"].to_numpy(), origin)
    q, r = nearest_cell(x, y, cell_separation_m)
    slot = np.floor((df["timestamp"].to_numpy() - t0) / slot_s).astype(np.int64)
    keep = slot >= 0
    cells = pd.DataFrame({"entity": df["entity"].to_numpy(), "slot": slot, "q": q, "r": r})[keep]
    last = cells.groupby(["entity", "slot"], sort=True).last()

    entities = sorted(cells["entity"].unique())
    n_slots = int(cells["slot"].max()) + 1
    row_of = {e: i for i, e in enumerate(entities)}
    E = len(entities)
    Q = np.full((E, n_slots), np.nan)
    R = np.full((E, n_slots), np.nan)
    ent_idx = np.array([row_of[e] for e in last.index.get_level_values(0)])
    slot_idx = last.index.get_level_values(1).to_numpy()
    Q[ent_idx, slot_idx] = last["q"].to_numpy()
    R[ent_idx, slot_idx] = last["r"].to_numpy()
    observed = ~np.isnan(Q)
    Qf = pd.DataFrame(Q).ffill(axis=1, limit=max_gap_slots).to_numpy()
    Rf = pd.DataFrame(R).ffill(axis=1, limit=max_gap_slots).to_numpy()
    active = ~np.isnan(Qf)
    return SlottedTrace(
        entities=entities,
        q=np.nan_to_num(Qf).astype(np.int64),
        r=np.nan_to_num(Rf).astype(np.int64),
        observed=observed,
        active=active,
        slot_s=float(slot_s),
        t0=t0,
        origin=tuple(origin),
        cell_separation_m=float(cell_separation_m),
    )


# --- synthetic populations --------------------------------------------------


def synthetic_population(n_entities, n_slots, r0, seed=0, spread=10, slot_s=60.0) -> SlottedTrace:
    """Entities doing the uniform hexagon walk with move probability ``r0`` per neighbour."""
    if not 0 <= r0 <= 1 / 6:
        raise ValueError("r0 must lie in [0, 1/6]")
    rng = np.random.default_rng(seed)
    g0 = grid(spread) if spread >= 1 else None
    if g0 is None:
        start = np.zeros((n_entities, 2), dtype=np.int64)
    else:
        start = g0.axial[rng.integers(0, g0.size, size=n_entities)]
    dirs = np.array(DIRECTIONS, dtype=np.int64)
    Q = np.empty((n_entities, n_slots), dtype=np.int64)
    R = np.empty((n_entities, n_slots), dtype=np.int64)
    pos = start.copy()
    for t in range(n_slots):
        Q[:, t], R[:, t] = pos[:, 0], pos[:, 1]
        u = rng.random(n_entities)
        move = u < 6 * r0
        k = np.minimum((u / r0).astype(np.int64) if r0 > 0 else np.zeros(n_entities, np.int64), 5)
        pos = pos + np.where(move[:, None], dirs[k], 0)
    ones = np.ones((n_entities, n_slots), dtype=bool)
    names = [f"e{i:04d}" for i in range(n_entities)]
    return SlottedTrace(names, Q, R, ones, ones.copy(), float(slot_s))


def slotted_to_records(slotted: SlottedTrace, origin=(37.77, -122.42), t0=1_211_932_800.0, jitter_m=0.0, seed=0):
    """Inverse of ``tessellate`` for synthetic data: one fix per active slot at the cell centre."""
    rng = np.random.default_rng(seed)
    e_idx, t_idx = np.nonzero(slotted.observed)
    x, y = cell_center(slotted.q[e_idx, t_idx], slotted.r[e_idx, t_idx], slotted.cell_separation_m)
    if jitter_m:
        x = x + rng.uniform(-jitter_m, jitter_m, size=len(x))
        y = y + rng.uniform(-jitter_m, jitter_m, size=len(y))
    lat, lon = unproject(x, y, origin)
    ts = t0 + (t_idx + 0.5) * slotted.slot_s
    frame = pd.DataFrame(
        {"entity": [slotted.entities[i] for i in e_idx], "timestamp": ts, "lat": lat, "lon": lon}
    ).sort_values(["entity", "timestamp"], kind="mergesort")
    return TraceSet(frame.reset_index(drop=True))


def write_cabspotting(traces: TraceSet, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for ent, grp in traces.frame.groupby("entity"):
        with open(directory / f"{ent}.txt", "w") as fh:
            # the public files list newest first
            for row in grp.iloc[::-1].itertuples(index=False):
                fh.write(f"{row.lat:.6f} {row.lon:.6f} 0 {int(row.timestamp)}\n")


# --- estimation and costs ---------------------------------------------------


def estimate_r(slotted: SlottedTrace, window_s, at_slot) -> float:
    """Per-neighbour move probability from departures in the trailing window.

    Uses transitions t -> t+1 with at_slot - window <= t and t + 1 <= at_slot,
    both slots carrying real fixes. Each cell gives departures / occupant-slots;
    the unweighted mean over cells, divided by 6, is clamped to [0, 1/6].
    """
    w = max(1, int(round(window_s / slotted.slot_s)))
    hi = min(int(at_slot), slotted.n_slots - 1)
    lo = max(0, hi - w)
    if hi <= lo:
        raise InsufficientData(f"no transitions before slot {at_slot}")
    ok = slotted.observed[:, lo:hi] & slotted.observed[:, lo + 1 : hi + 1]
    if not ok.any():
        raise InsufficientData(f"no occupied cells in the window ending at slot {at_slot}")
    q0, r0 = slotted.q[:, lo:hi][ok], slotted.r[:, lo:hi][ok]
    q1, r1 = slotted.q[:, lo + 1 : hi + 1][ok], slotted.r[:, lo + 1 : hi + 1][ok]
    left = (q0 != q1) | (r0 != r1)
    _, cell = np.unique(np.stack([q0, r0], axis=1), axis=0, return_inverse=True)
    cell = cell.ravel()
    occ = np.bincount(cell)
    dep = np.bincount(cell, weights=left)
    f_bar = float(np.mean(dep / occ))
    return min(max(f_bar / 6.0, 0.0), 1.0 / 6.0)


@dataclass(frozen=True)
class LoadSnapshot:
    m_cur: float
    m_max: float
    r_t: float
    r_p: float

    def __post_init__(self):
        if self.m_max <= 0 or not 0 <= self.m_cur <= self.m_max:
            raise ValueError(f"need 0 <= m_cur <= m_max and m_max > 0 (got {self.m_cur}, {self.m_max})")
        for name, R in (("R_t", self.r_t), ("R_p", self.r_p)):
            if R * self.m_max <= self.m_cur:
                raise DivergentLoad(f"{name} * m_max = {R * self.m_max} does not exceed m_cur = {self.m_cur}")

    @property
    def g_t(self) -> float:
        return 1.0 / (1.0 - self.m_cur / (self.r_t * self.m_max))

    @property
    def g_p(self) -> float:
        return 1.0 / (1.0 - self.m_cur / (self.r_p * self.m_max))


def load_costs(load: LoadSnapshot, mu=0.8, theta=0.8):
    """Migration and transmission costs scaled by the current load."""
    gt, gp = load.g_t, load.g_p
    c_m = ConstPlusExpCost(gp + gt, -gt, mu)
    c_d = ConstPlusExpCost(gt, -gt, theta)
    for c in (c_m, c_d):
        problems = validate(c)
        if problems:
            raise ValueError("load-derived cost is invalid: " + "; ".join(problems))
    return c_m, c_d


# --- trace simulation -------------------------------------------------------


@dataclass
class TraceSimConfig:
    slot_s: float = 60.0  # T
    update_s: float = 60.0  # T_u
    window_s: float = 3600.0  # T_w
    n_max: int = 10
    gamma: float = 0.9
    r_t: float = 1.5
    r_p: float = 1.5
    mu: float = 0.8
    theta: float = 0.8
    policies: tuple = ("proposed", "never", "always", "myopic")
    r_init: float = 0.05  # used until the window holds a transition
    r_floor: float = 1e-4  # keeps the distance chain non-degenerate

    def __post_init__(self):
        if self.slot_s <= 0 or self.update_s < self.slot_s or self.window_s < self.slot_s:
            raise ValueError("need T > 0, T_u >= T and T_w >= T")
        if self.n_max < 2:
            raise ValueError("N must be >= 2")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        unknown = set(self.policies) - {"proposed", *(k.value for k in BaselineKind)}
        if unknown:
            raise ValueError(f"unknown policies: {sorted(unknown)}")
        self.policies = tuple(self.policies)


@dataclass
class SimReport:
    policies: tuple
    slot_cost: dict  # policy -> (S,) mean cost per active entity, nan when nobody is active
    entity_cost: dict  # policy -> (E,) mean per-slot cost of each entity
    active_count: np.ndarray
    r_series: list  # (slot, r, m_cur) at each controller step
    max_post_action_ring: int
    slot_s: float
    entities: list = field(default_factory=list)

    @property
    def totals(self) -> dict:
        return {p: float(np.nanmean(c)) for p, c in self.slot_cost.items()}

    def reductions(self, proposed="proposed") -> dict:
        tot = self.totals
        return {p: cost_reduction(tot[p], tot[proposed]) for p in self.policies if p != proposed and tot[p] > 0}

    def paired_standard_error(self, a, b) -> float:
        """Standard error of the mean per-entity cost difference a - b."""
        diff = self.entity_cost[a] - self.entity_cost[b]
        diff = diff[~np.isnan(diff)]
        return float(diff.std(ddof=1) / math.sqrt(len(diff))) if len(diff) > 1 else float("nan")

    def series_rows(self):
        rows = []
        for t in range(len(self.active_count)):
            row = {"slot": t, "time_s": t * self.slot_s, "active": int(self.active_count[t])}
            for p in self.policies:
                v = self.slot_cost[p][t]
                row[p] = "" if np.isnan(v) else float(v)
            rows.append(row)
        return rows

    def summary(self) -> dict:
        tot = self.totals
        out = {
            "totals": tot,
            "reductions": self.reductions() if "proposed" in self.policies else {},
            "r_series": [{"slot": s, "r": r, "m_cur": m} for s, r, m in self.r_series],
            "max_post_action_ring": self.max_post_action_ring,
            "entities": len(self.entities),
            "slots": int(len(self.active_count)),
        }
        if "proposed" in self.policies:
            out["paired_se"] = {p: self.paired_standard_error("proposed", p) for p in self.policies if p != "proposed"}
        return out

    def write(self, out_dir, stem="sim"):
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        rows = self.series_rows()
        with open(out_dir / f"{stem}_per_slot.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            w.writeheader()
            w.writerows(rows)
        with open(out_dir / f"{stem}_summary.json", "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)


class _PolicyTable:
    """Ring-level policy lifted to axial offsets, with a lookup for offsets beyond ring N."""

    def __init__(self, g: HexGrid, actions):
        self.g = g
        self.actions = np.asarray(actions)
        n = g.n_max
        self.lookup = np.full((2 * n + 1, 2 * n + 1), -1, dtype=np.int64)
        self.lookup[g.axial[:, 0] + n, g.axial[:, 1] + n] = np.arange(g.size)
        # ring targeted from the outer ring, reused for offsets beyond N
        self.outer_target = int(g.ring[self.actions[g.ring_start[n]]])

    def apply(self, eq, er):
        """Post-action offsets for observed offsets (eq, er)."""
        g, n = self.g, self.g.n_max
        ring = (np.abs(eq) + np.abs(er) + np.abs(eq + er)) // 2
        inside = ring <= n
        aq, ar = eq.copy(), er.copy()
        idx = self.lookup[eq[inside] + n, er[inside] + n]
        act = self.actions[idx]
        aq[inside], ar[inside] = g.axial[act, 0], g.axial[act, 1]
        for k in np.nonzero(~inside)[0]:
            aq[k], ar[k] = toward_ring((int(eq[k]), int(er[k])), self.outer_target)
        return aq, ar


def run_trace_simulation(slotted: SlottedTrace, config: TraceSimConfig = None) -> SimReport:
    """Run every configured policy on the same slotted trace."""
    cfg = config or TraceSimConfig()
    g = grid(cfg.n_max)
    E, S = slotted.n_entities, slotted.n_slots
    if E == 0 or S == 0:
        raise EmptyTrace("slotted trace is empty")
    update_every = max(1, int(round(cfg.update_s / slotted.slot_s)))
    fresh = slotted.fresh
    active = slotted.active

    # entities seen in the trailing T_u window
    recent = np.zeros_like(slotted.observed)
    for k in range(update_every):
        recent[:, k:] |= slotted.observed[:, : S - k]
    load_series = recent.sum(axis=0)
    m_max = float(max(load_series.max(), 1))

    hq = {p: np.zeros(E, dtype=np.int64) for p in cfg.policies}
    hr = {p: np.zeros(E, dtype=np.int64) for p in cfg.policies}
    cost_sum = {p: np.zeros(E) for p in cfg.policies}
    slot_cost = {p: np.full(S, np.nan) for p in cfg.policies}
    n_active = active.sum(axis=1)
    r_series = []
    r_est = cfg.r_init
    c_m = c_d = None
    tables = {}
    max_ring = 0

    for t in range(S):
        if t % update_every == 0 or c_m is None:
            try:
                r_est = estimate_r(slotted, cfg.window_s, t)
            except InsufficientData:
                pass
            m_cur = float(load_series[t])
            c_m, c_d = load_costs(LoadSnapshot(m_cur, m_max, cfg.r_t, cfg.r_p), cfg.mu, cfg.theta)
            spec = HexMdpSpec(cfg.n_max, max(r_est, cfg.r_floor), cfg.gamma, c_m, c_d)
            for p in cfg.policies:
                if p == "proposed":
                    pol, _, _ = hex_mdp.solve_approx(spec)
                elif p in tables and p != "myopic":
                    continue
                else:
                    pol = build_baseline(spec, p)
                tables[p] = _PolicyTable(g, pol.actions)
            r_series.append((t, r_est, m_cur))

        live = np.nonzero(active[:, t])[0]
        if live.size == 0:
            continue
        uq, ur = slotted.q[live, t], slotted.r[live, t]
        new = fresh[live, t]
        for p in cfg.policies:
            h_q, h_r = hq[p], hr[p]
            h_q[live[new]], h_r[live[new]] = uq[new], ur[new]
            eq, er = uq - h_q[live], ur - h_r[live]
            aq, ar = tables[p].apply(eq, er)
            moved = (np.abs(eq - aq) + np.abs(er - ar) + np.abs(eq - aq + er - ar)) // 2
            ring_after = (np.abs(aq) + np.abs(ar) + np.abs(aq + ar)) // 2
            cost = eval_cost(c_m, moved) + eval_cost(c_d, ring_after)
            h_q[live], h_r[live] = uq - aq, ur - ar
            cost_sum[p][live] += cost
            slot_cost[p][t] = float(cost.mean())
            max_ring = max(max_ring, int(ring_after.max()))

    with np.errstate(invalid="ignore", divide="ignore"):
        entity_cost = {p: np.where(n_active > 0, cost_sum[p] / n_active, np.nan) for p in cfg.policies}
    return SimReport(
        policies=cfg.policies,
        slot_cost=slot_cost,
        entity_cost=entity_cost,
        active_count=active.sum(axis=0),
        r_series=r_series,
        max_post_action_ring=max_ring,
        slot_s=slotted.slot_s,
        entities=list(slotted.entities),
    )

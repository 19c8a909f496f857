"""Command-line entry point: ``edgemig <command> --config run.ini``.

Exit codes: 0 ok, 2 invalid config/spec, 3 I/O or trace parsing,
4 solver failed to converge, 5 degenerate input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from edgemig import __version__, config as cfgmod
from edgemig import distance_mdp, hex_mdp, simulator, traces
from edgemig.baselines import BaselineKind, build_baseline, compare_policies
from edgemig.costs import TabulatedCost, fit_exponential
from edgemig.errors import (
    DegenerateInput,
    EmptyTrace,
    InsufficientData,
    InvalidAction,
    InvalidSpec,
    NonConvergence,
    NonMonotone,
    ParseError,
    SingularSegment,
    DivergentLoad,
    ZeroBaseline,
)
from edgemig.sampling import sweep_spec, random_move_probs

log = logging.getLogger("edgemig")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_CONVERGENCE = 4
EXIT_DEGENERATE = 5

LOG_ENV = "EDGEMIG_LOG"


# --- output helpers ---------------------------------------------------------


def write_rows(rows, out_dir, stem, fmt="csv"):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}.{fmt}"
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(rows, fh, indent=2)
    else:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()) if rows else [])
            w.writeheader()
            w.writerows(rows)
    return path


def write_manifest(cfg, command, extra, stem="manifest"):
    cfg.out.mkdir(parents=True, exist_ok=True)
    doc = {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "config_path": str(cfg.path) if cfg.path else None,
        "config": cfg.echo,
        **extra,
    }
    path = cfg.out / f"{stem}.json"
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_jsonable)
    return path


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


# --- commands ---------------------------------------------------------------


def cmd_solve_1d(cfg, fmt="csv"):
    spec = cfgmod.distance_spec(cfg)
    method = cfg.section("solve").str("method_1d", "modified")
    solvers = {
        "modified": distance_mdp.modified_policy_iteration,
        "policy-iteration": distance_mdp.policy_iteration_1d,
        "value-iteration": distance_mdp.value_iteration_1d,
    }
    if method not in solvers:
        raise cfgmod.ConfigError(f"[solve] method_1d: expected one of {sorted(solvers)}, got {method!r}")
    (policy, values, iters), wall = _timed(solvers[method], spec)
    write_rows([{"d": d, "action": a} for d, a in enumerate(policy.actions)], cfg.out, "policy", fmt)
    write_rows([{"d": d, "value": float(v)} for d, v in enumerate(values)], cfg.out, "values", fmt)
    log.info("solve-1d: %s in %d iterations, %.3f ms", method, iters, wall * 1e3)
    write_manifest(
        cfg,
        "solve-1d",
        {"method": method, "iterations": iters, "wall_time_s": wall, "spec_ini": cfgmod.spec_to_ini(spec)},
    )
    return EXIT_OK


def cmd_solve_2d(cfg, fmt="csv"):
    spec = cfgmod.hex_spec(cfg)
    sec = cfg.section("solve")
    method = sec.str("method_2d", "both")
    if method not in ("approx", "exact", "both"):
        raise cfgmod.ConfigError(f"[solve] method_2d: expected approx, exact or both, got {method!r}")
    exact_method = sec.str("exact_method", "policy-iteration")
    extra = {"method": method, "error_bound": hex_mdp.error_bound(spec), "spec_ini": cfgmod.spec_to_ini(spec)}
    results = {}
    if method in ("approx", "both"):
        spec.grid  # build the cached geometry outside the timed region
        (hpol, dpol, _), wall = _timed(hex_mdp.solve_approx, spec)
        values = hex_mdp.evaluate_policy_2d(spec, hpol)
        results["approx"] = values
        write_rows(hex_mdp.to_csv_rows(hpol, values), cfg.out, "policy_approx", fmt)
        extra["approx_wall_time_s"] = wall
        extra["approx_ring_actions"] = list(dpol.actions)
        log.info("solve-2d approx: %.3f ms", wall * 1e3)
    if method in ("exact", "both"):
        (xpol, xval, iters), wall = _timed(hex_mdp.solve_exact, spec, method=exact_method)
        results["exact"] = xval
        write_rows(hex_mdp.to_csv_rows(xpol, xval), cfg.out, "policy_exact", fmt)
        extra.update(exact_wall_time_s=wall, exact_iterations=iters, exact_method=exact_method)
        log.info("solve-2d exact: %d iterations, %.3f ms", iters, wall * 1e3)
    if len(results) == 2:
        gap = results["approx"] - results["exact"]
        extra["max_gap"] = float(gap.max())
        extra["gap_within_bound"] = bool(gap.max() <= extra["error_bound"] + 1e-8)
        extra["speedup"] = extra["exact_wall_time_s"] / max(extra["approx_wall_time_s"], 1e-12)
        log.info("max gap %.3g, bound %.3g, speedup %.1fx", extra["max_gap"], extra["error_bound"], extra["speedup"])
    write_manifest(cfg, "solve-2d", extra)
    return EXIT_OK


SWEEP_POLICIES = ("optimal", "approx", "never", "always", "myopic")


def sweep_point(spec):
    """State-averaged discounted cost of each compared policy at one spec."""
    hpol, _, _ = hex_mdp.solve_approx(spec)
    pols = {"approx": hpol}
    for kind in BaselineKind:
        pols[kind.value] = build_baseline(spec, kind)
    return compare_policies(spec, pols).means


def _crossings(xs, a, b):
    """x positions where curve a - b changes sign (linear interpolation)."""
    d = np.asarray(a) - np.asarray(b)
    out = []
    for k in range(len(xs) - 1):
        if d[k] == 0:
            out.append(xs[k])
        elif d[k] * d[k + 1] < 0:
            out.append(xs[k] + (xs[k + 1] - xs[k]) * d[k] / (d[k] - d[k + 1]))
    return [float(x) for x in out]


def cmd_sweep(cfg, fmt="csv"):
    sec = cfg.section("sweep")
    mdp = cfg.section("mdp")
    parameter = sec.str("parameter", "neg_beta_l")
    n_max = mdp.int("N", 10)
    n_draws = sec.int("seeds", 50)
    if sec.str("r", "random") == "random":
        rs = random_move_probs(cfg.seed, n_draws)
    else:
        rs = np.array([sec.float("r")])
    if parameter == "neg_beta_l":
        values = sec.floats("values", "0:1:11")
        outer = sec.floats("gammas", "0.5,0.9,0.99")
    elif parameter == "gamma":
        values = sec.floats("values", "0.5,0.9,0.99")
        outer = [sec.float("neg_beta_l", 0.5)]
    else:
        raise cfgmod.ConfigError(f"[sweep] parameter: expected neg_beta_l or gamma, got {parameter!r}")
    if not values:
        raise cfgmod.ConfigError("[sweep] values: empty sweep grid")

    files, crossings = [], {}
    t0 = time.perf_counter()
    for o in outer:
        rows = []
        curves = {p: [] for p in SWEEP_POLICIES}
        for v in values:
            x, gamma = (v, o) if parameter == "neg_beta_l" else (o, v)
            acc = {p: [] for p in SWEEP_POLICIES}
            for r in rs:
                means = sweep_point(sweep_spec(x, float(r), gamma, n_max))
                for p in SWEEP_POLICIES:
                    acc[p].append(means[p])
            for p in SWEEP_POLICIES:
                cost = float(np.mean(acc[p]))
                curves[p].append(cost)
                rows.append({parameter: v, "policy": p, "cost": cost})
        tag = f"gamma{o:g}" if parameter == "neg_beta_l" else f"neg_beta_l{o:g}"
        files.append(str(write_rows(rows, cfg.out, f"sweep_{tag}", fmt)))
        crossings[tag] = _crossings(values, curves["never"], curves["always"])
        if crossings[tag]:
            log.info("%s: never/always curves cross at %s", tag, crossings[tag])
    write_manifest(
        cfg,
        "sweep",
        {
            "parameter": parameter,
            "values": values,
            "outer": outer,
            "move_probs": [float(r) for r in rs],
            "files": files,
            "never_always_crossings": crossings,
            "wall_time_s": time.perf_counter() - t0,
        },
    )
    return EXIT_OK


def read_table(path) -> list[float]:
    """Numbers from a text/CSV file: one per line or comma separated; '#' comments."""
    path = Path(path)
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            for tok in line.replace(",", " ").split():
                try:
                    vals.append(float(tok))
                except ValueError:
                    # tolerate a single header line
                    if lineno == 1 and not vals:
                        break
                    raise ParseError(f"not a number: {tok!r}", path, lineno) from None
    return vals


def cmd_fit(cfg, fmt="csv"):
    sec = cfg.section("fit")
    if sec.has("table"):
        vals = read_table(sec.str("table"))
    else:
        vals = sec.floats("values")
    if len(vals) < 3 or len(vals) % 2 == 0:
        raise cfgmod.ConfigError(f"[fit] need an odd number (>= 3) of samples f(0..2W), got {len(vals)}")
    table = TabulatedCost(tuple(vals), (len(vals) - 1) // 2)
    res, wall = _timed(fit_exponential, table)
    p = res.params
    W = table.width
    residuals = {str(n): float(p.raw(n) - vals[n]) for n in (0, W, 2 * W)}
    row = {
        "const_term": p.const_term,
        "lin_term": p.lin_term,
        "base": p.base,
        "root": res.root_used,
        "guarded": res.guarded,
        "sse": res.sse,
        "sse_other": next(c[2] for c in res.candidates if c[0] != res.root_used),
    }
    write_rows([row], cfg.out, "fit", fmt)
    write_rows(
        [{"n": n, "f": vals[n], "fitted": float(p.raw(n))} for n in range(len(vals))], cfg.out, "fit_curve", fmt
    )
    write_manifest(
        cfg, "fit", {"width": W, "residuals": residuals, "violations": res.violations, "wall_time_s": wall, **row}
    )
    return EXIT_OK


def _sim_config(sec, mdp):
    return traces.TraceSimConfig(
        slot_s=sec.float("T", 60.0),
        update_s=sec.float("T_u", 60.0),
        window_s=sec.float("T_w", 3600.0),
        n_max=mdp.int("N", 10),
        gamma=mdp.float("gamma", 0.9),
        r_t=sec.float("R_t", 1.5),
        r_p=sec.float("R_p", 1.5),
        mu=sec.float("mu", 0.8),
        theta=sec.float("theta", 0.8),
        policies=tuple(sec.words("policies", "proposed,never,always,myopic")),
        r_init=sec.float("r_init", 0.05),
        r_floor=sec.float("r_floor", 1e-4),
    )


def cmd_simulate(cfg, fmt="csv"):
    sec = cfg.section("simulate")
    mdp = cfg.section("mdp")
    mode = sec.str("mode", "synthetic")
    if mode == "random-walk":
        return _simulate_random_walk(cfg, sec, fmt)
    if mode not in ("synthetic", "trace"):
        raise cfgmod.ConfigError(f"[simulate] mode: expected random-walk, synthetic or trace, got {mode!r}")
    sim_cfg = _sim_config(sec, mdp)
    extra = {"mode": mode}
    if mode == "trace":
        path = Path(sec.str("trace_path"))
        recs = traces.ingest_traces(path, sec.str("format", "auto"), strict=sec.str("strict", "no") == "yes")
        slotted = traces.tessellate(
            recs,
            cell_separation_m=sec.float("cell_separation_m", 500.0),
            slot_s=sim_cfg.slot_s,
            max_gap_slots=sec.int("max_gap_slots", 5),
        )
        extra.update(malformed=recs.malformed, reordered=recs.reordered, fixes=len(recs))
    else:
        slotted = traces.synthetic_population(
            sec.int("entities", 200),
            sec.int("slots", 120),
            sec.float("r0", 0.05),
            seed=cfg.seed,
            spread=sec.int("spread", 10),
            slot_s=sim_cfg.slot_s,
        )
    report, wall = _timed(traces.run_trace_simulation, slotted, sim_cfg)
    report.write(cfg.out, "sim")
    summary = report.summary()
    for name, red in summary["reductions"].items():
        log.info("cost reduction vs %s: %.1f%%", name, 100 * red)
    extra.update(summary=summary, wall_time_s=wall)
    write_manifest(cfg, "simulate", extra)
    return EXIT_OK


def _simulate_random_walk(cfg, sec, fmt):
    spec = cfgmod.hex_spec(cfg)
    episodes = sec.int("episodes", 10_000)
    horizon = sec.int("horizon", 0) or None
    names = sec.words("policies", "approx,never,always,myopic,optimal")
    pols = {}
    for name in names:
        if name == "approx":
            pols[name] = hex_mdp.solve_approx(spec)[0]
        elif name == "optimal":
            pols[name] = hex_mdp.solve_exact(spec)[0]
        else:
            pols[name] = build_baseline(spec, name)
    rows = []
    t0 = time.perf_counter()
    for name, pol in pols.items():
        mean, se = simulator.simulate_random_walk(spec, pol, horizon=horizon, episodes=episodes, seed=cfg.seed)
        rows.append(
            {"policy": name, "mean": mean, "se": se, "exact": simulator.exact_value_at(spec, pol)}
        )
    write_rows(rows, cfg.out, "random_walk", fmt)
    write_manifest(cfg, "simulate", {"mode": "random-walk", "episodes": episodes, "wall_time_s": time.perf_counter() - t0})
    return EXIT_OK


COMMANDS = {
    "solve-1d": cmd_solve_1d,
    "solve-2d": cmd_solve_2d,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "simulate": cmd_simulate,
}


def exit_code_for(exc) -> int:
    if isinstance(exc, (DegenerateInput, NonMonotone, InsufficientData, ZeroBaseline)):
        return EXIT_DEGENERATE
    if isinstance(exc, (NonConvergence, SingularSegment)):
        return EXIT_CONVERGENCE
    if isinstance(exc, (OSError, ParseError, EmptyTrace)):
        return EXIT_IO
    if isinstance(exc, (InvalidSpec, InvalidAction, DivergentLoad, ValueError)):
        return EXIT_VALIDATION
    raise exc


def build_parser():
    ap = argparse.ArgumentParser(prog="edgemig", description="Service migration policies for mobile edge clouds.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="INI run configuration")
        p.add_argument("--seed", type=int, default=None, help="overrides [run] seed")
        p.add_argument("--out", type=Path, default=None, help="output directory (default ./out)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=os.environ.get(LOG_ENV, "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = cfgmod.load_config(args.config, seed=args.seed, out=args.out)
        return COMMANDS[args.command](cfg, args.format)
    except Exception as exc:  # mapped to exit codes below
        code = exit_code_for(exc)
        print(f"edgemig {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())

"""INI run configuration.

Example::

    [run]
    seed = 0

    [mdp]
    N = 10
    gamma = 0.9
    r = 0.05            ; or p0 / p / q for the distance chain

    [migration]
    beta_c = 1.5
    beta_l = -0.5
    mu = 0.8

    [transmission]
    delta_c = 1
    delta_l = -1
    theta = 0.8

Sections [solve], [sweep], [fit] and [simulate] hold per-command settings.
"""

from __future__ import annotations

import configparser
from io import StringIO
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from edgemig.costs import ConstPlusExpCost
from edgemig.distance_mdp import DistanceMdpSpec
from edgemig.errors import InvalidSpec
from edgemig.hex_mdp import HexMdpSpec, build_approx_distance_spec


class ConfigError(InvalidSpec):
    """Missing or malformed configuration field."""


class Section:
    """Typed getters over one INI section; every error names section.key."""

    def __init__(self, parser, name):
        self.name = name
        self.data = parser[name] if parser.has_section(name) else {}

    def has(self, key):
        return key in self.data

    def _raw(self, key, default):
        if key in self.data:
            return self.data[key]
        if default is _REQUIRED:
            raise ConfigError(f"missing required field [{self.name}] {key}")
        return default

    def float(self, key, default=None):
        raw = self._raw(key, _REQUIRED if default is None else default)
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"[{self.name}] {key}: expected a number, got {raw!r}") from None

    def int(self, key, default=None):
        raw = self._raw(key, _REQUIRED if default is None else default)
        try:
            value = float(raw)
        except (TypeError, ValueError):
            value = float("nan")
        if not value.is_integer():
            raise ConfigError(f"[{self.name}] {key}: expected an integer, got {raw!r}")
        return int(value)

    def str(self, key, default=None):
        return str(self._raw(key, _REQUIRED if default is None else default)).strip()

    def floats(self, key, default=None):
        """Comma list ``a, b, c`` or range ``start:stop:count`` (inclusive)."""
        raw = self.str(key, default)
        try:
            if ":" in raw:
                lo, hi, n = raw.split(":")
                return [float(v) for v in np.linspace(float(lo), float(hi), int(n))]
            return [float(v) for v in raw.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"[{self.name}] {key}: cannot parse number list {raw!r}") from None

    def words(self, key, default=None):
        return [w.strip() for w in self.str(key, default).split(",") if w.strip()]


_REQUIRED = object()


@dataclass
class RunConfig:
    parser: configparser.ConfigParser
    seed: int = 0
    out: Path = Path("out")
    path: Path | None = None
    echo: dict = field(default_factory=dict)

    def section(self, name) -> Section:
        return Section(self.parser, name)


def _new_parser():
    # keys keep their case so N and T_u read as written
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    return parser


def load_config(path=None, text=None, seed=None, out=None) -> RunConfig:
    parser = _new_parser()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        parser.read(path)
    if text is not None:
        parser.read_string(text)
    run = Section(parser, "run")
    cfg = RunConfig(parser, path=path)
    cfg.seed = int(seed) if seed is not None else run.int("seed", 0)
    cfg.out = Path(out) if out is not None else Path(run.str("out", "out"))
    cfg.echo = {s: dict(parser[s]) for s in parser.sections()}
    return cfg


def cost_from_section(cfg: RunConfig, name, keys):
    sec = cfg.section(name)
    const, lin, base = (sec.float(k) for k in keys)
    return ConstPlusExpCost(const, lin, base)


def costs(cfg: RunConfig):
    c_m = cost_from_section(cfg, "migration", ("beta_c", "beta_l", "mu"))
    c_d = cost_from_section(cfg, "transmission", ("delta_c", "delta_l", "theta"))
    return c_m, c_d


def hex_spec(cfg: RunConfig) -> HexMdpSpec:
    sec = cfg.section("mdp")
    c_m, c_d = costs(cfg)
    return HexMdpSpec(sec.int("N"), sec.float("r"), sec.float("gamma"), c_m, c_d)


def distance_spec(cfg: RunConfig) -> DistanceMdpSpec:
    """Distance chain from explicit p0/p/q, or from a hexagon move probability r."""
    sec = cfg.section("mdp")
    if sec.has("p") or sec.has("q") or sec.has("p0"):
        c_m, c_d = costs(cfg)
        return DistanceMdpSpec(
            sec.int("N"), sec.float("p0"), sec.float("p"), sec.float("q"), sec.float("gamma"), c_m, c_d
        )
    return build_approx_distance_spec(hex_spec(cfg))


def spec_to_ini(spec) -> str:
    """Serialise a distance or hexagon spec back to the INI layout."""
    parser = _new_parser()
    mdp = {"N": str(spec.n_max), "gamma": repr(spec.gamma)}
    if isinstance(spec, DistanceMdpSpec):
        mdp.update(p0=repr(spec.p0), p=repr(spec.p), q=repr(spec.q))
    else:
        mdp["r"] = repr(spec.move_prob)
    parser["mdp"] = mdp
    m, d = spec.migration_cost, spec.transmission_cost
    parser["migration"] = {"beta_c": repr(m.const_term), "beta_l": repr(m.lin_term), "mu": repr(m.base)}
    parser["transmission"] = {"delta_c": repr(d.const_term), "delta_l": repr(d.lin_term), "theta": repr(d.base)}
    buf = StringIO()
    parser.write(buf)
    return buf.getvalue()

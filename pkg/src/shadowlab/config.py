"""Experiment configuration: YAML (or JSON) text into validated dataclasses."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .maps import SmoothMap


@dataclass(frozen=True)
class OrbitConfig:
    N: int = 100_000
    count: int = 1
    x0: float | None = None
    precision: int | str | None = None
    on_escape: str = "raise"


@dataclass(frozen=True)
class LyapunovConfig:
    window: int = 10_000
    delta_grid: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    tail_fraction: float = 1.0 / 3.0
    write_orbits: bool = False


@dataclass(frozen=True)
class ShadowingConfig:
    epsilon: float = 0.2
    L: int = 2
    delta: float | str = "auto"
    check_ipsi: bool = False
    disjoint_window: int = 10_000
    step_budget: int = 1_000_000


@dataclass(frozen=True)
class EntropyConfig:
    epsilon_schedule: tuple = (0.2, 0.1)
    n_schedule: tuple = tuple(range(8, 15))
    katok_epsilon: float = 0.1
    katok_n: tuple = tuple(range(4, 11))
    gamma: float = 0.01
    L: int = 8
    delta0: float = 1e-3
    delta_grid: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    sequence_lengths: tuple = (10_000, 20_000, 40_000)
    tail_fraction: float = 1.0 / 3.0


@dataclass(frozen=True)
class TypesConfig:
    n: tuple = (4, 50, 200)
    L: tuple = (2, 8, 16, 32)


@dataclass(frozen=True)
class ExperimentConfig:
    map: dict = field(default_factory=lambda: {"family": "logistic", "params": [4.0]})
    seed: int = 0
    orbit: OrbitConfig = OrbitConfig()
    lyapunov: LyapunovConfig = LyapunovConfig()
    shadowing: ShadowingConfig = ShadowingConfig()
    entropy: EntropyConfig = EntropyConfig()
    types: TypesConfig = TypesConfig()
    output_dir: str = "out"

    def build_map(self):
        try:
            return SmoothMap.from_spec(self.map)
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(str(exc), "map") from exc

    def to_dict(self):
        return _plain(dataclasses.asdict(self))

    def digest(self):
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def dump(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=True)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


# -- validation ---------------------------------------------------------------------

def _line_map(text):
    """Map key paths to 1-based line numbers using the YAML node tree."""
    lines = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = path + (str(k.value),)
                lines[p] = k.start_mark.line + 1
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                lines[path + (str(i),)] = v.start_mark.line + 1
                walk(v, path + (str(i),))

    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines
    if root is not None:
        walk(root, ())
    return lines


class _Checker:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, path, msg):
        where = ".".join(path)
        line = self.lines.get(tuple(path))
        raise ConfigError(f"{msg}" + (f" (line {line})" if line else ""), where)

    def section(self, cls, data, path):
        if data is None:
            return cls()
        if not isinstance(data, dict):
            self.fail(path, "expected a mapping")
        names = {f.name: f for f in dataclasses.fields(cls)}
        for key in data:
            if key not in names:
                self.fail(path + [str(key)], f"unknown field {key!r}")
        kwargs = {}
        defaults = cls()
        for name in names:
            if name in data:
                kwargs[name] = self.value(getattr(defaults, name), data[name], path + [name],
                                          names[name].type)
        return cls(**kwargs)

    def value(self, default, v, path, type_hint):
        hint = str(type_hint)
        if isinstance(default, tuple):
            if not isinstance(v, (list, tuple)) or not v:
                self.fail(path, "expected a nonempty list")
            elem = default[0] if default else 0.0
            return tuple(self.value(elem, x, path + [str(i)], type(elem).__name__)
                         for i, x in enumerate(v))
        if isinstance(default, bool):
            if not isinstance(v, bool):
                self.fail(path, "expected true/false")
            return v
        if v is None:
            if "None" in hint:
                return None
            self.fail(path, "value required")
        if isinstance(v, str) and ("str" in hint):
            return v
        if isinstance(default, int) and "float" not in hint:
            if isinstance(v, bool) or not isinstance(v, int):
                self.fail(path, f"expected an integer, got {v!r}")
            return v
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(path, f"expected a number, got {v!r}")
        return float(v) if "int" not in hint or isinstance(v, float) else v


def config_from_dict(data, lines=None):
    """Validate a plain mapping into an :class:`ExperimentConfig`."""
    chk = _Checker(lines or {})
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping")
    allowed = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for key in data:
        if key not in allowed:
            chk.fail([str(key)], f"unknown field {key!r}")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        chk.fail(["seed"], "seed must be an integer in [0, 2^64)")
    mp = data.get("map", {"family": "logistic", "params": [4.0]})
    if not isinstance(mp, dict):
        chk.fail(["map"], "expected a mapping")
    cfg = ExperimentConfig(
        map=dict(mp),
        seed=seed,
        orbit=chk.section(OrbitConfig, data.get("orbit"), ["orbit"]),
        lyapunov=chk.section(LyapunovConfig, data.get("lyapunov"), ["lyapunov"]),
        shadowing=chk.section(ShadowingConfig, data.get("shadowing"), ["shadowing"]),
        entropy=chk.section(EntropyConfig, data.get("entropy"), ["entropy"]),
        types=chk.section(TypesConfig, data.get("types"), ["types"]),
        output_dir=str(data.get("output_dir", "out")),
    )
    _check_ranges(cfg, chk)
    try:
        cfg.build_map()
    except ConfigError as exc:
        chk.fail(["map"], str(exc).split(": ", 1)[-1])
    return cfg


def _check_ranges(cfg, chk):
    o = cfg.orbit
    if o.N < 1:
        chk.fail(["orbit", "N"], "N must be >= 1")
    if o.count < 1:
        chk.fail(["orbit", "count"], "count must be >= 1")
    if o.on_escape not in ("raise", "clamp"):
        chk.fail(["orbit", "on_escape"], "must be 'raise' or 'clamp'")
    if isinstance(o.precision, str) and o.precision != "auto":
        chk.fail(["orbit", "precision"], "must be an integer number of bits or 'auto'")
    if isinstance(o.precision, (int, float)) and o.precision < 53:
        chk.fail(["orbit", "precision"], "extended precision needs >= 53 bits")
    if o.x0 is not None and not 0.0 <= o.x0 <= 1.0:
        chk.fail(["orbit", "x0"], "x0 must lie in [0, 1]")
    ly = cfg.lyapunov
    if ly.window < 1:
        chk.fail(["lyapunov", "window"], "window must be >= 1")
    if not 0 < ly.tail_fraction <= 1:
        chk.fail(["lyapunov", "tail_fraction"], "must lie in (0, 1]")
    for name, grid in (("lyapunov", ly.delta_grid), ("entropy", cfg.entropy.delta_grid)):
        if any(not 0 < d < 1 for d in grid) or any(a <= b for a, b in zip(grid, grid[1:])):
            chk.fail([name, "delta_grid"], "must be strictly decreasing in (0, 1)")
    sh = cfg.shadowing
    if not sh.epsilon > 0:
        chk.fail(["shadowing", "epsilon"], "epsilon must be positive")
    if sh.L < 1:
        chk.fail(["shadowing", "L"], "L must be >= 1")
    if isinstance(sh.delta, str) and sh.delta != "auto":
        chk.fail(["shadowing", "delta"], "must be a number in (0, 1) or 'auto'")
    if isinstance(sh.delta, float) and not 0 < sh.delta < 1:
        chk.fail(["shadowing", "delta"], "must lie in (0, 1)")
    en = cfg.entropy
    if any(e <= 0 for e in en.epsilon_schedule) or en.katok_epsilon <= 0:
        chk.fail(["entropy", "epsilon_schedule"], "epsilons must be positive")
    if any(n < 1 for n in en.n_schedule + en.katok_n):
        chk.fail(["entropy", "n_schedule"], "n values must be >= 1")
    if any(n < 1 for n in en.sequence_lengths):
        chk.fail(["entropy", "sequence_lengths"], "lengths must be >= 1")
    if en.gamma < 0:
        chk.fail(["entropy", "gamma"], "gamma must be >= 0")
    if not 0 < en.delta0 < 1:
        chk.fail(["entropy", "delta0"], "must lie in (0, 1)")
    if any(n < 0 for n in cfg.types.n) or any(L < 1 for L in cfg.types.L):
        chk.fail(["types"], "need n >= 0 and L >= 1")


def load_config(path):
    """Read and validate a YAML/JSON configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return config_from_dict(data if data is not None else {}, _line_map(text))

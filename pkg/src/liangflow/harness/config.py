"""Sweep configuration files: flat ``key = value`` lines with ``#`` comments.

Grids are written ``start:stop:step`` (stop included) and lists are
comma-separated. Unknown keys are rejected so a typo in a physical
parameter never silently falls back to a default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..errors import ConfigError, ResourceGuardError
from ..exact import L_MAX_DYNAMICS
from ..liang import MAX_DENSE, Engine
from ..model import GOLDEN_BETA, AAH_HOPPING

EXPERIMENTS = (
    "aah_heatmap",
    "aah_crosscut",
    "tfim_map",
    "tfim_profile",
    "annni_ed",
    "delta_sg",
    "frozen_site_sweep",
)
AAH_EXPERIMENTS = ("aah_heatmap", "aah_crosscut")

DEFAULT_LAMBDA_GRID = "0.1:3.5:0.05"
DEFAULT_B_GRID = "0.05:2.0:0.05"


@dataclass(frozen=True)
class SweepConfig:
    experiment: str
    L: int
    lambda_grid: tuple[float, ...] = ()
    beta: float = GOLDEN_BETA
    hopping: float = AAH_HOPPING
    kappa_grid: tuple[float, ...] = (0.0,)
    B_grid: tuple[float, ...] = ()
    epsilon: float | None = None  # None: automatic tilt rule
    init: str = "neel"
    init_B: float | None = None
    frozen_site: str = "middle"  # "fibonacci", "middle" or an integer
    frozen_sites: tuple[int, ...] = ()
    target_site: int | None = None
    distances: tuple[int, ...] = ()  # empty: full profile to the chain end
    side: str = "left"
    times: tuple[float, ...] = ()
    window: tuple[float, float] | None = None
    engine: str | None = None
    threshold: float = 1e-4
    output: str | None = None
    workers: int = 1

    @property
    def is_aah(self) -> bool:
        return self.experiment in AAH_EXPERIMENTS

    @property
    def t_max(self) -> float:
        return max(self.times)


def parse_grid(text: str) -> tuple[float, ...]:
    """``a:b:s`` inclusive range, or a comma-separated list of numbers."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if not step > 0 or stop < start:
            raise ValueError(f"grid {text!r} needs step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9))
        return tuple(round(start + k * step, 12) for k in range(n + 1))
    values = tuple(float(v) for v in text.split(",") if v.strip())
    if not values:
        raise ValueError("empty list")
    return values


def _int_grid(text: str) -> tuple[int, ...]:
    values = parse_grid(text)
    if any(v != int(v) for v in values):
        raise ValueError(f"{text!r} must contain integers")
    return tuple(int(v) for v in values)


def _window(text: str) -> tuple[float, float]:
    parts = text.replace(",", ":").split(":")
    if len(parts) != 2:
        raise ValueError("window must be t1:t2")
    return float(parts[0]), float(parts[1])


def _optional_float(text: str) -> float | None:
    return None if text.strip().lower() == "auto" else float(text)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError("must be a positive integer")
    return value


# key -> (SweepConfig field, converter)
_KEYS = {
    "experiment": ("experiment", str),
    "L": ("L", int),
    "lambda_grid": ("lambda_grid", parse_grid),
    "beta": ("beta", float),
    "hopping": ("hopping", float),
    "kappa": ("kappa_grid", parse_grid),
    "kappa_grid": ("kappa_grid", parse_grid),
    "B_grid": ("B_grid", parse_grid),
    "epsilon": ("epsilon", _optional_float),
    "init": ("init", str),
    "init_B": ("init_B", float),
    "frozen_site": ("frozen_site", str),
    "frozen_sites": ("frozen_sites", _int_grid),
    "target_site": ("target_site", int),
    "distances": ("distances", lambda s: () if s.strip() == "profile" else _int_grid(s)),
    "side": ("side", str),
    "times": ("times", parse_grid),
    "t_max": ("t_max", float),
    "dt": ("dt", float),
    "window": ("window", _window),
    "engine": ("engine", str),
    "threshold": ("threshold", float),
    "output": ("output", str),
    "workers": ("workers", _positive_int),
}


def parse_config(text: str) -> SweepConfig:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        name, convert = _KEYS[key]
        if name in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[name] = convert(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
        lines[name] = lineno
    return _build(values, lines)


def load_config(path: str | Path) -> SweepConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)


def _build(values: dict, lines: dict) -> SweepConfig:
    def fail(message: str, name: str | None = None):
        raise ConfigError(message, lines.get(name) if name else None)

    if "experiment" not in values:
        fail("missing required key 'experiment'")
    if "L" not in values:
        fail("missing required key 'L'")
    experiment = values["experiment"]
    if experiment not in EXPERIMENTS:
        fail(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}", "experiment")
    aah = experiment in AAH_EXPERIMENTS

    t_max, dt = values.pop("t_max", None), values.pop("dt", None)
    if "times" in values and (t_max is not None or dt is not None):
        fail("give either 'times' or 't_max'/'dt', not both", "times")
    if "times" not in values:
        if t_max is None:
            fail("missing time grid: set 'times' or 't_max' (with optional 'dt')")
        dt = 1.0 if dt is None else dt
        if not dt > 0:
            fail("dt must be positive", "dt")
        if not t_max > 0:
            fail("t_max must be positive", "t_max")
        values["times"] = parse_grid(f"0:{t_max}:{dt}")
        lines["times"] = lines.get("t_max")
    if any(t < 0 for t in values["times"]):
        fail("times must be non-negative", "times")

    values.setdefault("init", "neel" if aah else "ground")
    values.setdefault("frozen_site", "fibonacci" if aah else "middle")
    if aah:
        values.setdefault("lambda_grid", parse_grid(DEFAULT_LAMBDA_GRID))
    else:
        values.setdefault("B_grid", parse_grid(DEFAULT_B_GRID))
    cfg = SweepConfig(**values)

    L = cfg.L
    if L < 3:
        fail("L must be at least 3", "L")
    if aah and not cfg.lambda_grid:
        fail("lambda_grid is empty", "lambda_grid")
    if not aah and not cfg.B_grid:
        fail("B_grid is empty", "B_grid")
    if aah and any(lam < 0 for lam in cfg.lambda_grid):
        fail("lambda values must be non-negative", "lambda_grid")
    if any(B < 0 for B in cfg.B_grid):
        fail("B values must be non-negative", "B_grid")
    if any(not 0 <= k < 0.5 for k in cfg.kappa_grid):
        fail("kappa must lie in [0, 0.5)", "kappa_grid")
    if experiment.startswith("tfim") and any(k != 0 for k in cfg.kappa_grid):
        fail(f"{experiment} is the kappa = 0 chain; use annni_ed for kappa > 0", "kappa_grid")
    if cfg.init not in ("neel", "ground", "ferro"):
        fail(f"init must be neel, ground or ferro, got {cfg.init!r}", "init")
    if cfg.init_B is not None and cfg.init != "ground":
        fail("init_B only applies to init = ground", "init_B")
    if cfg.epsilon is not None and cfg.epsilon < 0:
        fail("epsilon must be non-negative", "epsilon")
    if cfg.side not in ("left", "right"):
        fail("side must be left or right", "side")
    if cfg.engine is not None and cfg.engine not in {e.value for e in Engine}:
        fail(f"unknown engine {cfg.engine!r}", "engine")
    if cfg.frozen_site not in ("fibonacci", "middle"):
        try:
            b = int(cfg.frozen_site)
        except ValueError:
            fail("frozen_site must be fibonacci, middle or a site index", "frozen_site")
        if not 1 <= b <= L:
            fail(f"frozen_site {b} outside [1, {L}]", "frozen_site")
    if any(d < 1 for d in cfg.distances):
        fail("distances must be >= 1", "distances")
    if cfg.threshold <= 0:
        fail("threshold must be positive", "threshold")

    if aah:
        window = cfg.window or (100.0, 200.0)
        if cfg.window is None:
            cfg = replace(cfg, window=window)
        t1, t2 = window
        if not 0 <= t1 <= t2 <= cfg.t_max:
            fail(f"window [{t1}, {t2}] must lie inside [0, t_max={cfg.t_max}]", "window")
    elif cfg.window is not None:
        fail("window only applies to AAH experiments", "window")

    if experiment == "frozen_site_sweep":
        if cfg.target_site is None:
            fail("frozen_site_sweep needs target_site")
        if not 1 <= cfg.target_site <= L:
            fail(f"target_site outside [1, {L}]", "target_site")
        if any(not 1 <= b <= L or b == cfg.target_site for b in cfg.frozen_sites):
            fail("frozen_sites must be in range and differ from target_site", "frozen_sites")

    exact_run = experiment == "annni_ed" or cfg.engine == Engine.EXACT.value
    where = f"line {lines['L']}: " if "L" in lines else ""
    if exact_run and L > L_MAX_DYNAMICS:
        raise ResourceGuardError(f"{where}L={L} exceeds the exact-engine limit {L_MAX_DYNAMICS}")
    if 2 * L > MAX_DENSE:
        raise ResourceGuardError(f"{where}L={L} exceeds the dense-matrix limit {MAX_DENSE}")
    return cfg

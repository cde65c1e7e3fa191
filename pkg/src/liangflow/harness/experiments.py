"""Parameter sweeps that write flow measurements as CSV tables.

Every grid point (one lambda, or one (kappa, B) pair) is computed
independently with single-threaded BLAS, so the numbers are the same
whether points run in this process or in a pool of workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import product

import numpy as np
from threadpoolctl import threadpool_limits

from ..errors import ConfigError, EngineError
from ..liang import Engine, InitialState, QuenchPair, default_engine, delta_S_ground
from ..model import ChainModel, build_aah, build_annni, fibonacci_frozen_site, middle_site
from .config import SweepConfig
from .lightcone import fit_lightcone_velocity
from .table import ResultTable, Row

log = logging.getLogger(__name__)

AUTO_TILT = 1e-4
AUTO_TILT_BELOW = 0.1


def grid_points(cfg: SweepConfig) -> list[tuple[float, ...]]:
    if cfg.is_aah:
        return [(lam,) for lam in cfg.lambda_grid]
    return list(product(cfg.kappa_grid, cfg.B_grid))


def frozen_site(cfg: SweepConfig) -> int:
    if cfg.frozen_site == "fibonacci":
        return fibonacci_frozen_site(cfg.L)
    if cfg.frozen_site == "middle":
        return middle_site(cfg.L)
    return int(cfg.frozen_site)


def targets(cfg: SweepConfig, b: int) -> list[int]:
    sign = -1 if cfg.side == "left" else 1
    reach = b - 1 if cfg.side == "left" else cfg.L - b
    distances = cfg.distances or tuple(range(1, reach + 1))
    out = [b + sign * d for d in distances]
    bad = [d for d, a in zip(distances, out) if not 1 <= a <= cfg.L]
    if bad:
        raise ConfigError(f"distances {bad} fall off the {cfg.side} end of the chain from site {b}")
    return out


def _ising_model(cfg: SweepConfig, kappa: float, B: float, init: str) -> tuple[ChainModel, Engine]:
    engine = Engine(cfg.engine) if cfg.engine else default_engine(
        build_annni(cfg.L, kappa, B), InitialState(init)
    )
    if cfg.experiment == "annni_ed" and cfg.engine is None:
        engine = Engine.EXACT
    eps = cfg.epsilon
    if eps is None:
        tilt = engine is Engine.EXACT and init in ("ferro", "ground") and B < AUTO_TILT_BELOW
        eps = AUTO_TILT if tilt else 0.0
    return build_annni(cfg.L, kappa, B, eps), engine


def _pair(cfg: SweepConfig, point: tuple[float, ...]) -> tuple[QuenchPair, float, float]:
    if cfg.is_aah:
        (lam,) = point
        model = build_aah(cfg.L, lam, cfg.beta, cfg.hopping)
        init = InitialState(cfg.init)
        return QuenchPair(model, init, cfg.engine), lam, cfg.beta
    kappa, B = point
    model, engine = _ising_model(cfg, kappa, B, cfg.init)
    source = None
    if cfg.init_B is not None:
        source = build_annni(cfg.L, kappa, cfg.init_B, model.param("epsilon"))
    init = InitialState(cfg.init, source)
    return QuenchPair(model, init, engine), B, kappa


def run_point(cfg: SweepConfig, point: tuple[float, ...]) -> list[Row]:
    with threadpool_limits(limits=1):
        return _compute(cfg, point)


def _compute(cfg: SweepConfig, point: tuple[float, ...]) -> list[Row]:
    pair, p1, p2 = _pair(cfg, point)
    exp, L, engine = cfg.experiment, cfg.L, pair.engine.value
    times = np.asarray(cfg.times)
    rows: list[Row] = []

    if exp == "frozen_site_sweep":
        a = cfg.target_site
        sweep = cfg.frozen_sites or tuple(s for s in range(1, L + 1) if s != a)
        free = pair.entropies(times, [a])[:, 0]
        for b in sweep:
            flow = free - pair.entropies(times, [a], b)[:, 0]
            flow[times == 0] = 0.0
            rows += [Row(exp, L, p1, p2, b, a, t, v, engine) for t, v in zip(times, flow)]
        return rows

    b = frozen_site(cfg)
    sites = targets(cfg, b)

    if cfg.is_aah:
        t1, t2 = cfg.window
        inside = times[(times >= t1) & (times <= t2)]
        if inside.size < 10:
            raise ConfigError(f"window [{t1}, {t2}] holds {inside.size} samples, need 10")
        flows = pair.flows(b, sites, inside)
        mean_signed, mean_abs = flows.mean(axis=0), np.abs(flows).mean(axis=0)
        extras = (("window_start", t1), ("window_end", t2))
        for a, s, m in zip(sites, mean_signed, mean_abs):
            rows.append(Row(exp, L, p1, p2, b, a, t2, float(s), engine, extras, float(m)))
        return rows

    if exp == "delta_sg":
        t = cfg.t_max
        flow = pair.flows(b, sites, [t])[0]
        dsg = delta_S_ground(pair.model, b, sites, pair.engine)
        for a, v, g in zip(sites, flow, dsg):
            rows.append(Row(exp, L, p1, p2, b, a, t, float(v), engine, (("delta_S_g", float(g)),)))
        return rows

    flows = pair.flows(b, sites, times)
    extras_by_t: dict[float, tuple] = {}
    if exp == "tfim_profile":
        distances = [abs(a - b) for a in sites]
        profiles = [(t, distances, flows[k]) for k, t in enumerate(times) if t > 0]
        try:
            fit = fit_lightcone_velocity(profiles, cfg.threshold)
            v = fit.velocity
        except EngineError as exc:
            log.warning("lightcone fit failed at B=%g: %s", p1, exc)
            fit, v = None, float("nan")
        for t in times:
            reach = fit.reach(t) if fit else float("nan")
            extras_by_t[t] = (("lightcone_reach", reach), ("v_fit", v), ("v_quasiparticle", min(1.0, p1)))
    for k, t in enumerate(times):
        extras = extras_by_t.get(t, ())
        for a, v in zip(sites, flows[k]):
            rows.append(Row(exp, L, p1, p2, b, a, float(t), float(v), engine, extras))
    return rows


def run_experiment(cfg: SweepConfig, workers: int | None = None) -> ResultTable:
    """Evaluate every grid point; rows come out in grid order for any worker count."""
    workers = cfg.workers if workers is None else workers
    points = grid_points(cfg)
    if not points:
        raise ConfigError("parameter grid is empty")
    table = ResultTable()
    if workers <= 1 or len(points) == 1:
        for point in points:
            table.extend(run_point(cfg, point))
        return table
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for rows in pool.map(run_point, [cfg] * len(points), points):
            table.extend(rows)
    return table

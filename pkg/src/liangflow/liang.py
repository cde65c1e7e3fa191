"""Cumulative and instantaneous Liang information flow between two sites.

The cumulative flow from a frozen site ``b`` to a target ``a`` is the
single-site entropy of ``a`` after free evolution minus the same entropy
after evolution with ``b`` frozen, both runs starting from one state.
Values are kept signed; callers take absolute values for presentation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import bdg, exact, quadratic
from .errors import EngineError, ResourceGuardError
from .model import ChainModel, TermKind, freeze

log = logging.getLogger(__name__)

MAX_DENSE = 6000
LN2 = float(np.log(2.0))


class Engine(str, Enum):
    QUADRATIC = "quadratic"
    BDG = "bdg"
    EXACT = "exact"


@dataclass(frozen=True)
class InitialState:
    """Starting state shared by the frozen and unfrozen runs.

    ``kind`` is ``"neel"`` (odd sites up), ``"ferro"`` (all spins down) or
    ``"ground"``. A ground state is taken of ``source`` when given, else of
    the unfrozen model being evolved.
    """

    kind: str
    source: ChainModel | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("neel", "ferro", "ground"):
            raise EngineError(f"unknown initial state {self.kind!r}")

    @classmethod
    def neel(cls) -> "InitialState":
        return cls("neel")

    @classmethod
    def ferromagnetic(cls) -> "InitialState":
        return cls("ferro")

    @classmethod
    def ground(cls, of: ChainModel | None = None) -> "InitialState":
        return cls("ground", of)


@dataclass(frozen=True)
class FlowSeries:
    b: int
    a: int
    times: np.ndarray
    values: np.ndarray
    engine: Engine
    params: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return abs(self.a - self.b)

    @property
    def abs_values(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class FlowRate:
    """``rate`` combines the two central differences as ``(4 half - full) / 3``,
    which is the slope at ``t`` of the cubic through all four samples."""

    rate: float
    central: float
    central_half_step: float
    converged: bool


def _is_u1(model: ChainModel) -> bool:
    return model.kinds() <= {TermKind.HOP, TermKind.Z}


def _is_tfim(model: ChainModel) -> bool:
    return model.kinds() <= {TermKind.ZZ, TermKind.X} and all(
        abs(t.sites[0] - t.sites[1]) == 1 for t in model.terms if t.kind is TermKind.ZZ
    )


def default_engine(model: ChainModel, init: InitialState) -> Engine:
    if _is_u1(model) and init.kind == "neel":
        return Engine.QUADRATIC
    if _is_tfim(model) and init.kind in ("ground", "ferro"):
        if init.source is None or _is_tfim(init.source):
            return Engine.BDG
    return Engine.EXACT


def check_compatible(model: ChainModel, init: InitialState, engine: Engine) -> None:
    if engine is Engine.QUADRATIC:
        if not _is_u1(model) or init.kind != "neel":
            raise EngineError("quadratic engine needs an XX chain with Z fields and a Neel start")
        if model.L > MAX_DENSE:
            raise ResourceGuardError(f"L={model.L} exceeds dense limit {MAX_DENSE}")
    elif engine is Engine.BDG:
        if not _is_tfim(model) or init.kind == "neel":
            raise EngineError("bdg engine needs a kappa=0, epsilon=0 Ising chain and a ground or ferro start")
        if init.source is not None and not _is_tfim(init.source):
            raise EngineError("bdg ground state source must be a kappa=0 Ising chain")
        if 2 * model.L > MAX_DENSE:
            raise ResourceGuardError(f"2L={2 * model.L} exceeds dense limit {MAX_DENSE}")
    elif model.L > exact.L_MAX_DYNAMICS:
        raise ResourceGuardError(f"L={model.L} exceeds exact-engine limit {exact.L_MAX_DYNAMICS}")
    if init.source is not None and init.source.L != model.L:
        raise EngineError("ground-state source model has a different length")


def _site_list(L: int, sites: Sequence[int]) -> list[int]:
    sites = [int(s) for s in sites]
    for s in sites:
        if not 1 <= s <= L:
            raise EngineError(f"site {s} outside [1, {L}]")
    return sites


def _times(times: Sequence[float]) -> np.ndarray:
    t = np.asarray(times, dtype=float).reshape(-1)
    if t.size and (not np.all(np.isfinite(t)) or t.min() < 0):
        raise EngineError("sample times must be finite and non-negative")
    return t


class QuenchPair:
    """One initial state evolved under a model and under frozen copies of it.

    Hamiltonians are compiled and diagonalised once per (model, frozen site)
    and reused across every time sample and target site.
    """

    def __init__(self, model: ChainModel, init: InitialState, engine: Engine | str | None = None):
        engine = default_engine(model, init) if engine is None else Engine(engine)
        check_compatible(model, init, engine)
        self.model, self.init, self.engine = model, init, engine
        self._propagators: dict[int | None, object] = {}
        self.state = self._initial_state()

    def _initial_state(self):
        L, kind = self.model.L, self.init.kind
        source = self.init.source or self.model
        if self.engine is Engine.QUADRATIC:
            return quadratic.neel_state(L)
        if self.engine is Engine.BDG:
            if kind == "ferro":
                return bdg.FerromagneticCat(L)
            state = bdg.ground_covariance(bdg.compile_bdg(source))
            if state.degenerate:
                log.info("degenerate bdg ground state; using the even-parity member")
            return state
        if kind == "neel":
            return exact.neel_vector(L)
        if kind == "ferro":
            return exact.ferromagnetic_vector(L)
        gs = exact.model_ground_state(source)
        if gs.degenerate:
            log.warning("exact ground state is degenerate (gap %.2e); add a longitudinal tilt", gs.gap)
        return gs

    def propagator(self, b: int | None = None):
        if b not in self._propagators:
            m = self.model if b is None else freeze(self.model, b)
            if self.engine is Engine.QUADRATIC:
                prop = quadratic.U1Propagator(quadratic.compile_u1(m))
            elif self.engine is Engine.BDG:
                prop = bdg.BdgPropagator(bdg.compile_bdg(m))
            else:
                prop = exact.ExactPropagator(exact.assemble(m))
            self._propagators[b] = prop
        return self._propagators[b]

    def entropies(self, times: Sequence[float], sites: Sequence[int], b: int | None = None) -> np.ndarray:
        """Single-site entropies, shape ``(len(times), len(sites))``; ``b`` frozen if given."""
        times = _times(times)
        sites = _site_list(self.model.L, sites)
        prop = self.propagator(b)
        out = np.empty((times.size, len(sites)))
        if self.engine is Engine.EXACT:
            for k, psi in enumerate(prop.evolve_many(self.state, times)):
                out[k] = [exact.site_entropy_exact(psi, j) for j in sites]
            return out
        for k, t in enumerate(times):
            if self.engine is Engine.QUADRATIC:
                occ = prop.occupations(self.state, t, sites)
                out[k] = [quadratic.occupation_entropy(p) for p in occ]
            elif isinstance(self.state, bdg.FerromagneticCat):
                out[k] = self.state.entropies(prop, t, sites)
            else:
                mag = prop.magnetisations(self.state.M, t, sites)
                out[k] = [bdg.bloch_entropy(abs(m)) for m in mag]
        return out

    def flows(self, b: int, targets: Sequence[int], times: Sequence[float]) -> np.ndarray:
        """Signed cumulative flow from ``b`` to each target, shape ``(len(times), len(targets))``."""
        targets = _site_list(self.model.L, targets)
        _site_list(self.model.L, [b])
        if b in targets:
            raise EngineError(f"target equals frozen site {b}")
        free = self.entropies(times, targets)
        frozen = self.entropies(times, targets, b)
        out = free - frozen
        if len(out) and np.any(_times(times) == 0):
            out[_times(times) == 0] = 0.0
        return out


def cumulative_flow(
    model: ChainModel,
    init: InitialState,
    b: int,
    a: int,
    times: Sequence[float],
    engine: Engine | str | None = None,
) -> FlowSeries:
    pair = QuenchPair(model, init, engine)
    values = pair.flows(b, [a], times)[:, 0]
    return FlowSeries(b, a, _times(times), values, pair.engine, dict(model.params))


def instantaneous_flow(
    model: ChainModel,
    init: InitialState,
    b: int,
    a: int,
    t: float,
    dt: float = 0.01,
    engine: Engine | str | None = None,
) -> FlowRate:
    """Rate of the cumulative flow from central differences at ``dt`` and ``dt/2``."""
    if not dt > 0:
        raise EngineError(f"step must be positive, got {dt}")
    if t < dt:
        raise EngineError(f"t={t} is closer to 0 than the step {dt}")
    pair = QuenchPair(model, init, engine)
    grid = [t - dt, t + dt, t - dt / 2, t + dt / 2]
    T = pair.flows(b, [a], grid)[:, 0]
    full = (T[1] - T[0]) / (2 * dt)
    half = (T[3] - T[2]) / dt
    converged = abs(full - half) <= 1e-8 + 1e-3 * abs(half)
    return FlowRate(float((4 * half - full) / 3), float(full), float(half), bool(converged))


def late_time_average(series: FlowSeries, window: tuple[float, float], min_samples: int = 10) -> float:
    """Mean of ``|T_d(t)|`` over samples with ``t1 <= t <= t2``."""
    t1, t2 = window
    if t2 < t1:
        raise EngineError(f"empty window [{t1}, {t2}]")
    if t1 < series.times.min() or t2 > series.times.max():
        raise EngineError(f"window [{t1}, {t2}] outside sampled range")
    inside = (series.times >= t1) & (series.times <= t2)
    if inside.sum() < min_samples:
        raise EngineError(f"window [{t1}, {t2}] holds {inside.sum()} samples, need {min_samples}")
    return float(np.mean(np.abs(series.values[inside])))


def ground_entropies(model: ChainModel, sites: Sequence[int], engine: Engine | str | None = None) -> np.ndarray:
    engine = default_engine(model, InitialState.ground()) if engine is None else Engine(engine)
    sites = _site_list(model.L, sites)
    if engine is Engine.BDG:
        check_compatible(model, InitialState.ground(), engine)
        M = bdg.ground_covariance(bdg.compile_bdg(model))
        return np.array([bdg.site_entropy_bdg(M, j) for j in sites])
    if engine is Engine.EXACT:
        gs = exact.model_ground_state(model)
        if gs.degenerate:
            raise EngineError(f"degenerate ground state (gap {gs.gap:.2e}); add a longitudinal tilt")
        return np.array([exact.site_entropy_exact(gs, j) for j in sites])
    raise EngineError(f"{engine.value} engine has no ground-state support")


def delta_S_ground(model: ChainModel, b: int, a: int | Sequence[int], engine: Engine | str | None = None):
    """Ground-state entropy of ``a`` without minus with site ``b`` frozen."""
    targets = [a] if np.isscalar(a) else list(a)
    if b in targets:
        raise EngineError(f"target equals frozen site {b}")
    diff = ground_entropies(model, targets, engine) - ground_entropies(freeze(model, b), targets, engine)
    return float(diff[0]) if np.isscalar(a) else diff

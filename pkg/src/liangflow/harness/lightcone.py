from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EngineError


@dataclass(frozen=True)
class LightconeFit:
    velocity: float
    intercept: float
    times: np.ndarray
    fronts: np.ndarray

    def reach(self, t: float) -> float:
        return self.intercept + self.velocity * t


def front_position(distances: Sequence[int], values: Sequence[float], threshold: float) -> int | None:
    """Largest distance whose ``|T|`` reaches ``threshold``."""
    d = np.asarray(distances)
    hit = np.abs(np.asarray(values)) >= threshold
    return int(d[hit].max()) if hit.any() else None


def fit_lightcone_velocity(
    profiles: Sequence[tuple[float, Sequence[int], Sequence[float]]], threshold: float = 1e-4
) -> LightconeFit:
    """Least-squares slope of the front position against time.

    ``profiles`` holds ``(t, distances, values)`` triples at distinct times.
    """
    times = [float(t) for t, _, _ in profiles]
    if len(set(times)) < 3:
        raise EngineError("need spatial profiles at three or more distinct times")
    fronts = []
    for t, d, v in profiles:
        front = front_position(d, v, threshold)
        if front is None:
            raise EngineError(f"no front above {threshold:g} at t={t}")
        fronts.append(front)
    slope, intercept = np.polyfit(np.asarray(times), np.asarray(fronts, dtype=float), 1)
    return LightconeFit(float(slope), float(intercept), np.asarray(times), np.asarray(fronts))

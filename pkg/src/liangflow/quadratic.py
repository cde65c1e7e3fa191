"""Number-conserving free-fermion engine for XX chains with longitudinal fields.

Jordan-Wigner convention: an occupied site is spin up, ``n_j = (1 + Z_j)/2``.
Then ``X_j X_{j+1} + Y_j Y_{j+1} = 2 (c+_j c_{j+1} + h.c.)`` and
``h Z_j = 2 h n_j - h``, so a bond of amplitude ``J`` gives ``h_{j,j+1} = 2J``
and a field of amplitude ``h`` gives ``h_jj = 2h``. Constants are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EngineError
from .model import ChainModel, TermKind

# p outside [-tol, 1 + tol] means the evolution is broken, not roundoff
CLAMP_TOL = 1e-8


class QuadraticError(EngineError):
    pass


@dataclass(frozen=True)
class SingleParticleMatrix:
    h: np.ndarray
    model: ChainModel

    @property
    def L(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class CorrelationState:
    """``C[j, k] = <c+_j c_k>`` at time ``t`` (0-based array indices)."""

    C: np.ndarray
    t: float = 0.0

    @property
    def L(self) -> int:
        return self.C.shape[0]

    def occupations(self) -> np.ndarray:
        return np.real(np.diag(self.C)).copy()


def compile_u1(model: ChainModel) -> SingleParticleMatrix:
    bad = model.kinds() - {TermKind.HOP, TermKind.Z}
    if bad:
        raise QuadraticError(f"terms {sorted(k.value for k in bad)} break U(1); use bdg or exact")
    h = np.zeros((model.L, model.L))
    for term in model.terms:
        if term.kind is TermKind.HOP:
            j, k = term.sites
            if abs(j - k) != 1:
                raise QuadraticError(f"hopping {term.sites} is not nearest-neighbour")
            h[j - 1, k - 1] += 2.0 * term.amplitude
            h[k - 1, j - 1] += 2.0 * term.amplitude
        else:
            (j,) = term.sites
            h[j - 1, j - 1] += 2.0 * term.amplitude
    return SingleParticleMatrix(h, model)


def neel_state(L: int) -> CorrelationState:
    """Odd sites (1-based) occupied."""
    if L < 2:
        raise QuadraticError(f"need L >= 2, got {L}")
    occ = np.zeros(L)
    occ[0::2] = 1.0
    return CorrelationState(np.diag(occ).astype(complex), 0.0)


class U1Propagator:
    """Evolves correlation matrices under a fixed ``h``.

    ``h`` is diagonalised once; each time sample then costs a few matrix
    products, or ``O(len(sites) * L^2)`` when only occupations are needed.
    """

    def __init__(self, hmat: SingleParticleMatrix):
        self.hmat = hmat
        self.energies, self.modes = np.linalg.eigh(hmat.h)

    def propagator(self, t: float, rows: np.ndarray | None = None) -> np.ndarray:
        """Rows of ``exp(-i h t)``."""
        V = self.modes if rows is None else self.modes[rows]
        return (V * np.exp(-1j * self.energies * t)) @ self.modes.T

    def evolve(self, C0: CorrelationState, t: float) -> CorrelationState:
        _check_time(t)
        if C0.L != self.hmat.L:
            raise QuadraticError(f"state has {C0.L} sites, Hamiltonian {self.hmat.L}")
        if t == 0:
            return C0
        U = self.propagator(t)
        C = U.conj() @ C0.C @ U.T
        return CorrelationState(0.5 * (C + C.conj().T), C0.t + t)

    def occupations(self, C0: CorrelationState, t: float, sites: list[int]) -> np.ndarray:
        """``<n_j>(t)`` for 1-based ``sites``."""
        _check_time(t)
        rows = np.asarray(sites) - 1
        if t == 0:
            return np.real(np.diag(C0.C))[rows]
        U = self.propagator(t, rows)
        diag0 = np.diag(C0.C)
        if np.count_nonzero(C0.C - np.diag(diag0)) == 0:
            return (np.abs(U) ** 2) @ np.real(diag0)
        return np.real(np.einsum("am,mn,an->a", U.conj(), C0.C, U))


def _check_time(t: float) -> None:
    if not t >= 0:
        raise QuadraticError(f"time must be non-negative, got {t}")


def evolve_u1(h: SingleParticleMatrix, C0: CorrelationState, t: float) -> CorrelationState:
    return U1Propagator(h).evolve(C0, t)


def binary_entropy(p: float) -> float:
    """Shannon entropy of ``{p, 1 - p}`` in nats."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log(p) - (1.0 - p) * np.log1p(-p))


def clamp_probability(p: float) -> float:
    if p < -CLAMP_TOL or p > 1.0 + CLAMP_TOL:
        raise QuadraticError(f"occupation {p} outside [0, 1]; engine bug")
    return min(max(p, 0.0), 1.0)


def occupation_entropy(p: float) -> float:
    return binary_entropy(clamp_probability(float(p)))


def site_entropy_u1(C: CorrelationState, j: int) -> float:
    if not 1 <= j <= C.L:
        raise QuadraticError(f"site {j} outside [1, {C.L}]")
    return occupation_entropy(np.real(C.C[j - 1, j - 1]))

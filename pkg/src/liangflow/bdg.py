"""Majorana-covariance engine for the transverse-field Ising chain (kappa = 0).

The chain is first rotated site by site (X -> Z, Z -> -X), so that
``-sum Z_j Z_{j+1} - B sum X_j`` becomes ``-sum X_j X_{j+1} - B sum Z_j``.
Jordan-Wigner Majoranas ``a_{2j-1} = S_j X_j``, ``a_{2j} = S_j Y_j`` with
``S_j = prod_{k<j} Z_k`` then give

    Z_j = -i a_{2j-1} a_{2j},      X_j X_{j+1} = -i a_{2j} a_{2j+1},

and ``H = (i/4) sum_mn A_mn a_m a_n``. States are stored through
``M_mn = (i/2) <[a_m, a_n]>`` so that the rotated magnetisation is
``<Z_j> = -M_{2j-1, 2j}``. Heisenberg evolution is ``a(t) = exp(A t) a``.

Arrays are 0-based: Majoranas of site ``j`` sit at rows ``2j - 2, 2j - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from pfapack.pfaffian import pfaffian
from scipy.sparse.csgraph import connected_components

from .errors import EngineError
from .model import ChainModel, TermKind

ZERO_MODE_TOL = 1e-10
MAGNETISATION_TOL = 1e-8


class BdgError(EngineError):
    pass


@dataclass(frozen=True)
class MajoranaGenerator:
    A: np.ndarray
    model: ChainModel

    @property
    def L(self) -> int:
        return self.A.shape[0] // 2


@dataclass(frozen=True)
class CovarianceState:
    M: np.ndarray
    t: float = 0.0
    degenerate: bool = False

    @property
    def L(self) -> int:
        return self.M.shape[0] // 2

    def magnetisation(self, j: int) -> float:
        """Rotated-frame ``<Z_j>`` (equals original-frame ``<X_j>``)."""
        return -float(self.M[2 * j - 2, 2 * j - 1])


def compile_bdg(model: ChainModel) -> MajoranaGenerator:
    """Majorana generator of a nearest-neighbour Ising chain in a transverse field."""
    for term in model.terms:
        if term.kind is TermKind.ZZ and abs(term.sites[0] - term.sites[1]) != 1:
            raise BdgError("next-nearest-neighbour coupling is not quadratic; use the exact engine")
        if term.kind not in (TermKind.ZZ, TermKind.X):
            raise BdgError(f"term {term.kind.value} on {term.sites} not supported by bdg")
    A = np.zeros((2 * model.L, 2 * model.L))
    for term in model.terms:
        if term.kind is TermKind.ZZ:
            j = min(term.sites)
            p, q = 2 * j - 1, 2 * j  # a_{2j}, a_{2j+1}
        else:
            (j,) = term.sites
            p, q = 2 * j - 2, 2 * j - 1  # a_{2j-1}, a_{2j}
        # amp * (-i a_p a_q) = (i/4)(A_pq a_p a_q + A_qp a_q a_p) with A_pq = -2 amp
        A[p, q] -= 2.0 * term.amplitude
        A[q, p] += 2.0 * term.amplitude
    return MajoranaGenerator(A, model)


def gaussian_parity(M: np.ndarray) -> float:
    """``<prod_j Z_j>`` of a pure Gaussian state, equal to ``(-1)^n Pf(M)``."""
    n = M.shape[0] // 2
    return float((-1) ** n * np.real(pfaffian(M)))


def _site_components(A: np.ndarray) -> list[np.ndarray]:
    L = A.shape[0] // 2
    coupling = np.abs(A).reshape(L, 2, L, 2).sum(axis=(1, 3)) > 0
    n, labels = connected_components(coupling, directed=False)
    groups = [np.nonzero(labels == k)[0] for k in range(n)]
    return sorted(groups, key=lambda g: g[0])


def _component_ground(A: np.ndarray) -> tuple[np.ndarray, bool]:
    """Ground covariance of one connected block; zero modes paired to even parity."""
    e, W = np.linalg.eigh(1j * A)
    nonzero = np.abs(e) > ZERO_MODE_TOL
    Wn = W[:, nonzero]
    M = np.real(1j * (Wn * np.sign(e[nonzero])) @ Wn.conj().T)
    zero = W[:, ~nonzero]
    has_zero = zero.shape[1] > 0
    if has_zero:
        # the null space of a real matrix has a real basis
        basis, s, _ = np.linalg.svd(np.hstack([zero.real, zero.imag]), full_matrices=False)
        N = basis[:, : zero.shape[1]]
        for k in range(0, N.shape[1], 2):
            u, v = N[:, k], N[:, k + 1]
            M -= np.outer(u, v) - np.outer(v, u)
        if gaussian_parity(M) < 0:
            u, v = N[:, 0], N[:, 1]
            M += 2.0 * (np.outer(u, v) - np.outer(v, u))
    return 0.5 * (M - M.T), has_zero


def ground_covariance(gen: MajoranaGenerator) -> CovarianceState:
    """Gaussian ground state, built block by block over disconnected pieces.

    Each piece is put in its even-parity ground state when its spectrum has
    zero modes (B = 0 edge modes, decoupled frozen sites). ``degenerate`` is
    set only for zero modes in pieces longer than one site.
    """
    A = gen.A
    M = np.zeros_like(A)
    degenerate = False
    for sites in _site_components(A):
        idx = np.concatenate([2 * sites, 2 * sites + 1])
        idx.sort()
        block, zero = _component_ground(A[np.ix_(idx, idx)])
        M[np.ix_(idx, idx)] = block
        degenerate |= zero and len(sites) > 1
    return CovarianceState(M, 0.0, degenerate)


class BdgPropagator:
    """Orthogonal flow ``O(t) = exp(A t)`` from one diagonalisation of ``iA``."""

    def __init__(self, gen: MajoranaGenerator):
        self.gen = gen
        self.energies, self.modes = np.linalg.eigh(1j * gen.A)

    def orthogonal(self, t: float, rows: np.ndarray | None = None) -> np.ndarray:
        W = self.modes if rows is None else self.modes[rows]
        return np.real((W * np.exp(-1j * self.energies * t)) @ self.modes.conj().T)

    def evolve(self, M0: CovarianceState, t: float) -> CovarianceState:
        _check(self.gen, M0.M, t)
        if t == 0:
            return M0
        O = self.orthogonal(t)
        M = O @ M0.M @ O.T
        return CovarianceState(0.5 * (M - M.T), M0.t + t, M0.degenerate)

    def magnetisations(self, M0: np.ndarray, t: float, sites: list[int]) -> np.ndarray:
        """Rotated ``<Z_j>(t)`` for 1-based ``sites`` without forming all of ``M(t)``."""
        _check(self.gen, M0, t)
        sites = np.asarray(sites)
        if t == 0:
            return -M0[2 * sites - 2, 2 * sites - 1]
        rows = np.empty(2 * sites.size, dtype=int)
        rows[0::2], rows[1::2] = 2 * sites - 2, 2 * sites - 1
        O = self.orthogonal(t, rows)
        odd, even = O[0::2], O[1::2]
        return -np.einsum("am,mn,an->a", odd, M0, even)


def _check(gen: MajoranaGenerator, M0: np.ndarray, t: float) -> None:
    if not t >= 0:
        raise BdgError(f"time must be non-negative, got {t}")
    if M0.shape != gen.A.shape:
        raise BdgError(f"covariance shape {M0.shape} != generator {gen.A.shape}")


def evolve_bdg(gen: MajoranaGenerator, M0: CovarianceState, t: float) -> CovarianceState:
    return BdgPropagator(gen).evolve(M0, t)


def bloch_entropy(r: float) -> float:
    """Entropy in nats of a qubit with Bloch vector length ``r``."""
    if r > 1.0 + MAGNETISATION_TOL:
        raise BdgError(f"Bloch vector length {r} exceeds 1; engine bug")
    r = min(abs(r), 1.0)
    out = 0.0
    for p in (0.5 * (1.0 + r), 0.5 * (1.0 - r)):
        if p > 0.0:
            out -= p * np.log(p)
    return float(out)


def site_entropy_bdg(M: CovarianceState, j: int) -> float:
    """Single-site entropy from ``rho_j = (I + <Z_j> Z) / 2``."""
    if not 1 <= j <= M.L:
        raise BdgError(f"site {j} outside [1, {M.L}]")
    return bloch_entropy(abs(M.magnetisation(j)))


class FerromagneticCat:
    """The product state with every original-frame spin down.

    In the rotated frame it is ``|+x ... +x>``, which is not Gaussian but is
    ``(G+ + G-)/sqrt(2)`` with ``G+`` the even Gaussian cat of the ``B = 0``
    chain and ``G- = a_1 G+``. Even observables average the two Gaussian
    branches; ``<X_j>`` and ``<Y_j>`` come from the cross term
    ``Re <G+| X_j(t) a_1 |G+>``, a Pfaffian by Wick's theorem.
    """

    def __init__(self, L: int):
        self.L = L
        n = 2 * L
        M = np.zeros((n, n))
        for j in range(1, L):
            # <-X_j X_{j+1}> = 1 in |+x +x>: i a_{2j} a_{2j+1} = -1
            M[2 * j - 1, 2 * j] = -1.0
            M[2 * j, 2 * j - 1] = 1.0
        M[0, n - 1], M[n - 1, 0] = 1.0, -1.0
        if gaussian_parity(M) < 0:
            M[0, n - 1], M[n - 1, 0] = -1.0, 1.0
        self.M_plus = M
        flip = np.ones(n)
        flip[1:] = -1.0
        self.M_minus = flip[:, None] * M * flip[None, :]

    def bloch_vectors(self, prop: BdgPropagator, t: float, sites: list[int]) -> np.ndarray:
        """Rows ``(x, y, z)`` of rotated-frame Bloch vectors at time ``t``."""
        n = 2 * self.L
        if not t >= 0:
            raise BdgError(f"time must be non-negative, got {t}")
        O = prop.orthogonal(t) if t > 0 else np.eye(n)
        two_point = np.eye(n) - 1j * self.M_plus  # <a_p a_q> in G+
        out = np.zeros((len(sites), 3))
        for row, j in enumerate(sites):
            p, q = 2 * j - 2, 2 * j - 1
            z_plus = O[p] @ self.M_plus @ O[q]
            z_minus = O[p] @ self.M_minus @ O[q]
            out[row, 2] = -0.5 * (z_plus + z_minus)
            prefactor = (-1j) ** (j - 1)
            for col, last in ((0, p), (1, q)):
                ops = np.vstack([O[:p], O[last], np.eye(n)[0]])
                G = ops @ two_point @ ops.T
                K = np.triu(G, 1)
                out[row, col] = np.real(prefactor * pfaffian(K - K.T))
        return out

    def entropies(self, prop: BdgPropagator, t: float, sites: list[int]) -> np.ndarray:
        r = np.linalg.norm(self.bloch_vectors(prop, t, sites), axis=1)
        return np.array([bloch_entropy(x) for x in r])

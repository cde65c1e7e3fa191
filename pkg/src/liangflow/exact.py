"""Exact many-body engine on the full 2^L Hilbert space.

Basis states are integers whose bit ``L - j`` encodes site ``j`` (site 1 is
the most significant bit); bit value 0 is spin up (``Z = +1``). This makes
the basis ordering identical to ``kron(site1, site2, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh, expm_multiply

from .errors import EngineError, ResourceGuardError
from .model import ChainModel, Term, TermKind, connected_components

L_MAX_DYNAMICS = 14
L_MAX_GROUND = 16
# dense eigendecomposition below this dimension, Krylov above
DENSE_DIM = 1024
RESIDUAL_TOL = 1e-9
DEGENERACY_TOL = 1e-8
PSD_TOL = 1e-10

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class ManyBodyHamiltonian:
    matrix: sp.csr_matrix
    model: ChainModel

    @property
    def L(self) -> int:
        return self.model.L

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class PureStateVector:
    psi: np.ndarray
    t: float = 0.0

    @property
    def L(self) -> int:
        return int(np.log2(self.psi.size))

    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))


@dataclass(frozen=True)
class GroundState(PureStateVector):
    energy: float = 0.0
    gap: float = np.inf
    degenerate: bool = False


def _bits(L: int, j: int, index: np.ndarray) -> np.ndarray:
    return (index >> (L - j)) & 1


def assemble(model: ChainModel, L_max: int = L_MAX_DYNAMICS) -> ManyBodyHamiltonian:
    """Sparse Hamiltonian of ``model`` in the Z product basis."""
    L = model.L
    if L > L_max:
        raise ResourceGuardError(f"L={L} exceeds exact-engine limit {L_max}")
    dim = 1 << L
    index = np.arange(dim, dtype=np.int64)
    diag = np.zeros(dim)
    rows, cols, vals = [], [], []
    for term in model.terms:
        amp = term.amplitude
        if term.kind is TermKind.Z:
            diag += amp * (1 - 2 * _bits(L, term.sites[0], index))
        elif term.kind is TermKind.ZZ:
            j, k = term.sites
            diag += amp * (1 - 2 * (_bits(L, j, index) ^ _bits(L, k, index)))
        elif term.kind is TermKind.X:
            rows.append(index)
            cols.append(index ^ (1 << (L - term.sites[0])))
            vals.append(np.full(dim, amp))
        elif term.kind is TermKind.HOP:
            # XX + YY = 2 (S+S- + S-S+): flips antiparallel pairs with weight 2
            j, k = term.sites
            mask = (1 << (L - j)) | (1 << (L - k))
            anti = np.nonzero(_bits(L, j, index) != _bits(L, k, index))[0]
            rows.append(anti)
            cols.append(anti ^ mask)
            vals.append(np.full(anti.size, 2.0 * amp))
    rows.append(index)
    cols.append(index)
    vals.append(diag)
    H = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    H.sum_duplicates()
    return ManyBodyHamiltonian(H, model)


def _parity_isometry(L: int, sign: int = 1) -> sp.csr_matrix:
    """Columns ``(|s> + sign |~s>)/sqrt(2)``: the ``sign`` sector of ``prod_j X_j``."""
    dim = 1 << L
    half = np.arange(dim // 2, dtype=np.int64)
    rows = np.concatenate([half, half ^ (dim - 1)])
    cols = np.concatenate([half, half])
    vals = np.concatenate([np.ones(half.size), np.full(half.size, float(sign))]) / np.sqrt(2.0)
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim // 2))


def _lowest(Hs: sp.csr_matrix, k: int, maxiter: int | None) -> tuple[np.ndarray, np.ndarray]:
    if Hs.shape[0] <= DENSE_DIM:
        w, v = np.linalg.eigh(Hs.toarray())
        return w[:k], v[:, :k]
    try:
        w, v = eigsh(Hs, k=k, which="SA", tol=1e-13, maxiter=maxiter)
    except Exception as exc:  # ArpackNoConvergence
        raise EngineError(f"ground state did not converge: {exc}") from exc
    order = np.argsort(w)
    return w[order], v[:, order]


def is_parity_symmetric(model: ChainModel) -> bool:
    """True when the model commutes with ``prod_j X_j`` (no longitudinal fields)."""
    return TermKind.Z not in model.kinds()


def ground_state(
    H: ManyBodyHamiltonian, sector: str | None = None, maxiter: int | None = None
) -> GroundState:
    """Lowest eigenvector; near-degenerate ground spaces are flagged, not resolved.

    ``sector="even"`` returns the lowest state of the +1 eigenspace of
    ``prod_j X_j``, which holds the ground state of the Ising chains for
    ``B > 0``. The gap is still measured against both sectors, so a
    vanishing even/odd splitting is flagged.
    """
    if H.L > L_MAX_GROUND:
        raise ResourceGuardError(f"L={H.L} exceeds ground-state limit {L_MAX_GROUND}")
    if sector not in (None, "even"):
        raise EngineError(f"unknown sector {sector!r}")
    if sector == "even" and not is_parity_symmetric(H.model):
        raise EngineError("even sector requested for a model without X-parity symmetry")
    R = _parity_isometry(H.L) if sector == "even" else None
    Hs = (R.T @ H.matrix @ R).tocsr() if R is not None else H.matrix
    energies, vecs = _lowest(Hs, 2, maxiter)
    vec = vecs[:, 0]
    if R is not None:
        # the odd sector may hold a (near-)degenerate partner
        Ro = _parity_isometry(H.L, -1)
        odd, _ = _lowest((Ro.T @ H.matrix @ Ro).tocsr(), 1, maxiter)
        energies = np.sort(np.append(energies, odd[0]))
    psi = (R @ vec if R is not None else vec).astype(complex)
    psi /= np.linalg.norm(psi)
    # fix the global phase so the result does not depend on solver internals
    k = int(np.argmax(np.abs(psi)))
    psi *= np.abs(psi[k]) / psi[k]
    energy = float(np.real(np.vdot(psi, H.matrix @ psi)))
    residual = np.linalg.norm(H.matrix @ psi - energy * psi)
    # relative to |E| for huge fields, where 1e-9 is below double precision
    if residual > RESIDUAL_TOL * max(1.0, abs(energy) / H.L):
        raise EngineError(f"ground-state residual {residual:.2e} above {RESIDUAL_TOL}")
    gap = float(energies[1] - energies[0]) if len(energies) > 1 else np.inf
    return GroundState(psi, 0.0, energy, gap, gap < DEGENERACY_TOL)


def _submodel(model: ChainModel, sites: list[int]) -> ChainModel:
    relabel = {s: k for k, s in enumerate(sites, start=1)}
    terms = tuple(
        Term(t.kind, tuple(relabel[s] for s in t.sites), t.amplitude)
        for t in model.terms
        if set(t.sites) <= relabel.keys()
    )
    return ChainModel(len(sites), model.tag, terms, model.params)


def _single_site_ground(model: ChainModel, site: int) -> tuple[np.ndarray, float]:
    h = np.zeros((2, 2), dtype=complex)
    for t in model.terms:
        if t.sites == (site,):
            h += t.amplitude * (_PAULI_X if t.kind is TermKind.X else _PAULI_Z)
    w, v = np.linalg.eigh(h)
    if w[1] - w[0] < DEGENERACY_TOL:
        return np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0), float(w[0])
    vec = v[:, 0]
    k = int(np.argmax(np.abs(vec)))
    return vec * np.abs(vec[k]) / vec[k], float(w[0])


def model_ground_state(model: ChainModel, L_max: int = L_MAX_GROUND) -> GroundState:
    """Ground state of ``model``, assembled over its disconnected pieces.

    Parity-symmetric pieces are solved in their even sector; a decoupled
    site without fields is put in ``|+x>``. The result is a tensor product,
    so the pieces never entangle across a frozen site.
    """
    if model.L > L_max:
        raise ResourceGuardError(f"L={model.L} exceeds ground-state limit {L_max}")
    pieces = connected_components(model)
    order: list[int] = []
    psi = np.ones(1, dtype=complex)
    energy, gap, degenerate = 0.0, np.inf, False
    for sites in pieces:
        if len(sites) == 1:
            vec, e = _single_site_ground(model, sites[0])
            energy += e
        else:
            sub = _submodel(model, sites)
            gs = ground_state(assemble(sub, L_max), "even" if is_parity_symmetric(sub) else None)
            vec = gs.psi
            energy += gs.energy
            gap = min(gap, gs.gap)
            degenerate |= gs.degenerate
        psi = np.kron(psi, vec)
        order += sites
    axes = np.argsort(order)
    psi = psi.reshape([2] * model.L).transpose(axes).reshape(-1)
    return GroundState(np.ascontiguousarray(psi), 0.0, energy, gap, degenerate)


class ExactPropagator:
    """``exp(-iHt)`` applied to states; dense spectral form for small spaces."""

    def __init__(self, H: ManyBodyHamiltonian):
        self.H = H
        self._dense = H.dim <= DENSE_DIM
        if self._dense:
            self.energies, self.modes = np.linalg.eigh(H.matrix.toarray())
        self._generator = (-1j) * H.matrix.tocsc()

    def evolve(self, psi0: PureStateVector, t: float) -> PureStateVector:
        return self.evolve_many(psi0, [t])[0]

    def evolve_many(self, psi0: PureStateVector, times) -> list[PureStateVector]:
        """States at each of ``times`` (any order; non-negative)."""
        times = [float(t) for t in times]
        if any(not t >= 0 for t in times):
            raise EngineError("times must be non-negative")
        if psi0.psi.size != self.H.dim:
            raise EngineError(f"state dimension {psi0.psi.size} != {self.H.dim}")
        out: dict[float, np.ndarray] = {}
        if self._dense:
            coeffs = self.modes.conj().T @ psi0.psi
            for t in times:
                out[t] = psi0.psi if t == 0 else self.modes @ (np.exp(-1j * self.energies * t) * coeffs)
        else:
            psi, now = psi0.psi, 0.0
            for t in sorted(set(times)):
                if t > now:
                    psi = expm_multiply(self._generator * (t - now), psi)
                    now = t
                out[t] = psi if t > 0 else psi0.psi
        return [PureStateVector(out[t], psi0.t + t) for t in times]


def evolve_exact(H: ManyBodyHamiltonian, psi0: PureStateVector, t: float) -> PureStateVector:
    return ExactPropagator(H).evolve(psi0, t)


def product_state(spins_up: list[bool]) -> PureStateVector:
    L = len(spins_up)
    index = 0
    for j, up in enumerate(spins_up, start=1):
        if not up:
            index |= 1 << (L - j)
    psi = np.zeros(1 << L, dtype=complex)
    psi[index] = 1.0
    return PureStateVector(psi)


def neel_vector(L: int) -> PureStateVector:
    """Odd sites up, matching the occupied sites of `quadratic.neel_state`."""
    return product_state([j % 2 == 1 for j in range(1, L + 1)])


def ferromagnetic_vector(L: int) -> PureStateVector:
    """All spins down."""
    return product_state([False] * L)


def single_site_rdm(psi: PureStateVector, j: int) -> np.ndarray:
    L = psi.L
    if not 1 <= j <= L:
        raise EngineError(f"site {j} outside [1, {L}]")
    amps = psi.psi.reshape(1 << (j - 1), 2, 1 << (L - j))
    return np.einsum("aib,ajb->ij", amps, amps.conj())


def entropy_2x2(rho: np.ndarray) -> float:
    """von Neumann entropy in nats."""
    if abs(np.trace(rho) - 1.0) > PSD_TOL:
        raise EngineError(f"density matrix trace {np.trace(rho)} != 1")
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if evals.min() < -PSD_TOL:
        raise EngineError(f"density matrix not positive: eigenvalue {evals.min()}")
    evals = np.clip(evals, 0.0, 1.0)
    nz = evals[evals > 0]
    return float(-np.sum(nz * np.log(nz)))


def site_entropy_exact(psi: PureStateVector, j: int) -> float:
    return entropy_2x2(single_site_rdm(psi, j))

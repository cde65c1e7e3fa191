"""Symbolic spin-chain Hamiltonians shared by every engine.

Sites are 1-based throughout the package. The quasiperiodic field of the
Aubry-Andre-Harper chain is evaluated at ``cos(2*pi*beta*j)`` with
``j = 1..L``; shifting to 0-based indexing changes every field value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import EngineError

GOLDEN_BETA = (math.sqrt(5.0) - 1.0) / 2.0
AAH_HOPPING = 0.5


class ModelError(EngineError):
    """Invalid model parameters or an invalid frozen site."""


class TermKind(str, Enum):
    HOP = "xx+yy"  # sigma^x sigma^x + sigma^y sigma^y on a bond
    ZZ = "zz"
    X = "x"
    Z = "z"


@dataclass(frozen=True)
class Term:
    kind: TermKind
    sites: tuple[int, ...]
    amplitude: float

    @property
    def is_bond(self) -> bool:
        return len(self.sites) == 2


@dataclass(frozen=True)
class ChainModel:
    """An open chain of ``L`` spins-1/2 described by a list of terms.

    ``params`` records the physical parameters the model was built from
    (``lam``/``beta`` for AAH, ``kappa``/``B``/``epsilon`` for ANNNI) and
    ``frozen`` the sites whose couplings were switched off.
    """

    L: int
    tag: str
    terms: tuple[Term, ...]
    params: tuple[tuple[str, float], ...] = ()
    frozen: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.L < 2:
            raise ModelError(f"chain needs at least 2 sites, got L={self.L}")
        for term in self.terms:
            for s in term.sites:
                if not 1 <= s <= self.L:
                    raise ModelError(f"site {s} outside [1, {self.L}]")
            if term.is_bond:
                j, k = term.sites
                if j == k or abs(j - k) > 2:
                    raise ModelError(f"bond {term.sites} must join distinct sites at range <= 2")

    def param(self, name: str, default: float | None = None) -> float:
        for key, value in self.params:
            if key == name:
                return value
        if default is None:
            raise KeyError(name)
        return default

    def terms_of(self, kind: TermKind) -> list[Term]:
        return [t for t in self.terms if t.kind is kind]

    def kinds(self) -> set[TermKind]:
        return {t.kind for t in self.terms}


@dataclass(frozen=True)
class FrozenMask:
    """Sites to freeze. Only single-site masks are accepted by `freeze`."""

    sites: frozenset[int]

    @classmethod
    def single(cls, b: int) -> "FrozenMask":
        return cls(frozenset({int(b)}))

    def check(self, L: int) -> None:
        if len(self.sites) != 1:
            raise ModelError("only single-site frozen regions are supported")
        for b in self.sites:
            if not 1 <= b <= L:
                raise ModelError(f"frozen site {b} outside [1, {L}]")


@dataclass(frozen=True)
class CriticalPoint:
    kappa: float
    B: float


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ModelError(f"{name} must be finite, got {value}")
    return value


def aah_field(j: int, lam: float, beta: float = GOLDEN_BETA) -> float:
    """Coefficient of sigma^z_j in the AAH Hamiltonian (includes the 1/2)."""
    return 0.5 * lam * math.cos(2.0 * math.pi * beta * j)


def build_aah(L: int, lam: float, beta: float = GOLDEN_BETA, hopping: float = AAH_HOPPING) -> ChainModel:
    """XX chain ``hopping * sum (XX + YY) + (1/2) sum lam cos(2 pi beta j) Z_j``.

    The default ``hopping = 1/2`` makes each bond ``sigma+ sigma- + h.c.``,
    i.e. unit fermion hopping against a potential ``lam cos(2 pi beta j)``,
    which localises at ``lam = 2``. ``hopping = 1`` localises at ``lam = 4``.
    """
    lam = _check_finite("lambda", lam)
    beta = _check_finite("beta", beta)
    hopping = _check_finite("hopping", hopping)
    if lam < 0:
        raise ModelError(f"lambda must be non-negative, got {lam}")
    if L < 2:
        raise ModelError(f"chain needs at least 2 sites, got L={L}")
    terms = [Term(TermKind.HOP, (j, j + 1), hopping) for j in range(1, L)]
    terms += [Term(TermKind.Z, (j,), aah_field(j, lam, beta)) for j in range(1, L + 1)]
    params = (("lam", lam), ("beta", beta), ("hopping", hopping))
    return ChainModel(L, "AAH", tuple(terms), params)


def build_annni(L: int, kappa: float, B: float, epsilon: float = 0.0) -> ChainModel:
    """ANNNI chain ``-sum ZZ + kappa sum Z_j Z_{j+2} - B sum X + epsilon sum Z``."""
    kappa = _check_finite("kappa", kappa)
    B = _check_finite("B", B)
    epsilon = _check_finite("epsilon", epsilon)
    if not 0.0 <= kappa < 0.5:
        raise ModelError(f"kappa must lie in [0, 0.5), got {kappa}")
    if B < 0 or epsilon < 0:
        raise ModelError("B and epsilon must be non-negative")
    if L < 2 or (kappa != 0.0 and L < 3):
        raise ModelError(f"chain too short for kappa={kappa}: L={L}")
    terms = [Term(TermKind.ZZ, (j, j + 1), -1.0) for j in range(1, L)]
    if kappa != 0.0:
        terms += [Term(TermKind.ZZ, (j, j + 2), kappa) for j in range(1, L - 1)]
    terms += [Term(TermKind.X, (j,), -B) for j in range(1, L + 1)]
    if epsilon != 0.0:
        terms += [Term(TermKind.Z, (j,), epsilon) for j in range(1, L + 1)]
    params = (("kappa", kappa), ("B", B), ("epsilon", epsilon))
    return ChainModel(L, "ANNNI", tuple(terms), params)


def freeze(model: ChainModel, mask: FrozenMask | int) -> ChainModel:
    """Switch off every term touching the frozen site, its own fields included.

    The site stays in the lattice as an inert spectator so reduced states of
    the frozen and unfrozen runs live on the same sites.
    """
    if not isinstance(mask, FrozenMask):
        mask = FrozenMask.single(mask)
    mask.check(model.L)
    kept = tuple(t for t in model.terms if not mask.sites.intersection(t.sites))
    return ChainModel(model.L, model.tag, kept, model.params, model.frozen | mask.sites)


def connected_components(model: ChainModel) -> list[list[int]]:
    """Groups of sites linked by bond terms, sorted by first site."""
    parent = list(range(model.L + 1))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for t in model.terms:
        if t.is_bond and t.amplitude != 0.0:
            ri, rj = find(t.sites[0]), find(t.sites[1])
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for s in range(1, model.L + 1):
        groups.setdefault(find(s), []).append(s)
    return sorted(groups.values())


def fibonacci_frozen_site(L: int) -> int:
    """Largest Fibonacci number strictly below ``L``, plus one."""
    if L < 3:
        raise ModelError(f"need L >= 3, got {L}")
    a, b = 1, 2
    while b < L:
        a, b = b, a + b
    return a + 1


def critical_residual(kappa: float, B: float) -> float:
    return (1.0 - 2.0 * kappa) - (B - B * B * kappa / (2.0 - 2.0 * kappa))


def critical_field(kappa: float) -> float:
    """Transverse field on the ferro/para critical line of the ANNNI chain.

    Solves ``1 - 2k = B - B^2 k / (2 - 2k)`` on the branch through ``B = 1``
    at ``k = 0``. The smaller quadratic root is evaluated in the
    cancellation-free form ``2c / (1 + sqrt(1 - 4qc))``.
    """
    kappa = _check_finite("kappa", kappa)
    if not 0.0 <= kappa < 0.5:
        raise ModelError(f"kappa must lie in [0, 0.5), got {kappa}")
    # q B^2 - B + c = 0 with q = k/(2-2k), c = 1-2k
    q = kappa / (2.0 - 2.0 * kappa)
    c = 1.0 - 2.0 * kappa
    root = 2.0 * c / (1.0 + math.sqrt(1.0 - 4.0 * q * c))
    # one Newton step polishes the last ulp
    deriv = 2.0 * q * root - 1.0
    root -= (q * root * root - root + c) / deriv
    return root


def critical_point(kappa: float) -> CriticalPoint:
    return CriticalPoint(kappa, critical_field(kappa))


def middle_site(L: int) -> int:
    return (L + 1) // 2


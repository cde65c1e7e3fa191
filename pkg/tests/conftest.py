"""Shared brute-force oracles built from Kronecker products of Pauli matrices.

These deliberately avoid the package's own bit-twiddling assembly so they
can serve as an independent reference.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
import pytest

from liangflow.model import ChainModel, TermKind

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def site_op(L: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    """Operator acting with ``ops[j]`` on 1-based site j; site 1 is the leftmost factor."""
    return reduce(np.kron, [ops.get(j, I2) for j in range(1, L + 1)])


def pauli_hamiltonian(model: ChainModel) -> np.ndarray:
    L = model.L
    H = np.zeros((2**L, 2**L), dtype=complex)
    for term in model.terms:
        s, amp = term.sites, term.amplitude
        if term.kind is TermKind.HOP:
            H += amp * (site_op(L, {s[0]: X, s[1]: X}) + site_op(L, {s[0]: Y, s[1]: Y}))
        elif term.kind is TermKind.ZZ:
            H += amp * site_op(L, {s[0]: Z, s[1]: Z})
        elif term.kind is TermKind.X:
            H += amp * site_op(L, {s[0]: X})
        else:
            H += amp * site_op(L, {s[0]: Z})
    return H


def reduced_entropy(psi: np.ndarray, L: int, j: int) -> float:
    """Von Neumann entropy of site j via an SVD of the reshaped amplitudes."""
    t = np.moveaxis(psi.reshape([2] * L), j - 1, 0).reshape(2, -1)
    s = np.linalg.svd(t, compute_uv=False) ** 2
    s = s[s > 1e-300]
    return float(-np.sum(s * np.log(s)))


def dense_evolve(H: np.ndarray, psi: np.ndarray, t: float) -> np.ndarray:
    w, v = np.linalg.eigh(H)
    return v @ (np.exp(-1j * w * t) * (v.conj().T @ psi))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

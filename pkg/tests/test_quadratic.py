from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_evolve, pauli_hamiltonian, reduced_entropy
from liangflow.model import build_aah, build_annni, freeze
from liangflow.quadratic import (
    CorrelationState,
    QuadraticError,
    U1Propagator,
    binary_entropy,
    compile_u1,
    evolve_u1,
    neel_state,
    site_entropy_u1,
)


def neel_amplitudes(L):
    psi = np.zeros(2**L, dtype=complex)
    # odd sites up = bit 0 at the most significant positions
    index = int("".join("0" if j % 2 else "1" for j in range(1, L + 1)), 2)
    psi[index] = 1.0
    return psi


class TestCompile:
    def test_single_bond(self):
        h = compile_u1(build_aah(2, 0.0, hopping=1.0)).h
        np.testing.assert_array_equal(h, [[0, 2], [2, 0]])

    def test_frozen_row_zero(self):
        h = compile_u1(freeze(build_aah(8, 1.3), 4)).h
        off = np.delete(h[3], 3)
        assert np.all(off == 0) and np.all(np.delete(h[:, 3], 3) == 0)
        assert h[3, 3] == 0.0

    def test_hermitian_banded(self):
        h = compile_u1(build_aah(30, 2.2)).h
        np.testing.assert_allclose(h, h.T, atol=1e-13)
        assert np.all(np.triu(h, 2) == 0)

    def test_rejects_ising_terms(self):
        with pytest.raises(QuadraticError):
            compile_u1(build_annni(6, 0.0, 1.0))

    @pytest.mark.parametrize("hopping", [0.5, 1.0])
    def test_many_body_spectrum_matches_ed(self, hopping):
        model = build_aah(8, 1.0, hopping=hopping)
        eps = np.linalg.eigvalsh(compile_u1(model).h)
        sums = np.sort([sum(c) for r in range(9) for c in combinations(eps, r)])
        ed = np.linalg.eigvalsh(pauli_hamiltonian(model))
        np.testing.assert_allclose(sums - sums[0], ed - ed[0], atol=1e-10)


class TestNeel:
    def test_small(self):
        np.testing.assert_array_equal(neel_state(4).C, np.diag([1, 0, 1, 0]))

    @pytest.mark.parametrize("L", [2, 5, 8, 11])
    def test_trace_and_purity(self, L):
        C = neel_state(L).C
        assert np.trace(C).real == (L + 1) // 2
        np.testing.assert_array_equal(C @ C, C)


class TestEvolve:
    def test_zero_time_identity(self):
        C0 = neel_state(6)
        assert evolve_u1(compile_u1(build_aah(6, 1.0)), C0, 0.0).C is C0.C

    def test_rabi(self):
        h = compile_u1(build_aah(2, 0.0, hopping=1.0))
        C0 = CorrelationState(np.diag([1.0, 0.0]).astype(complex))
        for t in np.linspace(0, 3, 13):
            assert evolve_u1(h, C0, t).C[0, 0].real == pytest.approx(np.cos(2 * t) ** 2, abs=1e-13)

    def test_negative_time(self):
        with pytest.raises(QuadraticError):
            evolve_u1(compile_u1(build_aah(4, 1.0)), neel_state(4), -1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(QuadraticError):
            evolve_u1(compile_u1(build_aah(4, 1.0)), neel_state(6), 1.0)

    @pytest.mark.parametrize("b", [None, 4])
    def test_entropies_match_ed(self, b):
        model = build_aah(8, 1.0)
        run = model if b is None else freeze(model, b)
        H = pauli_hamiltonian(run)
        prop = U1Propagator(compile_u1(run))
        for t in (0.5, 1.0, 5.0, 10.0):
            C = prop.evolve(neel_state(8), t)
            psi = dense_evolve(H, neel_amplitudes(8), t)
            for j in range(1, 9):
                assert site_entropy_u1(C, j) == pytest.approx(reduced_entropy(psi, 8, j), abs=1e-8)

    def test_occupations_fast_path(self):
        prop = U1Propagator(compile_u1(build_aah(12, 1.7)))
        C0 = neel_state(12)
        full = prop.evolve(C0, 3.3).occupations()
        np.testing.assert_allclose(prop.occupations(C0, 3.3, list(range(1, 13))), full, atol=1e-13)

    def test_occupations_general_state(self, rng):
        prop = U1Propagator(compile_u1(build_aah(6, 0.9)))
        U = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))[0]
        C0 = CorrelationState(U[:, :3].conj() @ U[:, :3].T)
        full = prop.evolve(C0, 1.1).occupations()
        np.testing.assert_allclose(prop.occupations(C0, 1.1, [1, 2, 3, 4, 5, 6]), full, atol=1e-13)

    def test_frozen_site_occupation_fixed(self):
        prop = U1Propagator(compile_u1(freeze(build_aah(10, 1.2), 5)))
        C0 = neel_state(10)
        for t in (0.7, 4.0, 30.0):
            assert prop.evolve(C0, t).C[4, 4] == C0.C[4, 4]

    @given(st.integers(4, 24), st.floats(0, 4), st.floats(0, 20), st.data())
    @settings(max_examples=40, deadline=None)
    def test_invariants(self, L, lam, t, data):
        model = build_aah(L, lam)
        b = data.draw(st.sampled_from([None, *range(1, L + 1)]))
        if b is not None:
            model = freeze(model, b)
        C = evolve_u1(compile_u1(model), neel_state(L), t).C
        assert np.abs(C - C.conj().T).max() < 1e-12
        assert abs(np.trace(C).real - (L + 1) // 2) < 1e-10
        assert np.abs(C @ C - C).max() < 1e-9
        w = np.linalg.eigvalsh(C)
        assert w.min() > -1e-10 and w.max() < 1 + 1e-10


class TestEntropy:
    @pytest.mark.parametrize("p,s", [(0.5, np.log(2)), (0.0, 0.0), (1.0, 0.0), (0.1, 0.325083)])
    def test_values(self, p, s):
        C = CorrelationState(np.diag([p, 0.0]).astype(complex))
        assert site_entropy_u1(C, 1) == pytest.approx(s, abs=1e-6)

    def test_clamps_roundoff(self):
        C = CorrelationState(np.diag([1 + 1e-11, -1e-11]).astype(complex))
        assert site_entropy_u1(C, 1) == 0.0 and site_entropy_u1(C, 2) == 0.0

    def test_rejects_large_excursion(self):
        with pytest.raises(QuadraticError):
            site_entropy_u1(CorrelationState(np.diag([1.001, 0.0]).astype(complex)), 1)

    @given(st.floats(0, 1))
    def test_bounds(self, p):
        assert 0.0 <= binary_entropy(p) <= np.log(2) + 1e-15

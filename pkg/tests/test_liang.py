import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liangflow.errors import EngineError, ResourceGuardError
from liangflow.liang import (
    Engine,
    FlowSeries,
    InitialState,
    QuenchPair,
    cumulative_flow,
    delta_S_ground,
    ground_entropies,
    instantaneous_flow,
    late_time_average,
)
from liangflow.model import build_aah, build_annni, freeze

LN2 = np.log(2)


def series(values, times=None):
    values = np.asarray(values, dtype=float)
    times = np.arange(values.size, dtype=float) if times is None else np.asarray(times)
    return FlowSeries(1, 2, times, values, Engine.EXACT)


class TestCumulativeFlow:
    @pytest.mark.parametrize(
        "model,init,engine",
        [
            (build_aah(8, 1.0), InitialState.neel(), "quadratic"),
            (build_aah(8, 1.0), InitialState.neel(), "exact"),
            (build_annni(8, 0.0, 0.7), InitialState.ground(), "bdg"),
            (build_annni(8, 0.0, 0.7), InitialState.ferromagnetic(), "bdg"),
            (build_annni(8, 0.2, 0.7), InitialState.ferromagnetic(), "exact"),
        ],
    )
    def test_zero_at_t0(self, model, init, engine):
        s = cumulative_flow(model, init, 4, 7, [0.0, 1.0], engine)
        assert s.values[0] == 0.0
        assert s.d == 3

    def test_quadratic_matches_exact(self):
        times = np.linspace(0, 20, 41)
        q = cumulative_flow(build_aah(8, 1.0), InitialState.neel(), 4, 6, times, "quadratic")
        e = cumulative_flow(build_aah(8, 1.0), InitialState.neel(), 4, 6, times, "exact")
        np.testing.assert_allclose(q.values, e.values, atol=1e-8)
        assert np.abs(q.values).max() > 1e-3

    @pytest.mark.parametrize("init", [InitialState.ground(), InitialState.ferromagnetic()])
    @pytest.mark.parametrize("B", [0.3, 1.0, 1.5])
    def test_bdg_matches_exact(self, init, B):
        times = [0.0, 0.5, 1.0, 5.0, 20.0]
        model = build_annni(9, 0.0, B)
        q = QuenchPair(model, init, "bdg").flows(5, [1, 3, 6, 9], times)
        e = QuenchPair(model, init, "exact").flows(5, [1, 3, 6, 9], times)
        np.testing.assert_allclose(q, e, atol=1e-8)

    def test_stationary_reduction(self):
        model = build_annni(250, 0.0, 0.9)
        pair = QuenchPair(model, InitialState.ground())
        T = pair.flows(125, [128], [30.0])[0, 0]
        s_gs = ground_entropies(model, [128])[0]
        s_frozen = pair.entropies([30.0], [128], b=125)[0, 0]
        assert T == pytest.approx(s_gs - s_frozen, abs=1e-9)

    def test_outside_lightcone(self):
        s = cumulative_flow(build_annni(250, 0.0, 0.5), InitialState.ground(), 125, 165, [10.0])
        assert abs(s.values[0]) < 1e-6

    def test_default_engines(self):
        assert QuenchPair(build_aah(6, 1.0), InitialState.neel()).engine is Engine.QUADRATIC
        assert QuenchPair(build_annni(6, 0.0, 1.0), InitialState.ground()).engine is Engine.BDG
        assert QuenchPair(build_annni(6, 0.2, 1.0), InitialState.ground()).engine is Engine.EXACT

    def test_target_equals_frozen(self):
        with pytest.raises(EngineError):
            cumulative_flow(build_aah(6, 1.0), InitialState.neel(), 3, 3, [1.0])

    @pytest.mark.parametrize(
        "model,init,engine",
        [
            (build_aah(6, 1.0), InitialState.neel(), "bdg"),
            (build_annni(6, 0.0, 1.0), InitialState.ground(), "quadratic"),
            (build_annni(6, 0.2, 1.0), InitialState.ground(), "bdg"),
            (build_annni(6, 0.0, 1.0, 1e-4), InitialState.ground(), "bdg"),
        ],
    )
    def test_incompatible_engine(self, model, init, engine):
        with pytest.raises(EngineError):
            QuenchPair(model, init, engine)

    def test_exact_size_guard(self):
        with pytest.raises(ResourceGuardError):
            QuenchPair(build_annni(20, 0.2, 1.0), InitialState.ground())

    def test_signed_values_kept(self):
        s = cumulative_flow(build_aah(10, 0.5), InitialState.neel(), 5, 6, np.linspace(0, 10, 101))
        assert s.values.min() < 0 < s.values.max()
        np.testing.assert_array_equal(s.abs_values, np.abs(s.values))

    @given(st.integers(4, 9), st.floats(0, 4), st.floats(0.1, 2), st.data())
    @settings(max_examples=25, deadline=None)
    def test_bounded_by_ln2(self, L, lam, B, data):
        b = data.draw(st.integers(1, L))
        a = data.draw(st.integers(1, L).filter(lambda x: x != b))
        times = [0.0, 0.7, 3.0, 15.0]
        for model, init in ((build_aah(L, lam), InitialState.neel()), (build_annni(L, 0.0, B), InitialState.ground())):
            s = cumulative_flow(model, init, b, a, times)
            assert s.values[0] == 0.0
            assert np.all(np.abs(s.values) <= LN2 + 1e-12)


class TestInstantaneousFlow:
    @pytest.mark.parametrize("t0", [1.0, 3.0, 8.0])
    def test_cubic_fit_oracle(self, t0):
        model, init = build_aah(8, 1.0), InitialState.neel()
        h = 0.002
        grid = t0 + h * np.array([-1.5, -0.5, 0.5, 1.5])
        T = cumulative_flow(model, init, 4, 6, grid).values
        slope = np.polyder(np.polyfit(grid - t0, T, 3))[-1]
        rate = instantaneous_flow(model, init, 4, 6, t0)
        assert rate.rate == pytest.approx(slope, abs=1e-4)
        assert abs(rate.central - slope) < 1e-3

    def test_central_difference_definition(self):
        model, init = build_aah(8, 1.0), InitialState.neel()
        T = cumulative_flow(model, init, 4, 6, [2.99, 3.01]).values
        rate = instantaneous_flow(model, init, 4, 6, 3.0)
        assert rate.central == pytest.approx((T[1] - T[0]) / 0.02, abs=1e-12)
        assert rate.converged

    def test_edge_time_rejected(self):
        with pytest.raises(EngineError):
            instantaneous_flow(build_aah(8, 1.0), InitialState.neel(), 4, 6, 0.005)

    def test_at_step_is_allowed(self):
        r = instantaneous_flow(build_aah(8, 1.0), InitialState.neel(), 4, 6, 0.01)
        assert np.isfinite(r.rate)

    def test_bad_step(self):
        with pytest.raises(EngineError):
            instantaneous_flow(build_aah(8, 1.0), InitialState.neel(), 4, 6, 1.0, dt=0.0)

    def test_rate_dies_out_after_local_quench(self):
        # gapped chain, stationary unfrozen run: the frozen run relaxes
        model, init = build_annni(250, 0.0, 1.5), InitialState.ground()
        early = instantaneous_flow(model, init, 125, 128, 2.0).rate
        late = instantaneous_flow(model, init, 125, 128, 100.0).rate
        assert abs(late) < 1e-2 * abs(early)


class TestLateTimeAverage:
    def test_constant(self):
        assert late_time_average(series(np.full(50, 0.25)), (10, 40)) == pytest.approx(0.25)

    def test_symmetric_sawtooth(self):
        saw = 0.3 + 0.1 * np.tile([-1.0, -0.5, 0.0, 0.5, 1.0, 0.5, 0.0, -0.5], 10)
        s = series(saw)
        assert late_time_average(s, (0, s.times[-1])) == pytest.approx(0.3, abs=1e-12)

    def test_uses_absolute_values(self):
        assert late_time_average(series(np.tile([0.2, -0.2], 20)), (0, 39)) == pytest.approx(0.2)

    def test_window_errors(self):
        s = series(np.ones(50))
        with pytest.raises(EngineError):
            late_time_average(s, (30, 20))
        with pytest.raises(EngineError):
            late_time_average(s, (10, 15))
        with pytest.raises(EngineError):
            late_time_average(s, (40, 60))

    def test_localized_ordering(self):
        model, init = build_aah(610, 3.0), InitialState.neel()
        times = np.arange(100.0, 201.0)
        pair = QuenchPair(model, init)
        T = pair.flows(378, [377, 363], times)
        near = late_time_average(FlowSeries(378, 377, times, T[:, 0], pair.engine), (100, 200))
        far = late_time_average(FlowSeries(378, 363, times, T[:, 1], pair.engine), (100, 200))
        assert near > far


class TestDeltaSGround:
    def test_strong_field(self):
        assert abs(delta_S_ground(build_annni(40, 0.0, 1e3), 20, 23)) < 1e-6

    def test_weak_field_with_tilt(self):
        assert abs(delta_S_ground(build_annni(8, 0.0, 1e-3, 1e-4), 4, 6, "exact")) < 1e-4

    @pytest.mark.parametrize("B", [0.4, 0.9, 1.3])
    def test_bdg_matches_exact(self, B):
        model = build_annni(10, 0.0, B)
        bd = delta_S_ground(model, 5, [2, 7, 8], "bdg")
        ex = delta_S_ground(model, 5, [2, 7, 8], "exact")
        np.testing.assert_allclose(bd, ex, atol=1e-9)

    def test_degenerate_without_tilt(self):
        with pytest.raises(EngineError):
            delta_S_ground(build_annni(8, 0.2, 0.0), 4, 6, "exact")

    def test_neel_engine_rejected(self):
        with pytest.raises(EngineError):
            delta_S_ground(build_annni(8, 0.0, 1.0), 4, 6, "quadratic")

    def test_frozen_ground_entropy_of_frozen_site(self):
        assert ground_entropies(freeze(build_annni(12, 0.0, 0.8), 6), [6], "bdg")[0] < 1e-12

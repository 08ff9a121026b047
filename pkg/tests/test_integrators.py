"""Runge-Kutta engine: tableau validation, step formulas, reference flow."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odeaccel.dynamics import AugmentedState, OdeParams, initial_state, vector_field
from odeaccel.errors import ConfigError, DivergedError
from odeaccel.integrators import (
    ButcherTableau,
    builtin_tableau,
    load_tableau,
    reference_solve,
    reference_trajectory,
    rk_step,
)
from odeaccel.objectives import make_quadratic


def _quad(dim=2):
    return make_quadratic(np.eye(dim), np.zeros(dim))


def _state(seed=0, dim=2):
    rng = np.random.default_rng(seed)
    return AugmentedState(rng.standard_normal(dim), rng.standard_normal(dim), 1.5)


class TestTableaus:
    def test_builtin_shapes(self):
        euler = builtin_tableau("euler")
        assert euler.stages == 1 and euler.b == (1.0,) and euler.declared_order == 1
        mid = builtin_tableau("midpoint")
        assert mid.stages == 2 and mid.a[1] == (0.5,) and mid.b == (0.0, 1.0)
        rk4 = builtin_tableau("rk4")
        assert rk4.stages == 4 and rk4.declared_order == 4
        assert sum(rk4.b) == pytest.approx(1.0, abs=1e-15)

    def test_unknown_name(self):
        with pytest.raises(ConfigError):
            builtin_tableau("rk38")

    def test_invalid_tableaus_rejected(self):
        with pytest.raises(ConfigError):  # non-triangular a
            ButcherTableau("bad", 2, ((0.5,), (0.5,)), (0.5, 0.5), 2)
        with pytest.raises(ConfigError):  # weights not summing to 1
            ButcherTableau("bad", 1, ((),), (0.9,), 1)
        with pytest.raises(ConfigError):
            ButcherTableau("bad", 0, (), (), 1)

    def test_abscissae_are_row_sums(self):
        rk4 = builtin_tableau("rk4")
        assert rk4.c == (0.0, 0.5, 0.5, 1.0)

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "heun.txt"
        path.write_text("2 2 heun\n\n1.0\n0.5 0.5\n")
        tab = load_tableau(path)
        assert tab.name == "heun" and tab.stages == 2 and tab.declared_order == 2
        assert tab.a == ((), (1.0,)) and tab.b == (0.5, 0.5)

    def test_file_errors(self, tmp_path):
        empty = tmp_path / "empty.txt"
        empty.write_text("")
        with pytest.raises(ConfigError):
            load_tableau(empty)
        short = tmp_path / "short.txt"
        short.write_text("3 3 x\n\n0.5\n")
        with pytest.raises(ConfigError):
            load_tableau(short)


class TestStepping:
    def test_euler_step_formula(self):
        obj, params, y = _quad(), OdeParams(q=2), _state(3)
        h = 0.01
        res = rk_step(builtin_tableau("euler"), params, obj, y, h)
        F = vector_field(params, obj, y)
        np.testing.assert_allclose(res.next.v, y.v + h * F.v, rtol=1e-14)
        np.testing.assert_allclose(res.next.x, y.x + h * F.x, rtol=1e-14)
        assert res.gradient_evals == 1

    def test_midpoint_step_formula(self):
        obj, params, y = _quad(), OdeParams(q=2), _state(4)
        h = 0.01
        res = rk_step(builtin_tableau("midpoint"), params, obj, y, h)
        F0 = vector_field(params, obj, y)
        mid = AugmentedState(y.v + 0.5 * h * F0.v, y.x + 0.5 * h * F0.x, y.t + 0.5 * h)
        Fm = vector_field(params, obj, mid)
        np.testing.assert_allclose(res.next.v, y.v + h * Fm.v, rtol=1e-13)
        np.testing.assert_allclose(res.next.x, y.x + h * Fm.x, rtol=1e-13)
        assert res.gradient_evals == 2

    @pytest.mark.parametrize("name", ["euler", "midpoint", "rk4"])
    def test_gradient_evals_equal_stages(self, name):
        calls = 0
        base = _quad()
        original = base.grad

        def counting(x):
            nonlocal calls
            calls += 1
            return original(x)

        obj = make_quadratic(np.eye(2), np.zeros(2))
        object.__setattr__(obj, "grad", counting)
        tab = builtin_tableau(name)
        res = rk_step(tab, OdeParams(q=2), obj, _state(5), 0.01)
        assert calls == tab.stages == res.gradient_evals

    @given(st.floats(1e-6, 1.0), st.sampled_from(["euler", "midpoint", "rk4"]))
    @settings(max_examples=40, deadline=None)
    def test_time_advances_by_exactly_h(self, h, name):
        res = rk_step(builtin_tableau(name), OdeParams(q=2), _quad(), _state(6), h)
        assert res.next.t == pytest.approx(_state(6).t + h, abs=1e-15)

    def test_affine_superposition_on_linear_field(self):
        # On a quadratic objective the vector field is affine, so the rk map
        # must satisfy Phi(y1) + Phi(y2) - Phi(0) = Phi(y1 + y2) blockwise.
        obj, params = _quad(), OdeParams(q=2)
        tab = builtin_tableau("rk4")
        h, t = 0.05, 2.0
        y1, y2 = _state(7), _state(8)
        zero = AugmentedState(np.zeros(2), np.zeros(2), t)
        y1 = AugmentedState(y1.v, y1.x, t)
        y2 = AugmentedState(y2.v, y2.x, t)
        both = AugmentedState(y1.v + y2.v, y1.x + y2.x, t)
        s0 = rk_step(tab, params, obj, zero, h).next
        s1 = rk_step(tab, params, obj, y1, h).next
        s2 = rk_step(tab, params, obj, y2, h).next
        s12 = rk_step(tab, params, obj, both, h).next
        np.testing.assert_allclose(s12.v, s1.v + s2.v - s0.v, atol=1e-12)
        np.testing.assert_allclose(s12.x, s1.x + s2.x - s0.x, atol=1e-12)

    def test_rejects_bad_step_and_state(self):
        with pytest.raises(ConfigError):
            rk_step(builtin_tableau("euler"), OdeParams(q=2), _quad(), _state(), 0.0)
        bad = AugmentedState(np.array([np.nan, 0.0]), np.zeros(2), 1.0)
        with pytest.raises(DivergedError):
            rk_step(builtin_tableau("euler"), OdeParams(q=2), _quad(), bad, 0.1)


class TestReferenceSolve:
    def test_short_horizon_matches_taylor(self):
        obj, params = _quad(), OdeParams(q=2)
        y0 = _state(9)
        horizon = 1e-4
        out = reference_solve(params, obj, y0, horizon)
        F = vector_field(params, obj, y0)
        np.testing.assert_allclose(out.v, y0.v + horizon * F.v, atol=1e-6)
        np.testing.assert_allclose(out.x, y0.x + horizon * F.x, atol=1e-6)

    def test_self_consistency(self):
        obj, params = _quad(), OdeParams(q=2)
        y0 = initial_state(np.array([1.0, 0.0]))
        a = reference_solve(params, obj, y0, 0.1)
        b = reference_solve(params, obj, y0.copy(), 0.1)
        np.testing.assert_array_equal(a.x, b.x)

    def test_time_component(self):
        out = reference_solve(OdeParams(q=2), _quad(), _state(10), 0.25)
        assert out.t == pytest.approx(_state(10).t + 0.25, rel=1e-12)

    def test_trajectory_checkpoints_chain(self):
        obj, params = _quad(), OdeParams(q=2)
        y0 = initial_state(np.array([1.0, -1.0]))
        states = reference_trajectory(params, obj, y0, 2.0, 8)
        assert len(states) == 8
        times = [s.t for s in states]
        np.testing.assert_allclose(times, y0.t + 2.0 * np.arange(1, 9) / 8, rtol=1e-12)
        # endpoint agrees with a single whole-horizon solve
        end = reference_solve(params, obj, y0, 2.0)
        np.testing.assert_allclose(states[-1].x, end.x, atol=1e-8)

    def test_invalid_horizon(self):
        with pytest.raises(ConfigError):
            reference_solve(OdeParams(q=2), _quad(), _state(), -1.0)
        with pytest.raises(ConfigError):
            reference_trajectory(OdeParams(q=2), _quad(), _state(), 1.0, 0)

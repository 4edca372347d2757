import numpy as np
import pytest

from delayflock.dde import (
    InitialHistory,
    IntegrationError,
    check_monotone_diameter,
    diameters,
    integrate,
    rhs,
    x_spread_initial,
)
from delayflock.digraph import Digraph
from delayflock.interaction import DelayProfile, WeightFunction

from oracles import two_agent_ode_difference

FIG_ARCS = [(1, 2), (2, 3), (3, 1), (3, 4)]
FIG_X0 = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
FIG_V0 = np.array([[1.0, -2.0], [3.0, -4.0], [5.0, 6.0], [-7.0, -8.0]])


def fig_setup(scale=1.0, beta=0.25, tau=1.0):
    g = Digraph.from_arc_list(4, FIG_ARCS, one_based=True)
    w = WeightFunction(kind="cucker-smale", kappa=1.0, beta=beta)
    p = DelayProfile.constant(tau) if tau > 0 else DelayProfile.zero()
    hist = InitialHistory.constant(FIG_X0, scale * FIG_V0, tau=tau)
    return g, w, p, hist


class TestRhs:
    def test_single_agent_is_inert(self):
        g = Digraph(np.zeros((1, 1), dtype=bool))
        w = WeightFunction(kind="constant", kappa=1.0)
        dx, dv = rhs(0.0, [[1.0, 2.0]], [[3.0, 4.0]], None, g,
                     w, DelayProfile.zero())
        assert np.array_equal(dx, [[3.0, 4.0]])
        assert np.array_equal(dv, [[0.0, 0.0]])

    def test_identical_velocities_give_zero(self):
        g = Digraph.complete(3)
        w = WeightFunction(kind="cucker-smale", kappa=2.0, beta=0.5)
        x = np.array([[0.0], [1.0], [5.0]])
        v = np.array([[2.0], [2.0], [2.0]])
        dx, dv = rhs(0.0, x, v, None, g, w, DelayProfile.zero())
        assert np.allclose(dv, 0.0)

    def test_two_agents_unit_weight(self):
        # coupled pair, kappa = 1 at any distance: dv_i = v_j - v_i
        g = Digraph.complete(2)
        w = WeightFunction(kind="constant", kappa=1.0)
        x = np.array([[0.0], [1.0]])
        v = np.array([[0.0], [1.0]])
        _, dv = rhs(0.0, x, v, None, g, w, DelayProfile.zero())
        assert np.allclose(dv, [[1.0], [-1.0]])

    def test_delayed_lookup_used(self):
        g = Digraph.from_arc_list(2, [(2, 1)], one_based=True)  # 2 -> 1
        w = WeightFunction(kind="constant", kappa=1.0)
        p = DelayProfile.constant(0.5)
        calls = []

        def lookup(j, s):
            calls.append((j, s))
            return np.array([9.0]), np.array([4.0])

        x = np.array([[0.0], [1.0]])
        v = np.array([[1.0], [2.0]])
        _, dv = rhs(2.0, x, v, lookup, g, w, p)
        assert calls == [(1, 1.5)]
        assert np.allclose(dv, [[3.0], [0.0]])


class TestIntegrate:
    def test_two_agent_closed_form(self):
        g = Digraph.complete(2)
        w = WeightFunction(kind="constant", kappa=0.7)
        hist = InitialHistory.constant([[0.0], [1.0]], [[0.0], [1.0]], tau=0.0)
        traj = integrate(hist, g, w, DelayProfile.zero(), t_end=1.0, dt=1e-3)
        x, v = traj.state_at(1.0)
        got = float(v[1, 0] - v[0, 0])
        want = two_agent_ode_difference(1.0, 0.7, 1.0)
        assert got == pytest.approx(want, abs=1e-10)

    def test_identical_velocities_stay_constant(self):
        g, w, p, _ = fig_setup()
        hist = InitialHistory.constant(FIG_X0, np.ones((4, 2)), tau=1.0)
        traj = integrate(hist, g, w, p, t_end=3.0, dt=0.02)
        assert np.allclose(traj.vs, 1.0, atol=1e-13)
        x, _ = traj.state_at(3.0)
        assert np.allclose(x, FIG_X0 + 3.0, atol=1e-10)

    def test_velocities_stay_in_initial_box(self):
        g, w, p, hist = fig_setup(scale=0.01)
        traj = integrate(hist, g, w, p, t_end=10.0, dt=0.01)
        for k in range(2):
            lo = 0.01 * FIG_V0[:, k].min()
            hi = 0.01 * FIG_V0[:, k].max()
            span = hi - lo
            assert traj.vs[:, :, k].min() >= lo - 1e-9 * span
            assert traj.vs[:, :, k].max() <= hi + 1e-9 * span

    def test_boost_invariance_constant_weight(self):
        # constant weights: adding a fixed velocity offset shifts every
        # velocity sample by exactly that offset, delays included
        g = Digraph.from_arc_list(4, FIG_ARCS, one_based=True)
        w = WeightFunction(kind="constant", kappa=0.5)
        p = DelayProfile.constant(1.0)
        c = np.array([2.0, -3.0])
        h1 = InitialHistory.constant(FIG_X0, 0.1 * FIG_V0, tau=1.0)
        h2 = InitialHistory.constant(FIG_X0, 0.1 * FIG_V0 + c, tau=1.0)
        t1 = integrate(h1, g, w, p, t_end=5.0, dt=0.02)
        t2 = integrate(h2, g, w, p, t_end=5.0, dt=0.02)
        assert np.allclose(t2.vs - t1.vs, c, atol=1e-10)

    def test_boost_invariance_zero_delay(self):
        # zero delay: position differences are unaffected by a boost, so
        # the algebraic weight sees identical arguments
        g, w, _, _ = fig_setup(tau=0.0)
        p = DelayProfile.zero()
        c = np.array([5.0, 1.0])
        h1 = InitialHistory.constant(FIG_X0, 0.1 * FIG_V0, tau=0.0)
        h2 = InitialHistory.constant(FIG_X0, 0.1 * FIG_V0 + c, tau=0.0)
        t1 = integrate(h1, g, w, p, t_end=5.0, dt=0.02)
        t2 = integrate(h2, g, w, p, t_end=5.0, dt=0.02)
        assert np.allclose(t2.vs - t1.vs, c, atol=1e-10)

    def test_bad_arguments(self):
        g, w, p, hist = fig_setup()
        with pytest.raises(IntegrationError):
            integrate(hist, g, w, p, t_end=1.0, dt=0.0)
        with pytest.raises(IntegrationError):
            integrate(hist, g, w, p, t_end=-1.0)
        with pytest.raises(IntegrationError):
            integrate(hist, Digraph.complete(3), w, p, t_end=1.0)

    def test_convergence_order(self):
        # classical 4th-order step: halving dt shrinks the error ~16x
        g, w, p, hist = fig_setup(scale=0.1)
        ref = integrate(hist, g, w, p, t_end=2.0, dt=0.0005)
        vref = ref.state_at(2.0)[1]
        errs = []
        for dt in (0.04, 0.02):
            traj = integrate(hist, g, w, p, t_end=2.0, dt=dt)
            errs.append(np.abs(traj.state_at(2.0)[1] - vref).max())
        assert errs[0] / errs[1] > 12.0


class TestDiameters:
    def test_fig_initial_values(self):
        g, w, p, hist = fig_setup()
        traj = integrate(hist, g, w, p, t_end=1.0, dt=0.01)
        series = diameters(traj, tau=1.0, history=hist, g=g)
        assert series.spread[0] == pytest.approx(14.0, rel=1e-12)
        assert x_spread_initial(hist, g) == pytest.approx(2.0, rel=1e-12)

    def test_single_agent_zero(self):
        g = Digraph(np.zeros((1, 1), dtype=bool))
        w = WeightFunction(kind="constant", kappa=1.0)
        hist = InitialHistory.constant([[0.0]], [[3.0]], tau=0.0)
        traj = integrate(hist, g, w, DelayProfile.zero(), t_end=1.0, dt=0.1)
        series = diameters(traj, tau=0.0, history=hist, g=g)
        assert np.allclose(series.spread, 0.0)

    def test_monotone_on_fig_run(self):
        g, w, p, hist = fig_setup(scale=0.01)
        traj = integrate(hist, g, w, p, t_end=10.0, dt=0.01)
        series = diameters(traj, tau=1.0, history=hist, g=g)
        rep = check_monotone_diameter(series, tol=1e-9 * series.spread[0])
        assert rep
        assert rep.max_increase <= 1e-9 * series.spread[0]

    def test_monotone_check_flags_bump(self):
        g, w, p, hist = fig_setup(scale=0.01)
        traj = integrate(hist, g, w, p, t_end=2.0, dt=0.01)
        series = diameters(traj, tau=1.0, history=hist, g=g)
        series.spread[50] += 0.5 * series.spread[0]
        rep = check_monotone_diameter(series, tol=1e-9)
        assert not rep
        assert rep.worst_time == pytest.approx(series.times[50])

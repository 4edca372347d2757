"""End-to-end acceptance checks, one test per numbered criterion.

Each test prints a single PASS/FAIL line; shared certified runs from
criteria 5-7 feed the position-bound check of criterion 9.
"""
import math
import time

import numpy as np
import pytest

from delayflock.analysis import check_continuous, verify_decay
from delayflock.dde import InitialHistory, diameters, integrate
from delayflock.digraph import Digraph, compute_metrics
from delayflock.discrete import simulate_discrete
from delayflock.harness import Scenario, preset, run, sweep
from delayflock.interaction import DelayProfile, WeightFunction
from delayflock.analysis import (
    ModelParams,
    c_infinity,
    rho_plus,
)

from oracles import all_digraphs, floyd_warshall_metrics, two_agent_ode_difference

FIG_ARCS = [(1, 2), (2, 3), (3, 1), (3, 4)]
FIG_X0 = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
FIG_V0 = np.array([[1.0, -2.0], [3.0, -4.0], [5.0, 6.0], [-7.0, -8.0]])

# certified RunReports accumulated by criteria 5-7 and audited by criterion 9
CERTIFIED_REPORTS = []


def _report(num, label, ok, detail=""):
    tail = f" -- {detail}" if detail else ""
    print(f"ACCEPTANCE {num} ({label}): {'PASS' if ok else 'FAIL'}{tail}")
    assert ok, f"criterion {num} ({label}){tail}"


def test_criterion_1_graph_metrics():
    t0 = time.time()
    g = Digraph.from_arc_list(4, FIG_ARCS, one_based=True)
    m = compute_metrics(g)
    ok = (m.gamma_g == 2 and m.n_infinity == 1)
    mismatches = 0
    count = 0
    for n in (1, 2, 3, 4):
        for arcs in all_digraphs(n):
            count += 1
            roots, gamma, n_inf = floyd_warshall_metrics(arcs)
            mm = compute_metrics(Digraph(arcs))
            if not (mm.roots == frozenset(roots) and mm.gamma_g == gamma
                    and mm.n_infinity == n_inf):
                mismatches += 1
    rng = np.random.default_rng(12345)
    for _ in range(10_000):
        count += 1
        arcs = rng.random((5, 5)) < rng.uniform(0.1, 0.9)
        np.fill_diagonal(arcs, False)
        roots, gamma, n_inf = floyd_warshall_metrics(arcs)
        mm = compute_metrics(Digraph(arcs))
        if not (mm.roots == frozenset(roots) and mm.gamma_g == gamma
                and mm.n_infinity == n_inf):
            mismatches += 1
    elapsed = time.time() - t0
    ok = ok and mismatches == 0 and elapsed < 60.0
    _report(1, "graph metrics vs oracle", ok,
            f"{count} digraphs, {mismatches} mismatches, {elapsed:.1f}s")


def test_criterion_2_constant_formulas():
    p = ModelParams(gamma_g=2, n_infinity=1, kappa=1.0, tau=1.0, d=2)
    want_c = math.exp(-10.0) / (48.0 * math.sqrt(2.0))
    got_c = c_infinity(p)
    err_c = abs(got_c - want_c) / want_c
    got_r = rho_plus(2.0, 17.0 / 32.0, 2)
    err_r = abs(got_r - 2.0) / 2.0
    ok = err_c <= 1e-12 and err_r <= 1e-12
    _report(2, "closed-form constants", ok,
            f"c_infinity rel err {err_c:.2e}, rho_plus rel err {err_r:.2e}")


def test_criterion_3_ode_oracle():
    g = Digraph.complete(2)
    w = WeightFunction(kind="constant", kappa=1.0)
    p = DelayProfile.zero()
    hist = InitialHistory.constant([[0.0], [1.0]], [[0.0], [1.0]], tau=0.0)
    traj = integrate(hist, g, w, p, t_end=1.0, dt=1e-3)
    _, v = traj.state_at(1.0)
    err_c = abs(float(v[0, 0] - v[1, 0]) + two_agent_ode_difference(1.0, 1.0, 1.0))

    h = 0.1
    dtraj = simulate_discrete([[0.0], [0.0]], [[0.0], [1.0]], g, w, p,
                              t_end=50, h=h)
    diff = dtraj.vs[:, 1, 0] - dtraj.vs[:, 0, 0]
    factor = 1.0 - 2.0 * h
    err_d = max(abs(diff[k + 1] - factor * diff[k]) for k in range(50))
    ok = err_c <= 1e-8 and err_d <= 1e-12
    _report(3, "two-agent closed forms", ok,
            f"continuous err {err_c:.2e} @t=1, discrete per-step err {err_d:.2e}")


def _random_scenario(rng, model):
    n = int(rng.integers(2, 7))
    d = int(rng.integers(1, 4))
    arcs = rng.random((n, n)) < rng.uniform(0.3, 0.9)
    np.fill_diagonal(arcs, False)
    g = Digraph(arcs)
    beta = float(rng.uniform(0.0, 1.0))
    kappa = float(rng.uniform(0.2, 1.5))
    w = WeightFunction(kind="cucker-smale", kappa=kappa, beta=beta)
    x = rng.normal(scale=2.0, size=(n, d))
    # half the scenarios use tiny spreads so a fair share come out certified
    scale = 1e-8 if rng.random() < 0.5 else float(rng.uniform(0.5, 3.0))
    v = rng.normal(size=(n, d)) * scale
    if model == "discrete":
        delay = DelayProfile(kind="piecewise-random", tau_max=1.0, low=0,
                             high=1, seed=int(rng.integers(1e6)), hold=1.0,
                             integer_valued=True)
        h = min(0.05, 0.5 / (kappa * max(1, int(arcs.sum(axis=1).max()))))
        return Scenario(name="rand-disc", model="discrete", graph=g, weight=w,
                        delay=delay, positions=x, velocities=v, h=h, t_end=80)
    mean = float(rng.uniform(0.2, 0.8))
    amp = float(rng.uniform(0.0, min(mean, 1.0 - mean)))
    delay = DelayProfile(kind="sinusoidal", tau_max=1.0, mean=mean,
                         amplitude=amp, period=float(rng.uniform(0.5, 4.0)))
    return Scenario(name="rand-cont", model="continuous", graph=g, weight=w,
                    delay=delay, positions=x, velocities=v, dt=0.02, t_end=5.0)


def test_criterion_4_monotonicity_suite():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    worst = {"continuous": 0.0, "discrete": 0.0}
    n_certified = 0
    failures = []
    for k in range(50):
        model = "continuous" if k % 2 == 0 else "discrete"
        s = _random_scenario(rng, model)
        rep = run(s)
        d0 = max(float(rep.diameter_series.spread[0]), 1e-300)
        tol = (1e-6 if model == "continuous" else 1e-9) * d0
        drift = rep.monotonicity.max_increase / d0
        worst[model] = max(worst[model], drift)
        if not rep.monotonicity or rep.monotonicity.max_increase > tol:
            failures.append((k, model, drift))
        if rep.certificate is not None and rep.certificate.guaranteed:
            n_certified += 1
    elapsed = time.time() - t0
    ok = not failures and elapsed < 120.0
    _report(4, "windowed-extrema monotonicity", ok,
            f"50 scenarios ({n_certified} certified), worst relative drift "
            f"continuous {worst['continuous']:.2e} / discrete "
            f"{worst['discrete']:.2e}, {elapsed:.1f}s; failures: {failures}")


def test_criterion_5_decay_bound():
    rep = run(preset("fig2-digraph"))
    cert = rep.certificate
    ok = cert is not None and cert.guaranteed
    detail = "certificate missing"
    if ok:
        decay = verify_decay(rep.diameter_series, cert, tol=1e-6)
        ok = bool(decay)
        detail = (f"delta={cert.delta:.17g}, blocks n=0..{decay.n_checked - 1} "
                  f"within bound, worst excess {decay.worst_excess:.2e}")
        CERTIFIED_REPORTS.append(rep)
    _report(5, "per-block decay bound", ok, detail)


def test_criterion_6_reference_experiments():
    t0 = time.time()
    hit_times = {}
    for name in ("fig2-digraph", "fig2-complete", "fig4-digraph",
                 "fig4-complete"):
        rep = run(preset(name))
        ser = rep.diameter_series
        d0 = float(ser.spread[0])
        below = np.flatnonzero(ser.spread < 1e-3 * d0)
        hit_times[name] = float(ser.times[below[0]]) if below.size else math.inf
        if rep.certificate is not None and rep.certificate.guaranteed:
            CERTIFIED_REPORTS.append(rep)
    flock_ok = all(math.isfinite(t) for t in hit_times.values())
    order_ok = (hit_times["fig2-complete"] <= hit_times["fig2-digraph"]
                and hit_times["fig4-complete"] <= hit_times["fig4-digraph"])

    rep5 = run(preset("fig5-digraph"))
    ser5 = rep5.diameter_series
    ratio5 = float(ser5.spread.min() / ser5.spread[0])
    fig5_ok = ratio5 >= 0.5
    elapsed = time.time() - t0
    ok = flock_ok and order_ok and fig5_ok and elapsed < 60.0
    _report(6, "reference experiment reproduction", ok,
            f"flock times {hit_times}, fig5 min diameter ratio {ratio5:.4f} "
            f"(floor 0.5), {elapsed:.1f}s")


def test_criterion_7_certificate_soundness_sweep():
    t0 = time.time()
    template = preset("fig2-digraph").replace(t_end=15.0, dt=0.02)
    betas = list(np.linspace(0.05, 0.8, 10))
    scales = list(np.geomspace(1e-3, 1e3, 20))
    reports = sweep(template, {"beta": betas, "scale": scales})
    assert len(reports) == 200
    n_cert = 0
    unsound = []
    for rep in reports:
        c = rep.certificate
        if c is None or not c.guaranteed:
            continue
        n_cert += 1
        CERTIFIED_REPORTS.append(rep)
        if rep.decay is not None and not rep.decay:
            unsound.append(rep.scenario.name)
    elapsed = time.time() - t0
    ok = not unsound and elapsed < 300.0
    _report(7, "certificate soundness sweep", ok,
            f"200 points, {n_cert} certified, {len(unsound)} decay "
            f"violations, {elapsed:.1f}s")


def test_criterion_8_integrator_order():
    g = Digraph.from_arc_list(4, FIG_ARCS, one_based=True)
    w = WeightFunction(kind="cucker-smale", kappa=1.0, beta=0.25)
    p = DelayProfile.constant(1.0)
    hist = InitialHistory.constant(FIG_X0, 0.1 * FIG_V0, tau=1.0)
    errs = []
    for dt in (0.04, 0.02):
        ref = integrate(hist, g, w, p, t_end=2.0, dt=dt / 8.0)
        vref = ref.state_at(2.0)[1]
        traj = integrate(hist, g, w, p, t_end=2.0, dt=dt)
        errs.append(float(np.abs(traj.state_at(2.0)[1] - vref).max()))
    ratio = errs[0] / errs[1]
    ok = ratio >= 12.0
    _report(8, "integrator convergence order", ok,
            f"error ratio {ratio:.2f} when halving dt (floor 12)")


def test_criterion_9_position_bound():
    checked = 0
    violations = []
    for rep in CERTIFIED_REPORTS:
        pc = rep.positions_check
        if pc is None:
            continue
        checked += 1
        if not pc:
            violations.append((rep.scenario.name, pc.max_distance, pc.bound))
    ok = checked > 0 and not violations
    _report(9, "uniform position bound", ok,
            f"{checked} certified runs from criteria 5-7, "
            f"{len(violations)} violations")

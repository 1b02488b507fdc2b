"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every tolerance is pinned here; nothing defers to later calibration.  Tests
collect all sub-check outcomes first, print the criterion verdict, then
assert, so the report stays complete even when a sub-check fails.
"""

import itertools
import os
import time

import numpy as np
import pytest

from aeroplan.boundary import forward_boundaries, optimize_boundaries
from aeroplan.harness import (SweepSpec, bound_gap_experiment,
                              generate_scenario, replay, sweep)
from aeroplan.linkweight import HopSpec, build_environment, solve_p1
from aeroplan.multiflow import (allocate_resources, feasibility_set_check,
                                hop_slot_coefficients, make_slot_edges,
                                plan_multi)
from aeroplan.planner import (baseline_aggregate, baseline_spacetime,
                              brute_force, plan_single)
from aeroplan.scenario import Commodity, watts_to_dbm
from aeroplan.stgraph import Route, SpaceTimeGraph, bottleneck_path, build_graph
from helpers import constant_env, random_env
from test_multiflow import grid_feasible, two_flow_instance
from test_stgraph import enumerate_bottleneck, random_graph

SUITE_START = time.time()


def _verdict(num, name, checks):
    """checks: list of (ok, detail).  Prints one line, returns failures."""
    failures = [d for ok, d in checks if not ok]
    status = "PASS" if not failures else "FAIL"
    detail = "; ".join(d for _, d in checks)
    print(f"[{status}] criterion {num} ({name}): {detail}", flush=True)
    return failures


def _gap_db(a, b):
    return watts_to_dbm(a) - watts_to_dbm(b)


# ---------------------------------------------------------------------------


def test_criterion_1_bound_gaps(fgamma_table):
    """Capacity-bound gaps vs Monte Carlo at kappa=1 over the table range."""
    start = time.time()
    res = bound_gap_experiment(fgamma_table, kappa=1.0, n_samples=1_000_000)
    elapsed = time.time() - start
    checks = [
        (abs(res.gap_lower_db - 1.17) <= 0.1,
         f"lower-bound gap {res.gap_lower_db:.3f} dB (target 1.17 +/- 0.1)"),
        (abs(res.gap_approx1_db - 0.076) <= 0.1,
         f"approx-I gap {res.gap_approx1_db:.3f} dB (target 0.076 +/- 0.1)"),
        (abs(res.gap_approx2_db - 0.10) <= 0.1,
         f"approx-II gap {res.gap_approx2_db:.3f} dB (target 0.10 +/- 0.1)"),
        (res.gap_approx2_db <= 0.15,
         f"approx-II tracks MC within {res.gap_approx2_db:.3f} dB (<= 0.15)"),
        (elapsed <= 120.0, f"runtime {elapsed:.0f}s (<= 120s)"),
    ]
    failures = _verdict(1, "bound gaps", checks)
    assert not failures, failures


def test_criterion_2_near_optimality(fgamma_table):
    """Planner vs exhaustive oracle over 50 randomized scenarios."""
    start = time.time()
    rng = np.random.default_rng(20250810)
    gaps = []
    for seed in range(50):
        M = int(rng.integers(3, 8))
        T = float(rng.uniform(1.0, 60.0))
        S = 10.0 ** rng.uniform(np.log10(5e6), np.log10(5e8))
        N = int(rng.integers(1, 6))
        sc = generate_scenario(seed, M=M, N=N, T=T, S_bits=S)
        env = build_environment(sc, bound_mode="approx2", table=fgamma_table)
        com = sc.commodities[0]
        plan = plan_single(env, com.src, com.dst, com.size_bits)
        oracle = brute_force(env, com.src, com.dst, com.size_bits)
        if plan.feasible and oracle.feasible:
            gaps.append(_gap_db(plan.theta, oracle.theta))
        elif plan.feasible == oracle.feasible:
            gaps.append(0.0)
        else:
            gaps.append(np.inf)
    gaps = np.array(gaps)
    elapsed = time.time() - start
    checks = [
        (float(np.max(gaps)) <= 0.5,
         f"max gap {np.max(gaps):.3f} dB (<= 0.5)"),
        (float(np.median(gaps)) <= 0.1,
         f"median gap {np.median(gaps):.3f} dB (<= 0.1)"),
        (elapsed <= 600.0, f"runtime {elapsed:.0f}s (<= 600s)"),
    ]
    failures = _verdict(2, "near-optimality vs oracle", checks)
    assert not failures, failures


def test_criterion_3_baseline_dominance(fgamma_table):
    """Dominance over both baselines, and gap amplification for
    delay-sensitive large-data tasks."""
    wins = {"aggregate": 0, "spacetime": 0}
    total = 0
    for seed in range(100):
        sc = generate_scenario(seed, M=7, N=3, T=10.0, S_bits=50e6)
        env = build_environment(sc, bound_mode="approx2", table=fgamma_table)
        com = sc.commodities[0]
        plan = plan_single(env, com.src, com.dst, com.size_bits)
        agg = baseline_aggregate(env, com.src, com.dst, com.size_bits)
        st = baseline_spacetime(env, com.src, com.dst, com.size_bits)
        if not plan.feasible:
            continue
        total += 1
        tol = plan.theta * 1e-6
        if not agg.feasible or plan.theta <= agg.theta + tol:
            wins["aggregate"] += 1
        if not st.feasible or plan.theta <= st.theta + tol:
            wins["spacetime"] += 1

    def mean_gaps(T, S, n_seeds=30):
        gaps = {"aggregate": [], "spacetime": []}
        for seed in range(n_seeds):
            sc = generate_scenario(seed, M=7, N=3, T=T, S_bits=S)
            env = build_environment(sc, bound_mode="approx2", table=fgamma_table)
            com = sc.commodities[0]
            plan = plan_single(env, com.src, com.dst, com.size_bits)
            agg = baseline_aggregate(env, com.src, com.dst, com.size_bits)
            st = baseline_spacetime(env, com.src, com.dst, com.size_bits)
            if plan.feasible and agg.feasible:
                gaps["aggregate"].append(_gap_db(agg.theta, plan.theta))
            if plan.feasible and st.feasible:
                gaps["spacetime"].append(_gap_db(st.theta, plan.theta))
        return {k: float(np.mean(v)) for k, v in gaps.items()}

    tight = mean_gaps(1.0, 50e6)
    loose = mean_gaps(60.0, 5e6)
    checks = [
        (wins["aggregate"] >= 0.95 * total,
         f"beats aggregate on {wins['aggregate']}/{total} seeds (>= 95%)"),
        (wins["spacetime"] >= 0.95 * total,
         f"beats spacetime on {wins['spacetime']}/{total} seeds (>= 95%)"),
        (tight["aggregate"] > loose["aggregate"],
         f"aggregate gap amplifies: {tight['aggregate']:.1f} dB tight vs "
         f"{loose['aggregate']:.1f} dB loose"),
        (tight["spacetime"] > loose["spacetime"],
         f"spacetime gap amplifies: {tight['spacetime']:.1f} dB tight vs "
         f"{loose['spacetime']:.1f} dB loose"),
    ]
    failures = _verdict(3, "baseline dominance", checks)
    assert not failures, failures


def test_criterion_4_property_suites(fgamma_table):
    """Exact structural properties of the hop weights, boundaries, shares,
    and the path DP."""
    checks = []
    rng = np.random.default_rng(4401)

    # hop-weight monotonicity in both interval ends, 100 instances
    mono_ok = 0
    for _ in range(100):
        env = random_env(rng, mode="approx2", table=fgamma_table)
        t0 = rng.uniform(0.0, 3.0)
        t1 = t0 + rng.uniform(0.5, 3.0)
        t2 = t1 + rng.uniform(0.5, 3.0)
        S = 10.0 ** rng.uniform(6.7, 7.7)
        w_short = solve_p1(env, HopSpec(1, 2, t0, t1, S))
        w_long = solve_p1(env, HopSpec(1, 2, t0, t2, S))
        w_late = solve_p1(env, HopSpec(1, 2, t0 + 0.3, t2, S))
        ok = True
        if w_short.feasible:
            ok &= w_long.theta < w_short.theta
        if w_late.feasible:
            ok &= w_late.theta > w_long.theta
        mono_ok += ok
    checks.append((mono_ok == 100,
                   f"interval monotonicity on {mono_ok}/100 instances"))

    # strict decrease of the last boundary in theta, 20 x 5
    dec_ok, dec_n = 0, 0
    for _ in range(20):
        env = random_env(rng, mode="approx2", table=fgamma_table)
        route = Route(o=(1, 2, 3))
        prev = np.linspace(0.0, env.horizon, 3)
        for _ in range(5):
            th1 = 10.0 ** rng.uniform(-10, -6)
            th2 = th1 * 10.0 ** rng.uniform(0.1, 1.0)
            t1 = forward_boundaries(env, route, th1, prev, alpha=0.0,
                                    size_bits=5e6)
            t2 = forward_boundaries(env, route, th2, prev, alpha=0.0,
                                    size_bits=5e6)
            if np.isfinite(t1[-1]) and np.isfinite(t2[-1]):
                dec_n += 1
                dec_ok += t1[-1] > t2[-1]
    checks.append((dec_ok == dec_n and dec_n >= 50,
                   f"deadline map strictly decreasing on {dec_ok}/{dec_n} pairs"))

    # leakage equalization at the boundary optimum
    eq_ok, eq_n = 0, 0
    for _ in range(10):
        env = random_env(rng, n_nodes=4, mode="approx2", table=fgamma_table)
        S = 10.0 ** rng.uniform(6.5, 7.3)
        sol = optimize_boundaries(env, Route(o=(1, 2, 3, 4)), alpha=0.0,
                                  size_bits=S)
        if not sol.feasible:
            continue
        eq_n += 1
        ws = [solve_p1(env, HopSpec(tx, rx, sol.t[k], sol.t[k + 1], S)).theta
              for k, tx, rx in Route(o=(1, 2, 3, 4)).hops()]
        eq_ok += (max(ws) - min(ws)) <= 2e-4 * max(ws)
    checks.append((eq_ok == eq_n and eq_n >= 5,
                   f"equalization residue <= 2*tol on {eq_ok}/{eq_n} instances"))

    # nested feasible share family, 20 instances
    nest_ok = 0
    rng2 = np.random.default_rng(4402)
    for _ in range(20):
        S1, S2 = 10.0 ** rng2.uniform(6.5, 7.5, size=2)
        env, flows = two_flow_instance(S1=S1, S2=S2)
        edges = make_slot_edges(env, 4)
        theta, _ = allocate_resources(env, flows, edges)
        th1 = theta * rng2.uniform(1.0, 1.5)
        th2 = th1 * rng2.uniform(1.1, 3.0)
        alloc1 = feasibility_set_check(env, flows, th1, edges)
        ok = alloc1 is not None
        if ok:
            for zi, flow in enumerate(flows):
                for k, tx, rx in flow.route.hops():
                    coeff = hop_slot_coefficients(
                        env, tx, rx, flow.boundaries[k],
                        flow.boundaries[k + 1], th2, edges)
                    ok &= coeff @ alloc1.shares[zi] >= (
                        flow.commodity.size_bits * (1 - 1e-9))
        nest_ok += ok
    checks.append((nest_ok == 20, f"share-family nestedness on {nest_ok}/20"))

    # bottleneck DP equals exhaustive enumeration, 200 instances M <= 5
    rng3 = np.random.default_rng(4403)
    dp_ok = 0
    for _ in range(200):
        n = int(rng3.integers(2, 6))
        g = random_graph(rng3, n, max(1, n - 1))
        _, val = bottleneck_path(g, 1, n)
        ref = enumerate_bottleneck(g, 1, n)
        dp_ok += (np.isinf(val) and np.isinf(ref)) or (
            np.isfinite(val) and abs(val - ref) <= 1e-12 * max(ref, 1e-300))
    checks.append((dp_ok == 200, f"DP == enumeration on {dp_ok}/200 graphs"))

    # virtual edges cost exactly zero, and a direct-route instance is
    # represented as a virtual chain at the single-hop optimal cost
    env = constant_env(n_nodes=4, gain_tx=1e-12, gain_nb=1e-10, horizon=8.0,
                       gains={(1, 4): 1e-8})
    w_virtual = solve_p1(env, HopSpec(2, 2, 0.0, 4.0, 5e7))
    graph = build_graph(env, np.linspace(0, 8, 4), 5e7)
    diag_zero = all(np.all(np.diag(w) == 0.0) for w in graph.weights)
    plan = plan_single(env, 1, 4, 5e7)
    direct = brute_force(env, 1, 4, 5e7)
    fig3_ok = (w_virtual.theta == 0.0 and diag_zero
               and plan.route.n_legit() == 1
               and direct.route.o == (1, 4)
               and abs(_gap_db(plan.theta, direct.theta)) <= 0.05)
    checks.append((fig3_ok, "virtual edges zero-cost; direct route equals "
                            "its virtual-chain representation"))

    failures = _verdict(4, "property suites", checks)
    assert not failures, failures


def test_criterion_5_qos_and_interference(fgamma_table):
    """Replay every accepted plan: median delivered/S >= 1 and the worst
    instantaneous leakage equals theta exactly."""
    medians, identity_ok, n_plans = [], 0, 0
    for seed in range(8):
        sc = generate_scenario(seed + 500, M=6, N=3, T=8.0, S_bits=3e7)
        env = build_environment(sc, bound_mode="approx2", table=fgamma_table)
        com = sc.commodities[0]
        plan = plan_single(env, com.src, com.dst, com.size_bits)
        if not plan.feasible:
            continue
        n_plans += 1
        report = replay(env, plan, seed=seed, n_realizations=200)
        medians.append(report.median_ratio)
        peaks = np.array(list(report.max_interference.values()))
        identity_ok += (peaks.max() <= plan.theta * (1 + 1e-9)
                        and peaks.max() >= plan.theta * (1 - 1e-9))
    checks = [
        (n_plans >= 6, f"{n_plans} accepted plans replayed"),
        (min(medians) >= 1.0,
         f"median delivered/S in [{min(medians):.3f}, {max(medians):.3f}] (>= 1)"),
        (identity_ok == n_plans,
         f"worst leakage equals theta (1e-9 rel) on {identity_ok}/{n_plans}"),
    ]
    failures = _verdict(5, "QoS and interference identity", checks)
    assert not failures, failures


def test_criterion_6_multi_commodity(fgamma_table):
    """Share bisection vs grid-scan oracle, descent, and segmentation gain."""
    checks = []
    # grid-scan oracle match on 2-commodity x 4-slot instances, 10 seeds
    rng = np.random.default_rng(60)
    worst = 0.0
    for _ in range(10):
        S1, S2 = 10.0 ** rng.uniform(6.8, 7.6, size=2)
        a1, a2 = rng.uniform(0, 3, size=2)
        b1 = a1 + rng.uniform(3, 8 - a1)
        b2 = a2 + rng.uniform(3, 8 - a2)
        env, flows = two_flow_instance(S1=S1, S2=S2, w1=(a1, min(b1, 8)),
                                       w2=(a2, min(b2, 8)))
        edges = make_slot_edges(env, 4)
        theta, _ = allocate_resources(env, flows, edges)
        hi = theta
        while not grid_feasible(env, flows, hi, edges):
            hi *= 10.0 ** 0.05
        t = hi / 10.0 ** 0.05
        while not grid_feasible(env, flows, t, edges):
            t *= 10.0 ** 0.001  # 0.01 dB scan resolution
        worst = max(worst, abs(10.0 * np.log10(t / theta)))
    checks.append((worst <= 0.11,
                   f"share bisection within {worst:.3f} dB of the 0.1-grid "
                   f"scan (<= 0.1 + 0.01 resolution)"))

    # global leakage trace non-increasing (Algorithm-4-style alternation)
    sc = generate_scenario(61, M=6, N=2, T=8.0, S_bits=1.5e7, Z=2)
    env = build_environment(sc, bound_mode="approx2", table=fgamma_table)
    mp = plan_multi(env, sc.commodities, n_slots=8)
    tr = np.asarray(mp.trace)
    checks.append((mp.feasible and np.all(np.diff(tr) <= 1e-4 * tr[:-1]),
                   f"global leakage trace non-increasing over {len(tr)} iters"))

    # segmentation: splitting one payload into 4 lowers the leakage on a
    # delay-tight large-data instance
    sc1 = generate_scenario(62, M=7, N=3, T=10.0, S_bits=6e8, Z=1,
                            commodity_mode="segments")
    sc4 = generate_scenario(62, M=7, N=3, T=10.0, S_bits=6e8, Z=4,
                            commodity_mode="segments")
    env1 = build_environment(sc1, bound_mode="approx2", table=fgamma_table)
    env4 = build_environment(sc4, bound_mode="approx2", table=fgamma_table)
    mp1 = plan_multi(env1, sc1.commodities, n_slots=16)
    mp4 = plan_multi(env4, sc4.commodities, n_slots=16)
    seg_gain = _gap_db(mp1.theta, mp4.theta)
    checks.append((mp1.feasible and mp4.feasible and mp4.theta < mp1.theta,
                   f"segmentation gain {seg_gain:.2f} dB (> 0)"))

    failures = _verdict(6, "multi-commodity", checks)
    assert not failures, failures


def test_criterion_7_determinism_and_scale(fgamma_table):
    """Thread-count invariance of sweep results and total suite runtime."""
    spec = SweepSpec(vary="T", values=[3.0, 6.0], n_seeds=2,
                     methods=["proposed", "aggregate", "spacetime"],
                     base=dict(M=4, N=2, S_bits=1e7))

    def run(threads):
        os.environ["AEROPLAN_THREADS"] = str(threads)
        try:
            return sweep(spec, table=fgamma_table)
        finally:
            del os.environ["AEROPLAN_THREADS"]

    def semantic(csv):
        rows = [l.split(",") for l in csv.strip().splitlines()[1:]]
        return [(r[0], r[1], r[2], r[3], r[4], r[5], r[7]) for r in rows]

    s1, s4 = semantic(run(1)), semantic(run(4))
    elapsed_min = (time.time() - SUITE_START) / 60.0
    checks = [
        (s1 == s4, "sweep results identical across 1 and 4 worker threads"),
        (elapsed_min <= 30.0,
         f"acceptance suite wall time {elapsed_min:.1f} min (<= 30)"),
    ]
    failures = _verdict(7, "determinism and scale", checks)
    assert not failures, failures

"""Single-commodity planning: alternate route and boundary updates.

The outer loop re-weights the space-time graph at the current boundaries,
re-routes with the bottleneck path DP, then re-optimizes the boundaries on
the new route.  Both steps can only lower the leakage level, so the trace is
non-increasing and the loop converges; at the fixed point all virtual edges
have collapsed and every hop carries the same leakage.

Also hosts the benchmarking companions: the exhaustive route oracle and the
two classical baselines (average-capacity routing and fixed uniform
boundaries).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .boundary import forward_boundaries, optimize_boundaries
from .linkweight import LinkEnvironment
from .scenario import watts_to_dbm
from .stgraph import Route, bottleneck_path, build_graph, route_weights

BRUTE_FORCE_GUARD = 8


@dataclass
class Plan:
    route: Route
    boundaries: np.ndarray
    theta: float
    trace: list = field(default_factory=list)
    hop_weights: list = field(default_factory=list)  # (layer, tx, rx, theta)
    iterations: int = 0
    converged: bool = True
    method: str = "proposed"
    size_bits: float = 0.0

    @property
    def feasible(self):
        return np.isfinite(self.theta)

    def to_json(self):
        doc = {
            "method": self.method,
            "feasible": bool(self.feasible),
            "route": list(self.route.o),
            "boundaries_s": [float(x) for x in self.boundaries],
            "theta_w": float(self.theta),
            "theta_dbm": float(watts_to_dbm(self.theta)) if self.feasible else None,
            "hop_weights_w": [
                {"layer": k, "tx": tx, "rx": rx, "theta_w": float(w)}
                for k, tx, rx, w in self.hop_weights
            ],
            "trace_w": [float(x) for x in self.trace],
            "iterations": self.iterations,
            "converged": bool(self.converged),
        }
        return json.dumps(doc, indent=2)


def _audited_theta(env, route, boundaries, size_bits, mode, bw_profile):
    """Plan-level leakage: max legitimate hop weight at the final boundaries."""
    weights = route_weights(env, route, boundaries, size_bits, mode, bw_profile)
    if not weights:
        return 0.0, weights
    return max(w for _, _, _, w in weights), weights


def _alternate(env, src, dst, size_bits, t_init, mode, bw_profile, alpha,
               max_iter, tol_rel):
    """One run of the alternating route/boundary loop from given boundaries."""
    T = env.horizon
    t = np.asarray(t_init, dtype=float)
    trace = []
    route = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        graph = build_graph(env, t, size_bits, bound_mode=mode, bw_profile=bw_profile)
        route, _ = bottleneck_path(graph, src, dst)
        sol = optimize_boundaries(
            env, route, prev_t=t, alpha=alpha, size_bits=size_bits,
            mode=mode, bw_profile=bw_profile,
        )
        if not sol.feasible:
            return Plan(route, sol.t, np.inf, trace + [np.inf], [], it, False,
                        size_bits=size_bits)
        trace.append(sol.theta)
        if np.max(np.abs(sol.t - t)) <= tol_rel * T:
            t = sol.t
            converged = True
            break
        t = sol.t
    theta, weights = _audited_theta(env, route, t, size_bits, mode, bw_profile)
    return Plan(route, t, theta, trace, weights, it, converged, size_bits=size_bits)


def _relay_warm_start(env, src, dst, size_bits, mode, bw_profile):
    """Boundary seed from the best short route (up to two relays).

    The layered graph only scores hops inside the current windows, so an
    opportunity whose hops all sit inside one window is invisible to the
    alternation started from the uniform grid.  Seeding a second run with the
    best short route's optimal boundaries exposes such windows.  O(M^2)
    candidates, each a cheap few-hop bisection.
    """
    M = len(env.aerial_ids)
    relays = [r for r in env.aerial_ids if r not in (src, dst)]
    best = None
    candidates = [(src, dst)]
    candidates += [(src, r, dst) for r in relays]
    candidates += [(src, a, b, dst) for a in relays for b in relays if a != b]
    for o in candidates:
        sol = optimize_boundaries(env, Route(o=o), alpha=0.0,
                                  size_bits=size_bits, mode=mode,
                                  bw_profile=bw_profile)
        if sol.feasible and (best is None or sol.theta < best[1]):
            best = (sol.t, sol.theta)
    if best is None:
        return None
    t, _ = best
    pad = np.full(M, env.horizon)
    pad[: len(t)] = t
    return pad


def plan_single(env: LinkEnvironment, src, dst, size_bits, mode=None,
                bw_profile=None, alpha=0.5, max_iter=50, tol_rel=1e-3,
                warm_start=True) -> Plan:
    """Alternating graph/boundary optimization (the proposed planner).

    Runs the alternation from the uniform boundary grid and, for M > 2, once
    more from the best single-relay warm start; returns the lower-leakage
    run.  Each run's trace is non-increasing on its own.
    """
    if src == dst:
        raise ValueError("source and destination must differ")
    M = len(env.aerial_ids)
    T = env.horizon
    plan = _alternate(env, src, dst, size_bits, np.linspace(0.0, T, M),
                      mode, bw_profile, alpha, max_iter, tol_rel)
    if warm_start and M > 2:
        seed_t = _relay_warm_start(env, src, dst, size_bits, mode, bw_profile)
        if seed_t is not None:
            alt = _alternate(env, src, dst, size_bits, seed_t, mode,
                             bw_profile, alpha, max_iter, tol_rel)
            if alt.theta < plan.theta:
                plan = alt
    return plan


def _relay_orderings(relays, max_len):
    for k in range(0, max_len + 1):
        yield from itertools.permutations(relays, k)


def brute_force(env: LinkEnvironment, src, dst, size_bits, mode=None,
                bw_profile=None) -> Plan:
    """Enumerate every loop-free relay ordering, optimize boundaries on each
    (no backtracking needed: these routes carry no virtual edges), return the
    lowest-leakage plan.  Optimal, and exponential: guarded to small networks.
    """
    M = len(env.aerial_ids)
    if M > BRUTE_FORCE_GUARD:
        raise ValueError(f"oracle scale exceeded: M={M} > {BRUTE_FORCE_GUARD}")
    if src == dst:
        raise ValueError("source and destination must differ")
    relays = [n for n in env.aerial_ids if n not in (src, dst)]
    best = None
    for perm in _relay_orderings(relays, len(relays)):
        route = Route(o=(src,) + perm + (dst,))
        if best is not None and np.isfinite(best[1].theta):
            # exact prune: if the route misses the deadline at the incumbent
            # level, its optimum is strictly worse (last boundary decreases
            # in theta), so a single forward pass rules it out
            probe = forward_boundaries(
                env, route, best[1].theta * (1.0 + 1e-9),
                np.linspace(0.0, env.horizon, len(route.o)), alpha=0.0,
                size_bits=size_bits, mode=mode, bw_profile=bw_profile,
            )
            if probe[-1] > env.horizon:
                continue
        sol = optimize_boundaries(
            env, route, alpha=0.0, size_bits=size_bits, mode=mode,
            bw_profile=bw_profile,
        )
        if best is None or sol.theta < best[1].theta:
            best = (route, sol)
    route, sol = best
    if not sol.feasible:
        return Plan(route, sol.t, np.inf, [np.inf], [], 1, False, method="brute",
                    size_bits=size_bits)
    theta, weights = _audited_theta(env, route, sol.t, size_bits, mode, bw_profile)
    return Plan(route, sol.t, theta, [theta], weights, 1, True, method="brute",
                size_bits=size_bits)


def average_capacity_matrix(env: LinkEnvironment, mode=None, ref_power=1.0):
    """Mean capacity (bits/s) of every ordered pair over [0, T] at a fixed
    reference transmit power.  Only the route ranking consumes this, and the
    ranking is scale-dependent, so the reference is a documented convention.
    """
    ids = env.aerial_ids
    M = len(ids)
    horizon_cells = slice(0, env.cell_of(env.horizon - 1e-12) + 1)
    cbar = np.zeros((M, M))
    for i, m in enumerate(ids):
        for j, n in enumerate(ids):
            if i == j:
                continue
            dens = env.capacity_density(m, n, ref_power, mode, horizon_cells)
            cbar[i, j] = env.bandwidth * float(np.mean(dens))
    return cbar


def baseline_aggregate(env: LinkEnvironment, src, dst, size_bits, mode=None) -> Plan:
    """Average-capacity routing: pick the route minimizing
    sum over edges of (K-1)/Cbar[edge], then optimize its boundaries.

    The sum runs over the K-1 edges of a K-node route.  Route search is a
    rounds DP (shortest path with exactly j edges) per candidate length.
    """
    ids = env.aerial_ids
    M = len(ids)
    si, di = ids.index(src), ids.index(dst)
    cbar = average_capacity_matrix(env, mode=mode)
    with np.errstate(divide="ignore"):
        edge_cost = np.where(cbar > 0.0, 1.0 / cbar, np.inf)

    # dp[j][n]: min additive cost from src to n using exactly j edges
    dp = np.full((M, M), np.inf)
    dp[0, si] = 0.0
    choice = np.full((M, M), -1, dtype=int)
    for j in range(1, M):
        cand = dp[j - 1][:, None] + edge_cost
        np.fill_diagonal(cand, np.inf)  # self-edges are not transmissions here
        dp[j] = cand.min(axis=0)
        choice[j] = cand.argmin(axis=0)

    best_k, best_total = None, np.inf
    for j in range(1, M):  # route with j edges has K = j+1 nodes
        total = j * dp[j, di]
        if total < best_total:
            best_total, best_k = total, j
    if best_k is None or not np.isfinite(best_total):
        return Plan(Route((src, dst)), np.array([0.0, env.horizon]), np.inf,
                    [np.inf], [], 1, False, method="aggregate", size_bits=size_bits)
    path = [di]
    j = best_k
    while j > 0:
        path.append(choice[j, path[-1]])
        j -= 1
    route = Route(o=tuple(ids[i] for i in reversed(path)))
    sol = optimize_boundaries(env, route, alpha=0.0, size_bits=size_bits, mode=mode)
    if not sol.feasible:
        return Plan(route, sol.t, np.inf, [np.inf], [], 1, False, method="aggregate",
                    size_bits=size_bits)
    theta, weights = _audited_theta(env, route, sol.t, size_bits, mode, None)
    return Plan(route, sol.t, theta, [theta], weights, 1, True, method="aggregate",
                size_bits=size_bits)


def baseline_spacetime(env: LinkEnvironment, src, dst, size_bits, mode=None) -> Plan:
    """Space-time routing with fixed uniform boundaries; no boundary update."""
    M = len(env.aerial_ids)
    t = np.linspace(0.0, env.horizon, M)
    graph = build_graph(env, t, size_bits, bound_mode=mode)
    route, value = bottleneck_path(graph, src, dst)
    weights = route_weights(env, route, t, size_bits, mode, None)
    feasible = np.isfinite(value)
    return Plan(route, t, value if feasible else np.inf, [value], weights, 1,
                feasible, method="spacetime", size_bits=size_bits)

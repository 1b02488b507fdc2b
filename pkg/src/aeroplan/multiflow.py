"""Multi-commodity transport via orthogonal time-frequency shares.

Each commodity z gets a normalized share l_z(t) of the band, piecewise
constant over an LP slot grid; shares are orthogonal (sum <= 1 per slot).
Given all routes and boundaries, the set of feasible share matrices at a
leakage level theta is a polyhedron Psi(theta); the family is nested and
grows with theta, so the smallest workable theta is found by bisection with
a phase-one simplex as the emptiness test.  The outer loop alternates
per-commodity route/boundary updates (single-commodity machinery on the
sub-band) with the share reallocation, and the global leakage trace is
non-increasing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .boundary import optimize_boundaries
from .linkweight import THETA_CAP, HopSpec, LinkEnvironment, solve_p1
from .scenario import Commodity, watts_to_dbm
from .stgraph import Route, bottleneck_path, build_graph

SIMPLEX_TOL = 1e-9


# ---------------------------------------------------------------------------
# Phase-one simplex (Bland's rule)
# ---------------------------------------------------------------------------


def phase_one_simplex(a_ge, b_ge, a_le, b_le, tol=SIMPLEX_TOL, max_pivots=20000):
    """Find x >= 0 with a_ge @ x >= b_ge and a_le @ x <= b_le, or None.

    Dense tableau, artificials on the >= rows, Bland's smallest-index rule
    for anti-cycling.  RHS vectors must be non-negative (callers scale rows).
    """
    a_ge = np.atleast_2d(np.asarray(a_ge, dtype=float))
    a_le = np.atleast_2d(np.asarray(a_le, dtype=float))
    b_ge = np.atleast_1d(np.asarray(b_ge, dtype=float))
    b_le = np.atleast_1d(np.asarray(b_le, dtype=float))
    if np.any(b_ge < 0) or np.any(b_le < 0):
        raise ValueError("phase-one rows must have non-negative RHS")
    m1, n = (0, a_le.shape[1]) if a_ge.size == 0 else a_ge.shape
    m2 = 0 if a_le.size == 0 else a_le.shape[0]
    m = m1 + m2
    # columns: x | surplus (m1) | slack (m2) | artificial (m1) | rhs
    ncols = n + m1 + m2 + m1
    tab = np.zeros((m, ncols + 1))
    if m1:
        tab[:m1, :n] = a_ge
        tab[:m1, n : n + m1] = -np.eye(m1)
        tab[:m1, n + m1 + m2 : n + m1 + m2 + m1] = np.eye(m1)
        tab[:m1, -1] = b_ge
    if m2:
        tab[m1:, :n] = a_le
        tab[m1:, n + m1 : n + m1 + m2] = np.eye(m2)
        tab[m1:, -1] = b_le
    basis = list(range(n + m1 + m2, n + m1 + m2 + m1)) + list(range(n + m1, n + m1 + m2))
    cost = np.zeros(ncols)
    cost[n + m1 + m2 :] = 1.0

    for _ in range(max_pivots):
        cb = cost[basis]
        reduced = cost - cb @ tab[:, :-1]
        entering = -1
        for j in range(ncols):
            if reduced[j] < -tol:
                entering = j
                break  # Bland: smallest eligible index
        if entering < 0:
            break
        col = tab[:, entering]
        ratios = np.full(m, np.inf)
        pos = col > tol
        ratios[pos] = tab[pos, -1] / col[pos]
        best = np.min(ratios)
        if not np.isfinite(best):
            return None  # unbounded phase one cannot happen with our rows
        candidates = [i for i in range(m) if ratios[i] <= best + 1e-12]
        leaving = min(candidates, key=lambda i: basis[i])
        pivot = tab[leaving, entering]
        tab[leaving] /= pivot
        for i in range(m):
            if i != leaving and tab[i, entering] != 0.0:
                tab[i] -= tab[i, entering] * tab[leaving]
        basis[leaving] = entering

    objective = float(cost[basis] @ tab[:, -1])
    if objective > 1e-7:
        return None
    x = np.zeros(ncols)
    for i, b in enumerate(basis):
        x[b] = tab[i, -1]
    return np.maximum(x[:n], 0.0)


# ---------------------------------------------------------------------------
# Slot grid and capacity coefficients
# ---------------------------------------------------------------------------


@dataclass
class ResourceAllocation:
    """Per-commodity normalized bandwidth shares on the LP slot grid."""

    slot_edges: np.ndarray  # (n_slots + 1,) seconds, aligned to the fine grid
    shares: np.ndarray  # (Z, n_slots) in [0, 1], column sums <= 1

    def __post_init__(self):
        s = np.asarray(self.shares)
        if np.any(s < -1e-9) or np.any(s > 1.0 + 1e-9):
            raise ValueError("shares must lie in [0, 1]")
        if np.any(s.sum(axis=0) > 1.0 + 1e-9):
            raise ValueError("shares must be orthogonal (sum <= 1 per slot)")

    @property
    def n_slots(self):
        return self.shares.shape[1]

    def cell_profile(self, z, env: LinkEnvironment):
        """Expand commodity z's slot shares to the fine cell grid; zero share
        outside [0, T] (no resources are allocated past the deadline)."""
        prof = np.zeros(env.n_cells)
        centers = env.times + 0.5 * env.dt
        idx = np.searchsorted(self.slot_edges, centers, side="right") - 1
        inside = (idx >= 0) & (idx < self.n_slots) & (centers < self.slot_edges[-1])
        prof[inside] = self.shares[z, idx[inside]]
        return prof


def make_slot_edges(env: LinkEnvironment, n_slots):
    """Slot boundaries over [0, T], snapped to fine-grid cell edges so every
    cell belongs to exactly one slot."""
    raw = np.linspace(0.0, env.horizon, n_slots + 1)
    snapped = np.round(raw / env.dt) * env.dt
    snapped[0] = 0.0
    snapped[-1] = np.round(env.horizon / env.dt) * env.dt
    if np.any(np.diff(snapped) <= 0):
        raise ValueError("slot grid too fine for the integration grid")
    return snapped


def hop_slot_coefficients(env, tx, rx, t_start, t_end, theta, slot_edges,
                          mode=None):
    """Bits deliverable per unit share, per LP slot, for one hop window.

    Integrates the capacity density over (hop window) intersect (slot) on the
    fine grid; fractional boundary cells are prorated.  Slot edges are cell
    aligned, so each cell maps to one slot.
    """
    n_slots = len(slot_edges) - 1
    out = np.zeros(n_slots)
    a = max(0.0, t_start)
    b = min(t_end, float(slot_edges[-1]))
    if b <= a or tx == rx or theta <= 0.0:
        return out
    i0 = env.cell_of(a)
    i1 = env.cell_of(b - 1e-12)
    cells = slice(i0, i1 + 1)
    dens = env.capacity_density(tx, rx, theta, mode, cells)
    widths = np.full(i1 - i0 + 1, env.dt)
    widths[0] -= a - i0 * env.dt
    widths[-1] -= (i1 + 1) * env.dt - b
    bits = dens * env.bandwidth * widths
    centers = (np.arange(i0, i1 + 1) + 0.5) * env.dt
    slot_idx = np.clip(
        np.searchsorted(slot_edges, centers, side="right") - 1, 0, n_slots - 1
    )
    np.add.at(out, slot_idx, bits)
    return out


# ---------------------------------------------------------------------------
# Algorithm: feasibility check and bisection on the leakage level
# ---------------------------------------------------------------------------


@dataclass
class FlowState:
    """Route and boundaries of one commodity, fixed while shares move."""

    commodity: Commodity
    route: Route
    boundaries: np.ndarray


def feasibility_set_check(env, flows, theta, slot_edges, mode=None):
    """Is Psi(theta) non-empty?  Returns a ResourceAllocation or None.

    Rows: per (commodity, legitimate hop) a >= constraint that the hop window
    delivers S_z on the commodity's share; per slot the orthogonality <= 1.
    Hop rows are scaled by S_z so the simplex sees unit RHS.
    """
    n_slots = len(slot_edges) - 1
    Z = len(flows)
    n = Z * n_slots
    ge_rows, ge_rhs = [], []
    for zi, flow in enumerate(flows):
        t = flow.boundaries
        for k, tx, rx in flow.route.hops():
            coeff = hop_slot_coefficients(
                env, tx, rx, t[k], t[k + 1], theta, slot_edges, mode=mode
            )
            row = np.zeros(n)
            row[zi * n_slots : (zi + 1) * n_slots] = coeff / flow.commodity.size_bits
            ge_rows.append(row)
            ge_rhs.append(1.0)
    le_rows = np.zeros((n_slots, n))
    for i in range(n_slots):
        le_rows[i, i::n_slots] = 1.0
    x = phase_one_simplex(
        np.array(ge_rows) if ge_rows else np.zeros((0, n)),
        np.array(ge_rhs),
        le_rows,
        np.ones(n_slots),
    )
    if x is None:
        return None
    shares = np.minimum(x.reshape(Z, n_slots), 1.0)
    return ResourceAllocation(slot_edges=np.asarray(slot_edges, float), shares=shares)


def allocate_resources(env, flows, slot_edges, mode=None, tol_theta=1e-4,
                       theta_cap=THETA_CAP):
    """Bisection for the smallest leakage with a non-empty share polyhedron.

    The family Psi(theta) is nested increasing in theta, so standard
    bisection applies; the returned allocation is the one found on the
    feasible (upper) side of the bracket.
    """
    # lower bound: even with the full band, no hop can do better than its
    # single-flow weight over its own window
    lo = 0.0
    for flow in flows:
        t = flow.boundaries
        for k, tx, rx in flow.route.hops():
            hop = HopSpec(tx, rx, t[k], min(t[k + 1], env.horizon),
                          flow.commodity.size_bits)
            res = solve_p1(env, hop, mode=mode)
            if not res.feasible:
                return np.inf, None
            lo = max(lo, res.theta)
    alloc = feasibility_set_check(env, flows, lo, slot_edges, mode=mode)
    if alloc is not None:
        return lo, alloc
    hi = max(lo, 1e-9) * 2.0
    alloc = feasibility_set_check(env, flows, hi, slot_edges, mode=mode)
    while alloc is None and hi < theta_cap:
        hi = min(hi * 2.0, theta_cap)
        alloc = feasibility_set_check(env, flows, hi, slot_edges, mode=mode)
    if alloc is None:
        return np.inf, None
    best = (hi, alloc)
    lo_b = lo
    while hi - lo_b > tol_theta * hi:
        mid = 0.5 * (lo_b + hi)
        cand = feasibility_set_check(env, flows, mid, slot_edges, mode=mode)
        if cand is None:
            lo_b = mid
        else:
            hi = mid
            best = (mid, cand)
    return best


# ---------------------------------------------------------------------------
# Algorithm: alternating per-commodity planning and share reallocation
# ---------------------------------------------------------------------------


@dataclass
class MultiPlan:
    commodities: list
    flows: list  # FlowState per commodity
    allocation: ResourceAllocation | None
    theta: float
    trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = True
    diagnostics: str = ""

    @property
    def feasible(self):
        return np.isfinite(self.theta)

    def to_json(self):
        doc = {
            "feasible": bool(self.feasible),
            "theta_w": float(self.theta),
            "theta_dbm": float(watts_to_dbm(self.theta)) if self.feasible else None,
            "trace_w": [float(x) for x in self.trace],
            "iterations": self.iterations,
            "converged": bool(self.converged),
            "slot_edges_s": (
                [float(x) for x in self.allocation.slot_edges]
                if self.allocation is not None else None
            ),
            "shares": (
                self.allocation.shares.tolist()
                if self.allocation is not None else None
            ),
            "commodities": [
                {
                    "id": f.commodity.id,
                    "src": f.commodity.src,
                    "dst": f.commodity.dst,
                    "S_bits": f.commodity.size_bits,
                    "route": list(f.route.o),
                    "boundaries_s": [float(x) for x in f.boundaries],
                }
                for f in self.flows
            ],
            "diagnostics": self.diagnostics,
        }
        return json.dumps(doc, indent=2)


def _single_flow_step(env, commodity, prev_t, bw_profile, mode, alpha=0.5):
    """One pass of the single-commodity alternation under a fixed sub-band."""
    graph = build_graph(env, prev_t, commodity.size_bits, bound_mode=mode,
                        bw_profile=bw_profile)
    route, _ = bottleneck_path(graph, commodity.src, commodity.dst)
    sol = optimize_boundaries(
        env, route, prev_t=prev_t, alpha=alpha, size_bits=commodity.size_bits,
        mode=mode, bw_profile=bw_profile,
    )
    return route, sol


def plan_multi(env: LinkEnvironment, commodities, n_slots=64, mode=None,
               max_iter=30, tol_shares=1e-3, alpha=0.5) -> MultiPlan:
    """Joint routes, boundaries, and time-frequency shares for Z commodities.

    Starts from even static shares (1/Z), alternates per-commodity planning
    with the share bisection until the share matrix settles.  Every commodity
    transmits with the power policy p = theta / max_j h_j at the global
    theta, so the leakage ceiling is shared.
    """
    commodities = list(commodities)
    Z = len(commodities)
    if Z == 0:
        raise ValueError("need at least one commodity")
    M = len(env.aerial_ids)
    slot_edges = make_slot_edges(env, n_slots)
    shares = np.full((Z, n_slots), 1.0 / Z)
    allocation = ResourceAllocation(slot_edges=slot_edges, shares=shares)
    boundaries = [np.linspace(0.0, env.horizon, M) for _ in commodities]
    trace = []
    flows = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        flows = []
        for zi, com in enumerate(commodities):
            profile = allocation.cell_profile(zi, env)
            route, sol = _single_flow_step(
                env, com, boundaries[zi], profile, mode, alpha=alpha
            )
            if not sol.feasible:
                return MultiPlan(
                    commodities, flows, allocation, np.inf, trace + [np.inf],
                    it, False,
                    diagnostics=f"commodity {com.id} infeasible on its sub-band",
                )
            boundaries[zi] = sol.t
            flows.append(FlowState(com, route, sol.t))
        theta, new_alloc = allocate_resources(env, flows, slot_edges, mode=mode)
        if new_alloc is None:
            return MultiPlan(
                commodities, flows, allocation, np.inf, trace + [np.inf], it,
                False, diagnostics="no orthogonal share matrix at the leakage cap",
            )
        trace.append(theta)
        delta = np.max(np.abs(new_alloc.shares - allocation.shares))
        allocation = new_alloc
        if delta <= tol_shares:
            converged = True
            break
    return MultiPlan(commodities, flows, allocation, trace[-1], trace, it, converged)

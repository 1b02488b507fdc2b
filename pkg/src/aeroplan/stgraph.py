"""Layered space-time graph and the minimax (bottleneck) path search.

Layer k is a network snapshot at boundary t_k; an edge (m, n) between layers
k and k+1 carries the data during [t_k, t_{k+1}).  Self-edges (m == m) are
"virtual": they model caching and cost exactly zero.  Edge weights are the
per-hop minimum leakage levels from `linkweight.solve_p1`; infeasible hops
are +inf sentinels so the path DP stays branch-free over dense matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .linkweight import HopSpec, LinkEnvironment, solve_p1
from .scenario import watts_to_dbm


@dataclass(frozen=True)
class Route:
    """Relay choice per layer; o[0] is the source, o[-1] the destination."""

    o: tuple

    def __post_init__(self):
        if len(self.o) < 2:
            raise ValueError("route needs at least source and destination")

    def hops(self):
        """Legitimate (transmitting) hops as (layer index, tx, rx)."""
        return [
            (k, self.o[k], self.o[k + 1])
            for k in range(len(self.o) - 1)
            if self.o[k] != self.o[k + 1]
        ]

    def n_legit(self):
        return len(self.hops())


@dataclass
class SpaceTimeGraph:
    boundaries: np.ndarray  # (M,) non-decreasing, t[0] = 0
    node_ids: list  # aerial node ids, row/col order of the weight matrices
    weights: list  # (M-1) dense (M, M) leakage matrices, W[k][i][j]

    def __post_init__(self):
        t = np.asarray(self.boundaries, dtype=float)
        if np.any(np.diff(t) < -1e-12):
            raise ValueError("boundaries must be non-decreasing")
        for w in self.weights:
            if np.any(np.diag(w) != 0.0):
                raise ValueError("virtual edges must have exactly zero weight")

    def index_of(self, node_id):
        return self.node_ids.index(node_id)

    def to_json(self):
        doc = {
            "boundaries_s": list(map(float, self.boundaries)),
            "node_ids": list(self.node_ids),
            "layers": [
                {"k": k, "weights_dbm": np.where(
                    np.isfinite(w), watts_to_dbm(np.maximum(w, 1e-300)), np.inf
                ).tolist()}
                for k, w in enumerate(self.weights)
            ],
        }
        return json.dumps(doc, indent=2)


def build_graph(env: LinkEnvironment, boundaries, size_bits, bound_mode=None,
                bw_profile=None) -> SpaceTimeGraph:
    """Weight every ordered pair in every layer by solving the hop problem.

    Zero-length layers carry no data: every off-diagonal entry is +inf there
    (solve_p1 reports infeasible over an empty interval) while the diagonal
    stays zero.
    """
    t = np.asarray(boundaries, dtype=float)
    ids = env.aerial_ids
    M = len(ids)
    weights = []
    for k in range(len(t) - 1):
        w = np.zeros((M, M))
        for i, m in enumerate(ids):
            for j, n in enumerate(ids):
                if i == j:
                    continue
                hop = HopSpec(m, n, t[k], t[k + 1], size_bits)
                res = solve_p1(env, hop, mode=bound_mode, bw_profile=bw_profile)
                w[i, j] = res.theta if res.feasible else np.inf
        weights.append(w)
    return SpaceTimeGraph(boundaries=t, node_ids=list(ids), weights=weights)


def bottleneck_path(graph: SpaceTimeGraph, src, dst):
    """Minimize the maximum edge weight from src in layer 1 to dst in layer M.

    Layered DP: dp[n] after layer k is the best (bottleneck, legit edge
    count, route) reaching node n.  Ties break toward fewer legitimate edges,
    then the lexicographically smallest route, which pins a deterministic
    output (the all-virtual-then-direct form in fully symmetric graphs).
    """
    ids = graph.node_ids
    M = len(ids)
    si, di = graph.index_of(src), graph.index_of(dst)
    # state per node: (bottleneck value, legit count, route tuple)
    inf = np.inf
    dp = [(inf, 0, ()) for _ in range(M)]
    dp[si] = (0.0, 0, (si,))
    for w in graph.weights:
        nxt = [(inf, 0, ()) for _ in range(M)]
        for j in range(M):
            best = None
            for i in range(M):
                base = dp[i]
                if base[0] == inf and base[2] == ():
                    continue
                cost = max(base[0], w[i, j])
                legit = base[1] + (1 if i != j else 0)
                cand = (cost, legit, base[2] + (j,))
                if best is None or cand < best:
                    best = cand
            if best is not None:
                nxt[j] = best
        dp = nxt
    value, _, route_idx = dp[di]
    if route_idx == ():
        return Route(o=(src,) + (dst,) * (len(graph.weights))), np.inf
    route = Route(o=tuple(ids[i] for i in route_idx))
    return route, float(value)


def route_weights(env: LinkEnvironment, route: Route, boundaries, size_bits,
                  bound_mode=None, bw_profile=None):
    """Re-solve every legitimate hop of a route at given boundaries; used to
    audit a plan's leakage level hop by hop."""
    t = np.asarray(boundaries, dtype=float)
    out = []
    for k, tx, rx in route.hops():
        hop = HopSpec(tx, rx, t[k], t[k + 1], size_bits)
        res = solve_p1(env, hop, mode=bound_mode, bw_profile=bw_profile)
        out.append((k, tx, rx, res.theta if res.feasible else np.inf))
    return out

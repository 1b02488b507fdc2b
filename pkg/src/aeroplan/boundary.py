"""Time-boundary optimization along a fixed route.

Given a route and a leakage level theta, the boundaries are forced: t_1 = 0
and each t_{k+1} is the earliest time the k-th hop finishes delivering S bits
at leakage theta.  The last boundary t_M(theta) is strictly decreasing in
theta, so the unique theta with t_M(theta) = T is found by bisection.  Soft
backtracking keeps virtual-edge intervals from collapsing to zero before the
surrounding alternation has settled: a virtual hop's boundary advances by
alpha times its previous span instead of snapping onto t_k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linkweight import THETA_CAP, THETA_SEED, LinkEnvironment, solve_hop_end
from .stgraph import Route


@dataclass
class BoundarySolution:
    t: np.ndarray
    theta: float
    iterations: int
    converged: bool

    @property
    def feasible(self):
        return np.isfinite(self.theta)


def forward_boundaries(env: LinkEnvironment, route: Route, theta, prev_t,
                       alpha=0.5, size_bits=0.0, mode=None, bw_profile=None,
                       cap=None):
    """Construct boundaries left to right at a fixed leakage level.

    Legitimate hops end exactly when their throughput reaches S; virtual hops
    inherit t_k plus the backtracking offset alpha*(prev span).  A hop that
    cannot deliver S before the horizon cap poisons the remaining boundaries
    with +inf, which the outer bisection reads as "raise theta".
    """
    o = route.o
    prev_t = np.asarray(prev_t, dtype=float)
    if len(prev_t) != len(o):
        raise ValueError("prev_t must match the route length")
    cap = env.span if cap is None else min(cap, env.span)
    t = np.empty(len(o))
    t[0] = 0.0
    for k in range(len(o) - 1):
        if not np.isfinite(t[k]) or t[k] >= cap:
            t[k + 1 :] = np.inf
            break
        if o[k] == o[k + 1]:
            base = t[k]
        else:
            base = solve_hop_end(
                env, o[k], o[k + 1], theta, t[k], size_bits,
                mode=mode, bw_profile=bw_profile, cap=cap,
            )
        if not np.isfinite(base):
            t[k + 1 :] = np.inf
            break
        back = alpha * (prev_t[k + 1] - prev_t[k]) if o[k] == o[k + 1] else 0.0
        t[k + 1] = min(base + back, cap)
    return t


def optimize_boundaries(env: LinkEnvironment, route: Route, prev_t=None,
                        horizon=None, tol_theta=1e-4, alpha=0.5,
                        size_bits=0.0, mode=None, bw_profile=None,
                        theta_cap=THETA_CAP):
    """Bisection on theta until the route finishes exactly at the horizon.

    t_M(theta) <= T shrinks the upper bracket, otherwise the lower one moves
    up; the returned boundaries come from the feasible (upper) side, so the
    deadline is always met.  Infeasible routes (cap reached with t_M > T)
    come back with theta = +inf.
    """
    o = route.o
    horizon = env.horizon if horizon is None else horizon
    if prev_t is None:
        prev_t = np.linspace(0.0, horizon, len(o))
    if size_bits <= 0.0:
        return BoundarySolution(np.asarray(prev_t, float), 0.0, 0, True)

    def last_boundary(theta):
        t = forward_boundaries(
            env, route, theta, prev_t, alpha=alpha, size_bits=size_bits,
            mode=mode, bw_profile=bw_profile,
        )
        return t, t[-1]

    iterations = 0
    hi = THETA_SEED
    t_hi, tm = last_boundary(hi)
    iterations += 1
    while tm > horizon and hi < theta_cap:
        hi = min(hi * 2.0, theta_cap)
        t_hi, tm = last_boundary(hi)
        iterations += 1
    if tm > horizon:
        return BoundarySolution(t_hi, np.inf, iterations, False)
    lo = 0.0
    while hi - lo > tol_theta * hi:
        mid = 0.5 * (lo + hi)
        t_mid, tm = last_boundary(mid)
        iterations += 1
        if tm <= horizon:
            hi = mid
            t_hi = t_mid
        else:
            lo = mid
        if iterations > 400:
            break
    return BoundarySolution(t_hi, hi, iterations, True)

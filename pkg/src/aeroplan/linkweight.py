"""Single-hop leakage optimization.

For one hop (tx -> rx over [t_start, t_end) carrying S bits) the optimal
policy transmits at the largest power the leakage budget allows,
p(t) = theta / max_j h_j(t), and the minimum worst-case leakage theta is the
root of the strictly increasing throughput functional

    Upsilon(theta) = integral_a^b  l(t) * B * E[log2(1 + theta*h_tx / (max_j h_j * delta2))] dt

against the data size S.  Expectations are evaluated with one of the
deterministic capacity expressions from `radiomap` (or Monte Carlo for the
test oracle).  Everything here is pure given a prebuilt LinkEnvironment, so
hops can be solved in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import radiomap
from .radiomap import FGammaTable, epsilon_gap
from .scenario import Scenario

THETA_SEED = 1e-6  # bracket growth starts at 1 microwatt
THETA_CAP = 1e6  # leakage above this is treated as infeasible
P_MAX = 1e3  # power cap, used only on degenerate zero-gain samples
GAIN_FLOOR = 1e-30  # keeps weights finite when a node momentarily sees no neighbor

BOUND_MODES = ("lower", "approx1", "approx2", "mc")


@dataclass(frozen=True)
class HopSpec:
    tx: int
    rx: int
    t_start: float
    t_end: float
    size_bits: float
    bandwidth_scale: float = 1.0

    def __post_init__(self):
        if self.t_end < self.t_start:
            raise ValueError("hop interval must be ordered")
        if self.size_bits < 0:
            raise ValueError("data size must be non-negative")
        if not 0.0 <= self.bandwidth_scale <= 1.0:
            raise ValueError("bandwidth_scale must lie in [0, 1]")


@dataclass(frozen=True)
class LinkWeight:
    theta: float
    feasible: bool
    bound_mode: str
    interference_free: bool = False


class LinkEnvironment:
    """Precompiled channel data for every ordered link of a scenario.

    gains[(m, n)] is the expected-gain series on the shared grid for
    m in the aerial set and n in aerial + neighbor sets; kappas[(m, n)] the
    per-link Gamma shape.  Per transmit node the worst-neighbor denominators
    (max_j g_j + alpha*omega)*delta2 are cached for both alpha variants.
    """

    def __init__(
        self,
        dt,
        bandwidth,
        delta2,
        horizon,
        aerial_ids,
        neighbor_ids,
        gains,
        kappas,
        table: FGammaTable | None = None,
        bound_mode="approx2",
        seed=0,
    ):
        if bound_mode not in BOUND_MODES:
            raise ValueError(f"unknown bound mode {bound_mode!r}")
        self.dt = float(dt)
        self.bandwidth = float(bandwidth)
        self.delta2 = float(delta2)
        self.horizon = float(horizon)
        self.aerial_ids = list(aerial_ids)
        self.neighbor_ids = list(neighbor_ids)
        self.gains = {k: np.asarray(v, dtype=float) for k, v in gains.items()}
        self.kappas = dict(kappas)
        self.table = table
        self.bound_mode = bound_mode
        self.seed = seed
        self.mc_samples = 20000

        self.n_cells = len(next(iter(self.gains.values())))
        self.span = self.n_cells * self.dt
        self.times = np.arange(self.n_cells) * self.dt

        # worst-neighbor denominators per transmit node, both alpha variants
        self._denom = {}
        for m in self.aerial_ids:
            cols = [self.gains[(m, j)] for j in self.neighbor_ids]
            ks = np.array([self.kappas[(m, j)] for j in self.neighbor_ids])
            if cols:
                gmat = np.stack(cols, axis=0)
                gmax = np.maximum(gmat.max(axis=0), GAIN_FLOOR)
                omega = np.sqrt(np.sum(gmat**2 / ks[:, None], axis=0))
            else:
                gmax = np.full(self.n_cells, GAIN_FLOOR)
                omega = np.zeros(self.n_cells)
            self._denom[m] = {
                1.0: (gmax + omega) * self.delta2,
                0.5: (gmax + 0.5 * omega) * self.delta2,
            }
        self._neighbor_kappas = {
            m: np.array([self.kappas[(m, j)] for j in self.neighbor_ids])
            for m in self.aerial_ids
        }

        # per-pair SNR-per-watt profiles q(t) = g_tx / denom
        self._q = {}
        self._frow = {}
        for m in self.aerial_ids:
            for n in self.aerial_ids:
                if m == n:
                    continue
                g = self.gains[(m, n)]
                self._q[(m, n, 1.0)] = g / self._denom[m][1.0]
                self._q[(m, n, 0.5)] = g / self._denom[m][0.5]
                if self.table is not None:
                    self._frow[(m, n)] = self.table._rows_for_kappa(self.kappas[(m, n)])

    # -- grid helpers --------------------------------------------------------

    def cell_of(self, t):
        return int(np.clip(np.floor(t / self.dt), 0, self.n_cells - 1))

    def neighbor_gain_matrix(self, m, cells=slice(None)):
        """(J, cells) expected gains from tx m to every protected neighbor."""
        return np.stack([self.gains[(m, j)][cells] for j in self.neighbor_ids], axis=0)

    # -- capacity evaluation ---------------------------------------------------

    def capacity_density(self, m, n, theta, mode=None, cells=slice(None)):
        """Per-cell expected capacity (bits/s/Hz) of link m->n at leakage theta."""
        mode = mode or self.bound_mode
        kappa = self.kappas[(m, n)]
        if mode == "lower" or mode == "approx1":
            alpha = 1.0 if mode == "lower" else 0.5
            q = self._q[(m, n, alpha)][cells]
            c = np.log2(1.0 + theta * q) - epsilon_gap(kappa)
            return np.maximum(c, 0.0)
        if mode == "approx2":
            if self.table is None:
                raise ValueError("approx2 mode requires an FGammaTable")
            q = self._q[(m, n, 0.5)][cells]
            gam = theta * q
            out = np.zeros_like(gam)
            pos = gam > 0
            if np.any(pos):
                lg = np.log10(gam[pos])
                out[pos] = self.table.interp_log_gamma(self._frow[(m, n)], lg, kappa)
            return out
        if mode == "mc":
            return self._capacity_density_mc(m, n, theta, cells)
        raise ValueError(f"unknown bound mode {mode!r}")

    def _capacity_density_mc(self, m, n, theta, cells, n_samples=None):
        """Monte Carlo per-cell capacity; test oracle, deliberately direct."""
        n_samples = n_samples or self.mc_samples
        g_tx = self.gains[(m, n)][cells]
        gmat = self.neighbor_gain_matrix(m, cells)
        ks = self._neighbor_kappas[m]
        kappa_tx = min(self.kappas[(m, n)], radiomap.KAPPA_CAP)
        rng = np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(m, n, 7))
        )
        n_cells = g_tx.shape[0]
        out = np.empty(n_cells)
        chunk = max(1, int(2e6 // max(1, n_samples)))
        for s in range(0, n_cells, chunk):
            e = min(n_cells, s + chunk)
            xi_tx = rng.gamma(kappa_tx, 1.0 / kappa_tx, size=(n_samples, e - s))
            h_tx = g_tx[s:e] * xi_tx
            h_max = np.zeros((n_samples, e - s))
            for j in range(gmat.shape[0]):
                kj = min(ks[j], radiomap.KAPPA_CAP)
                xi_j = rng.gamma(kj, 1.0 / kj, size=(n_samples, e - s))
                np.maximum(h_max, gmat[j, s:e] * xi_j, out=h_max)
            h_max = np.maximum(h_max, GAIN_FLOOR)
            out[s:e] = np.mean(
                np.log2(1.0 + theta * h_tx / (h_max * self.delta2)), axis=0
            )
        return out


def build_environment(
    scenario: Scenario, bound_mode="approx2", table=None, span=None
) -> LinkEnvironment:
    """Realize the radio map for every ordered link and compile it."""
    if bound_mode == "approx2" and table is None:
        table = FGammaTable.load_or_build()
    aerial = scenario.aerial_ids
    neighbors = scenario.neighbor_ids
    gains, kappas = {}, {}
    for m in aerial:
        for n in aerial + neighbors:
            if m == n:
                continue
            stats = radiomap.eval_radio_map(scenario, m, n, span=span)
            gains[(m, n)] = stats.g
            kappas[(m, n)] = stats.kappa
    return LinkEnvironment(
        dt=scenario.dt,
        bandwidth=scenario.channel.bandwidth,
        delta2=scenario.channel.noise_power,
        horizon=scenario.horizon,
        aerial_ids=aerial,
        neighbor_ids=neighbors,
        gains=gains,
        kappas=kappas,
        table=table,
        bound_mode=bound_mode,
        seed=scenario.seed,
    )


def _bw_cells(bw_profile, cells):
    if bw_profile is None:
        return 1.0
    if np.isscalar(bw_profile):
        return float(bw_profile)
    return np.asarray(bw_profile)[cells]


def upsilon(env: LinkEnvironment, hop: HopSpec, theta, mode=None, bw_profile=None):
    """Expected deliverable bits over the hop interval at leakage theta.

    Riemann sum over the shared grid with piecewise-constant cells and
    pro-rata fractional end cells, so the result is continuous and strictly
    increasing in both theta and t_end wherever the link has gain.
    """
    if hop.tx == hop.rx:
        return 0.0
    a = max(0.0, hop.t_start)
    b = min(hop.t_end, env.span)
    if b <= a or theta <= 0.0:
        return 0.0
    i0 = env.cell_of(a)
    i1 = env.cell_of(b - 1e-12)
    cells = slice(i0, i1 + 1)
    c = env.capacity_density(hop.tx, hop.rx, theta, mode, cells)
    rate = c * env.bandwidth * hop.bandwidth_scale * _bw_cells(bw_profile, cells)
    # cell widths, with fractional first/last cells
    widths = np.full(i1 - i0 + 1, env.dt)
    widths[0] -= a - i0 * env.dt
    widths[-1] -= (i1 + 1) * env.dt - b
    if i0 == i1:
        widths[0] = b - a
    return float(np.dot(rate, widths))


def solve_hop_end(env, tx, rx, theta, t_start, size_bits, mode=None, bw_profile=None,
                  bandwidth_scale=1.0, cap=None):
    """Smallest t_end with Upsilon(theta; t_start, t_end) = size_bits.

    Exploits the piecewise-linear cumulative throughput: one vectorized pass
    plus a searchsorted, instead of an inner bisection.  Returns +inf when
    the hop cannot deliver the data by `cap`.
    """
    if size_bits <= 0.0:
        return t_start
    if tx == rx:
        return np.inf
    cap = env.span if cap is None else min(cap, env.span)
    if theta <= 0.0 or t_start >= cap:
        return np.inf
    i0 = env.cell_of(t_start)
    i1 = env.cell_of(cap - 1e-12)
    cells = slice(i0, i1 + 1)
    c = env.capacity_density(tx, rx, theta, mode, cells)
    rate = c * env.bandwidth * bandwidth_scale * _bw_cells(bw_profile, cells)
    widths = np.full(i1 - i0 + 1, env.dt)
    widths[0] -= t_start - i0 * env.dt
    widths[-1] -= (i1 + 1) * env.dt - cap
    contrib = rate * widths
    cum = np.cumsum(contrib)
    if cum[-1] < size_bits:
        return np.inf
    k = int(np.searchsorted(cum, size_bits))
    prev = cum[k - 1] if k > 0 else 0.0
    need = size_bits - prev
    if rate[k] <= 0.0:
        # target falls exactly on a cell edge followed by dead cells
        return (i0 + k) * env.dt
    cell_start = t_start if k == 0 else (i0 + k) * env.dt
    return float(cell_start + need / rate[k])


def solve_p1(env: LinkEnvironment, hop: HopSpec, tol_bits=None, mode=None,
             bw_profile=None) -> LinkWeight:
    """Minimum worst-case leakage delivering the hop's data: bisection on the
    strictly increasing Upsilon(theta) = S.

    Virtual hops (tx == rx) cost exactly zero.  Infeasibility (cap reached
    with Upsilon short of S) is encoded in the flag, never raised.
    """
    mode = mode or env.bound_mode
    if hop.tx == hop.rx or hop.size_bits <= 0.0:
        return LinkWeight(0.0, True, mode)
    if tol_bits is None:
        tol_bits = max(1.0, 1e-6 * hop.size_bits)

    def f(theta):
        return upsilon(env, hop, theta, mode, bw_profile)

    hi = THETA_SEED
    val = f(hi)
    while val < hop.size_bits and hi < THETA_CAP:
        hi = min(hi * 2.0, THETA_CAP)
        val = f(hi)
    if val < hop.size_bits:
        return LinkWeight(THETA_CAP, False, mode)
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = f(mid)
        if abs(v - hop.size_bits) <= tol_bits:
            return LinkWeight(mid, True, mode)
        if v < hop.size_bits:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return LinkWeight(hi, True, mode)


def power_policy(theta, neighbor_gains):
    """Optimal transmit power: theta / max_j h_j, so the instantaneous
    worst-case interference equals theta exactly.  Gains may be scalars or
    arrays (policy applied samplewise)."""
    if theta < 0:
        raise ValueError("leakage level must be non-negative")
    g = np.max(np.asarray(neighbor_gains, dtype=float), axis=0)
    scalar = np.ndim(g) == 0
    g = np.atleast_1d(g).astype(float)
    if theta == 0.0:
        p = np.zeros_like(g)
    else:
        p = np.where(g > 0.0, theta / np.where(g > 0.0, g, 1.0), P_MAX)
    return float(p[0]) if scalar else p


def upsilon_mc(env: LinkEnvironment, hop: HopSpec, theta, n_samples=20000,
               bw_profile=None):
    """Monte Carlo Upsilon used as the independent oracle in tests."""
    return upsilon(env, hop, theta, mode="mc", bw_profile=bw_profile)

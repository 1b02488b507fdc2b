"""Radio map: large-scale channel statistics and capacity bound evaluation.

The map takes a transmitter/receiver position pair and returns the expected
channel power gain g and the Gamma fading shape kappa.  Large-scale effects
(path loss, LOS/NLOS blocking, correlated shadowing) are realized once per
scenario from the scenario seed and treated as known by the planner; only the
small-scale Gamma fading remains random at replay time.

Also provides the deterministic capacity expressions used to evaluate
expected throughput without Monte Carlo:
  * closed-form lower bound (alpha = 1) and its tightened variant (alpha = 1/2),
  * a tabulated E[log2(1 + gamma*xi)] lookup for Gamma fading (the tightest
    tractable expression, built offline and cached to disk),
  * a Monte Carlo estimator kept as the test oracle.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scenario import Scenario

KAPPA_CAP = 1e6  # beyond this the fading is treated as deterministic
LOG2E = np.log2(np.e)

GAMMA_GRID_DECADES = (-4.0, 8.0)
GAMMA_GRID_POINTS = 121
KAPPA_GRID = tuple(float(k) for k in range(1, 61)) + (KAPPA_CAP,)
TABLE_MC_SAMPLES = 1_000_000
TABLE_SEED = 20240917


class InterferenceFreeLinkError(ValueError):
    """Raised when every protected neighbor has zero gain: the interference
    constraint is vacuous and the link weight degenerates to zero."""


@dataclass
class LinkStats:
    """Per-link time series of (expected gain, Gamma shape) on a uniform grid.

    g[i] applies on the cell [t[i], t[i] + dt).  kappa is held constant per
    link over the horizon (one radio-map draw per link).
    """

    t: np.ndarray
    dt: float
    g: np.ndarray
    kappa: float

    def __post_init__(self):
        if np.any(self.g < 0):
            raise ValueError("expected gains must be non-negative")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")

    def gain_at(self, time):
        idx = np.clip((np.asarray(time) / self.dt).astype(int), 0, len(self.g) - 1)
        return self.g[idx]


def _link_rng(seed, m, n, purpose):
    """Independent stream per (link, purpose); order of evaluation never
    affects the draw, which keeps parallel scenario builds deterministic."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(m, n, purpose)))


def _pathloss_db(coeffs, dist_m, f_c):
    a, b, c = coeffs
    return a + b * np.log10(dist_m) + c * np.log10(f_c)


def _los_probability(theta_deg, los_prob):
    scale, rate, offset = los_prob
    return 1.0 / (1.0 + scale * np.exp(-rate * (theta_deg - offset)))


def eval_radio_map(scenario: Scenario, m: int, n: int, span: float | None = None) -> LinkStats:
    """Realize the radio-map output for the ordered link m -> n.

    The grid covers [0, span) where span defaults to 4x the horizon: the
    boundary optimizer probes boundaries past the deadline while bisecting,
    so the map has to extend beyond T.
    """
    if m == n:
        raise ValueError("radio map is defined for distinct node pairs")
    ch = scenario.channel
    dt = scenario.dt
    if span is None:
        span = 4.0 * scenario.horizon
    n_cells = max(1, int(round(span / dt)))
    t = np.arange(n_cells) * dt

    pos_m = scenario.node(m).trajectory.position(t)
    pos_n = scenario.node(n).trajectory.position(t)
    delta = pos_n - pos_m
    dist = np.linalg.norm(delta, axis=-1)
    dist = np.maximum(dist, 1.0)  # co-located nodes: clamp, never a singularity
    elev = np.degrees(np.arcsin(np.clip(np.abs(delta[:, 2]) / dist, -1.0, 1.0)))

    # LOS/NLOS state per 1 s segment, held constant within the segment
    rng_los = _link_rng(scenario.seed, m, n, 1)
    seg = (t // 1.0).astype(int)
    n_seg = seg[-1] + 1
    seg_mid_idx = np.minimum(
        ((np.arange(n_seg) + 0.5) / dt).astype(int), n_cells - 1
    )
    p_los = _los_probability(elev[seg_mid_idx], ch.los_prob)
    los_state = rng_los.random(n_seg) < p_los
    los = los_state[seg]

    pl = np.where(
        los,
        _pathloss_db(ch.pathloss_los, dist, ch.carrier_freq),
        _pathloss_db(ch.pathloss_nlos, dist, ch.carrier_freq),
    )

    shadow = _shadowing_db(scenario, m, n, pos_m, pos_n)
    g = 10.0 ** (-(pl + shadow) / 10.0)

    rng_kappa = _link_rng(scenario.seed, m, n, 0)
    lo, hi = (
        ch.kappa_air_air if scenario.is_aerial_link(m, n) else ch.kappa_air_ground
    )
    kappa = float(rng_kappa.uniform(lo, hi))
    return LinkStats(t=t, dt=dt, g=g, kappa=kappa)


def _shadowing_db(scenario, m, n, pos_m, pos_n):
    """Correlated log-normal shadowing along the link (Gudmundson model).

    Gauss-Markov over *traversed* distance: the correlation between two grid
    points decays as exp(-d/d_corr) where d sums the displacement of both
    endpoints.  Exact for the exponential kernel, O(n) to sample.
    """
    mean_db, var_db, d_corr = scenario.channel.shadow
    n_cells = pos_m.shape[0]
    if var_db == 0.0:
        return np.full(n_cells, mean_db)
    sigma = np.sqrt(var_db)
    step = np.linalg.norm(np.diff(pos_m, axis=0), axis=-1) + np.linalg.norm(
        np.diff(pos_n, axis=0), axis=-1
    )
    rng = _link_rng(scenario.seed, m, n, 2)
    eps = rng.standard_normal(n_cells)
    x = np.empty(n_cells)
    x[0] = sigma * eps[0]
    if d_corr <= 0:
        return mean_db + sigma * eps
    rho = np.exp(-step / d_corr)
    fresh = np.sqrt(1.0 - rho**2)
    for i in range(1, n_cells):
        x[i] = rho[i - 1] * x[i - 1] + fresh[i - 1] * sigma * eps[i]
    return mean_db + x


def sample_channel(stats: LinkStats, t: float, rng: np.random.Generator) -> float:
    """One instantaneous power gain draw g(t) * xi, xi ~ Gamma(kappa, 1/kappa)."""
    g = float(stats.gain_at(t))
    if g == 0.0:
        return 0.0
    kappa = min(stats.kappa, KAPPA_CAP)
    return g * rng.gamma(kappa, 1.0 / kappa)


def epsilon_gap(kappa):
    """Fading penalty of the closed-form capacity bound; -> 0 as kappa -> inf."""
    kappa = np.minimum(np.asarray(kappa, dtype=float), KAPPA_CAP)
    return LOG2E / kappa - np.log2(1.0 + 0.5 / kappa)


def _interference_margin(neighbor_gains):
    """(max_j g_j, omega) with omega = sqrt(sum_j g_j^2 / kappa_j)."""
    gains = np.array([g for g, _ in neighbor_gains], dtype=float)
    kappas = np.array([k for _, k in neighbor_gains], dtype=float)
    if gains.size == 0 or np.all(gains == 0.0):
        raise InterferenceFreeLinkError(
            "all neighbor gains are zero: interference-free link"
        )
    omega = np.sqrt(np.sum(gains**2 / kappas))
    return float(np.max(gains)), float(omega)


def capacity_lower_bound(theta, g_tx, kappa_tx, neighbor_gains, delta2, alpha=1.0):
    """Deterministic lower bound on E[log2(1 + theta*h_tx / (max_j h_j * delta2))].

    alpha = 1 is the provable bound; alpha = 1/2 is the tightened variant that
    empirically remains a bound.  Clamped below at zero (a capacity).
    """
    if theta < 0:
        raise ValueError("leakage level must be non-negative")
    g_max, omega = _interference_margin(neighbor_gains)
    snr = theta * g_tx / ((g_max + alpha * omega) * delta2)
    val = np.log2(1.0 + snr) - epsilon_gap(kappa_tx)
    return float(max(0.0, val))


def expected_capacity_mc(theta, g_tx, kappa_tx, neighbor_gains, delta2, n_samples, rng):
    """Monte Carlo estimate of E[log2(1 + theta*h_tx / (max_j h_j * delta2))].

    Joint draws over the transmit link and every neighbor link.  This is the
    reference the deterministic bounds are tested against.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if theta == 0.0 or g_tx == 0.0:
        return 0.0
    kappa_tx = min(kappa_tx, KAPPA_CAP)
    h_tx = g_tx * rng.gamma(kappa_tx, 1.0 / kappa_tx, size=n_samples)
    h_max = np.zeros(n_samples)
    for g_j, kappa_j in neighbor_gains:
        if g_j == 0.0:
            continue
        kj = min(kappa_j, KAPPA_CAP)
        np.maximum(h_max, g_j * rng.gamma(kj, 1.0 / kj, size=n_samples), out=h_max)
    if np.all(h_max == 0.0):
        raise InterferenceFreeLinkError(
            "all neighbor gains are zero: interference-free link"
        )
    return float(np.mean(np.log2(1.0 + theta * h_tx / (h_max * delta2))))


# ---------------------------------------------------------------------------
# Tabulated f(gamma; kappa) = E[log2(1 + gamma*xi)], xi ~ Gamma(kappa, 1/kappa)
# ---------------------------------------------------------------------------


def _default_cache_dir() -> Path:
    env = os.environ.get("AEROPLAN_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "aeroplan"


class FGammaTable:
    """Offline table of the fading-averaged capacity f(gamma; kappa).

    Grid: gamma log-spaced over 12 decades (121 points), kappa in {1..60,
    KAPPA_CAP}.  Each entry is a 1e6-sample Monte Carlo mean, computed once
    and cached to disk keyed by a hash of the grid parameters.  Lookup is
    bilinear in (log10 gamma, kappa); queries outside the gamma range fall
    back to the alpha=1/2 closed form and are counted in `extrapolations`.
    """

    def __init__(self, log_gamma, kappas, values):
        self.log_gamma = np.asarray(log_gamma, dtype=float)
        self.kappas = np.asarray(kappas, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.extrapolations = 0
        if self.values.shape != (len(self.kappas), len(self.log_gamma)):
            raise ValueError("table shape mismatch")

    # -- construction -------------------------------------------------------

    @staticmethod
    def _grid_key(n_samples, seed):
        h = hashlib.sha1()
        h.update(np.array(GAMMA_GRID_DECADES).tobytes())
        h.update(np.int64(GAMMA_GRID_POINTS).tobytes())
        h.update(np.array(KAPPA_GRID).tobytes())
        h.update(np.int64(n_samples).tobytes())
        h.update(np.int64(seed).tobytes())
        return h.hexdigest()[:16]

    @classmethod
    def build(cls, n_samples=TABLE_MC_SAMPLES, seed=TABLE_SEED, progress=False):
        lo, hi = GAMMA_GRID_DECADES
        log_gamma = np.linspace(lo, hi, GAMMA_GRID_POINTS)
        gamma = 10.0**log_gamma
        kappas = np.array(KAPPA_GRID)
        values = np.empty((len(kappas), len(gamma)))
        rng = np.random.default_rng(seed)
        for ki, kappa in enumerate(kappas):
            xi = rng.gamma(kappa, 1.0 / kappa, size=n_samples)
            for gi, gam in enumerate(gamma):
                values[ki, gi] = np.mean(np.log1p(gam * xi)) / np.log(2.0)
            if progress:
                print(f"fgamma table: kappa={kappa:g} done", flush=True)
        return cls(log_gamma, kappas, values)

    @classmethod
    def load_or_build(cls, cache_dir=None, n_samples=TABLE_MC_SAMPLES, seed=TABLE_SEED):
        cache_dir = Path(cache_dir) if cache_dir else _default_cache_dir()
        key = cls._grid_key(n_samples, seed)
        path = cache_dir / f"fgamma_{key}.npz"
        if path.exists():
            data = np.load(path)
            return cls(data["log_gamma"], data["kappas"], data["values"])
        table = cls.build(n_samples=n_samples, seed=seed)
        cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, log_gamma=table.log_gamma, kappas=table.kappas, values=table.values)
        os.replace(tmp, path)
        return table

    # -- lookup -------------------------------------------------------------

    def _rows_for_kappa(self, kappa):
        """Blend the two bracketing kappa rows into one gamma profile."""
        kappa = float(min(kappa, KAPPA_CAP))
        ks = self.kappas
        if kappa <= ks[0]:
            return self.values[0]
        if kappa >= ks[-1]:
            return self.values[-1]
        if kappa >= ks[-2]:
            # between the last finite shape and the deterministic cap:
            # interpolate in 1/kappa, the natural small-fluctuation coordinate
            w = (1.0 / ks[-2] - 1.0 / kappa) / (1.0 / ks[-2] - 1.0 / ks[-1])
            return (1.0 - w) * self.values[-2] + w * self.values[-1]
        idx = int(np.searchsorted(ks, kappa, side="right")) - 1
        w = (kappa - ks[idx]) / (ks[idx + 1] - ks[idx])
        return (1.0 - w) * self.values[idx] + w * self.values[idx + 1]

    def lookup(self, gamma, kappa):
        """f(gamma; kappa) by bilinear interpolation; scalar or array gamma."""
        row = self._rows_for_kappa(kappa)
        gamma = np.asarray(gamma, dtype=float)
        scalar = gamma.ndim == 0
        gamma = np.atleast_1d(gamma)
        out = np.zeros_like(gamma)
        pos = gamma > 0
        lg = np.full_like(gamma, -np.inf)
        lg[pos] = np.log10(gamma[pos])
        inside = pos & (lg >= self.log_gamma[0]) & (lg <= self.log_gamma[-1])
        out[inside] = np.interp(lg[inside], self.log_gamma, row)
        outside = pos & ~inside
        if np.any(outside):
            self.extrapolations += int(np.count_nonzero(outside))
            eps = epsilon_gap(kappa)
            out[outside] = np.maximum(0.0, np.log2(1.0 + gamma[outside]) - eps)
        return float(out[0]) if scalar else out

    def interp_log_gamma(self, row, log_gamma_q, kappa):
        """Fast path for a precomputed row: interp on log10 gamma with the
        closed-form extension outside the grid."""
        out = np.interp(log_gamma_q, self.log_gamma, row)
        oob_hi = log_gamma_q > self.log_gamma[-1]
        oob_lo = log_gamma_q < self.log_gamma[0]
        if np.any(oob_hi) or np.any(oob_lo):
            self.extrapolations += int(np.count_nonzero(oob_hi) + np.count_nonzero(oob_lo))
            eps = epsilon_gap(kappa)
            for mask in (oob_lo, oob_hi):
                if np.any(mask):
                    out[mask] = np.maximum(
                        0.0, np.log2(1.0 + 10.0 ** log_gamma_q[mask]) - eps
                    )
        return out


def capacity_approx_ii(theta, g_tx, kappa_tx, neighbor_gains, delta2, table: FGammaTable):
    """Tightest tractable capacity expression: table lookup of f(gamma; kappa)
    at gamma = theta*g_tx / ((max_j g_j + omega/2) * delta2)."""
    if theta < 0:
        raise ValueError("leakage level must be non-negative")
    if theta == 0.0 or g_tx == 0.0:
        return 0.0
    g_max, omega = _interference_margin(neighbor_gains)
    gamma = theta * g_tx / ((g_max + 0.5 * omega) * delta2)
    return float(table.lookup(gamma, kappa_tx))

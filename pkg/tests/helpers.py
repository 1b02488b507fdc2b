"""Shared builders for synthetic link environments used across tests."""

import numpy as np

from aeroplan.linkweight import LinkEnvironment
from aeroplan.radiomap import KAPPA_CAP

DELTA2 = 1e-12
BANDWIDTH = 10e6


def constant_env(n_nodes=3, n_neighbors=1, horizon=10.0, dt=0.05, span_mult=4,
                 gain_tx=1e-10, gain_nb=1e-10, kappa_tx=KAPPA_CAP,
                 kappa_nb=KAPPA_CAP, mode="approx1", table=None,
                 gains=None, kappas=None):
    """Environment with constant gains everywhere unless overridden.

    With the defaults the per-watt SNR of every aerial link is
    q = gain_tx / (gain_nb * DELTA2) up to the omega margin.
    """
    n_cells = int(round(span_mult * horizon / dt))
    aerial = list(range(1, n_nodes + 1))
    neighbors = list(range(101, 101 + n_neighbors))
    g, k = {}, {}
    for m in aerial:
        for n in aerial:
            if m != n:
                g[(m, n)] = np.full(n_cells, gain_tx)
                k[(m, n)] = kappa_tx
        for j in neighbors:
            g[(m, j)] = np.full(n_cells, gain_nb)
            k[(m, j)] = kappa_nb
    if gains:
        for key, val in gains.items():
            g[key] = np.full(n_cells, val) if np.isscalar(val) else np.asarray(val, float)
    if kappas:
        k.update(kappas)
    return LinkEnvironment(
        dt=dt, bandwidth=BANDWIDTH, delta2=DELTA2, horizon=horizon,
        aerial_ids=aerial, neighbor_ids=neighbors, gains=g, kappas=k,
        table=table, bound_mode=mode,
    )


def wavy_profile(rng, n_cells, base=1e-10, spread_db=25.0):
    """Smooth random gain profile spanning a few tens of dB."""
    t = np.linspace(0.0, 1.0, n_cells)
    x = np.zeros(n_cells)
    for _ in range(3):
        x += np.sin(2 * np.pi * rng.uniform(0.5, 3.0) * t + rng.uniform(0, 2 * np.pi))
    x *= spread_db / 6.0
    return base * 10.0 ** (x / 10.0)


def random_env(rng, n_nodes=3, n_neighbors=2, horizon=10.0, dt=0.05,
               kappa_range=(1.0, 60.0), mode="approx1", table=None,
               span_mult=4, equal_neighbor_gains=False):
    """Randomized fading environment with smooth time-varying gains."""
    n_cells = int(round(span_mult * horizon / dt))
    aerial = list(range(1, n_nodes + 1))
    neighbors = list(range(101, 101 + n_neighbors))
    g, k = {}, {}
    for m in aerial:
        for n in aerial:
            if m != n:
                g[(m, n)] = wavy_profile(rng, n_cells)
                k[(m, n)] = float(rng.uniform(*kappa_range))
        nb_profile = wavy_profile(rng, n_cells)
        nb_kappa = float(rng.uniform(*kappa_range))
        for j in neighbors:
            if equal_neighbor_gains:
                g[(m, j)] = nb_profile.copy()
                k[(m, j)] = nb_kappa
            else:
                g[(m, j)] = wavy_profile(rng, n_cells)
                k[(m, j)] = float(rng.uniform(*kappa_range))
    return LinkEnvironment(
        dt=dt, bandwidth=BANDWIDTH, delta2=DELTA2, horizon=horizon,
        aerial_ids=aerial, neighbor_ids=neighbors, gains=g, kappas=k,
        table=table, bound_mode=mode,
    )

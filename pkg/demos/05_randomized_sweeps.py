"""Randomized sweeps: leakage vs deadline for all methods, as CSV.

Sweeps the deadline over three values with a handful of seeds and prints
per-cell mean leakage per method.  The same machinery backs the CLI's
`aeroplan sweep` subcommand; output is deterministic for fixed seeds
regardless of the worker-thread count (AEROPLAN_THREADS).

Run:  python demos/05_randomized_sweeps.py
"""

import io

import numpy as np

from aeroplan import SweepSpec, sweep

spec = SweepSpec(vary="T", values=[2.0, 5.0, 10.0], n_seeds=4,
                 methods=["proposed", "spacetime", "aggregate"],
                 base=dict(M=6, N=3, S_bits=2e7))
csv_text = sweep(spec)
print(csv_text)

rows = [line.split(",") for line in csv_text.strip().splitlines()[1:]]
print("mean leakage (dBm) by deadline and method:")
for value in spec.values:
    cells = {}
    for r in rows:
        if float(r[3]) == value and r[5] == "true":
            cells.setdefault(r[0], []).append(float(r[4]))
    summary = "  ".join(f"{m}: {np.mean(v):7.2f}" for m, v in sorted(cells.items()))
    print(f"  T = {value:4.1f} s   {summary}")

"""Monte Carlo replay: does the plan hold up against sampled fading?

Replays an accepted plan 200 times with fresh small-scale fading, applying
the leakage-capped power policy.  The delivered/planned ratio should have
median at least 1, and the worst instantaneous interference at any protected
node equals the plan's leakage level exactly (that is the policy identity).

Run:  python demos/03_replay_and_qos.py
"""

import numpy as np

from aeroplan import build_environment, generate_scenario, plan_single, replay
from aeroplan.scenario import watts_to_dbm

scenario = generate_scenario(seed=4, M=7, N=3, T=10.0, S_bits=50e6)
env = build_environment(scenario)
com = scenario.commodities[0]
plan = plan_single(env, com.src, com.dst, com.size_bits)
print(f"plan: route {plan.route.o}, leakage {watts_to_dbm(plan.theta):.2f} dBm")

report = replay(env, plan, seed=0, n_realizations=200)
ratios = report.end_to_end_ratio
print(f"\ndelivered/planned over 200 fading draws:")
print(f"  median {np.median(ratios):.3f}  mean {np.mean(ratios):.3f}  "
      f"min {np.min(ratios):.3f}  max {np.max(ratios):.3f}")
print(f"  per-hop medians: {np.round(np.median(report.hop_ratios, axis=0), 3)}")

print("\nworst instantaneous interference per protected node:")
for j, peak in sorted(report.max_interference.items()):
    print(f"  node {j}: {watts_to_dbm(peak):.6f} dBm "
          f"(plan leakage {watts_to_dbm(plan.theta):.6f} dBm)")

"""Interference-aware routing and predictive resource allocation for
dynamic low-altitude relay networks."""

from .boundary import BoundarySolution, forward_boundaries, optimize_boundaries
from .harness import (BoundGapResult, ReplayReport, SweepSpec,
                      bound_gap_experiment, generate_scenario, replay, sweep)
from .linkweight import (HopSpec, LinkEnvironment, LinkWeight,
                         build_environment, power_policy, solve_p1, upsilon)
from .multiflow import (MultiPlan, ResourceAllocation, allocate_resources,
                        feasibility_set_check, plan_multi)
from .planner import (Plan, baseline_aggregate, baseline_spacetime,
                      brute_force, plan_single)
from .radiomap import (FGammaTable, LinkStats, capacity_approx_ii,
                       capacity_lower_bound, epsilon_gap, eval_radio_map,
                       expected_capacity_mc, sample_channel)
from .scenario import (ChannelParams, Commodity, NodeSpec, Scenario,
                       Trajectory, scenario_from_json, scenario_to_json)
from .stgraph import Route, SpaceTimeGraph, bottleneck_path, build_graph

__version__ = "0.1.0"

"""Scenario description: node kinematics, channel parameters, transport tasks.

A scenario is the full planning input: who moves where, the large-scale
channel parameterization, the data-transport task(s), and the RNG seed that
makes everything downstream reproducible.  Positions are meters in a fixed
ENU-style frame, times are seconds, powers are linear watts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Trajectory:
    """Deterministic node motion over the planning horizon.

    kind:
      "static"         -- fixed at waypoints[0]
      "linear-shuttle" -- shuttles between waypoints[0] and waypoints[1] at
                          `speed`, dwelling `hover_time` at each endpoint
      "circular"       -- circles `center` at `radius` with tangential `speed`
    start_offset shifts the motion phase, so co-generated nodes desynchronize.
    """

    kind: str
    waypoints: tuple = ()
    center: tuple = (0.0, 0.0, 0.0)
    radius: float = 0.0
    speed: float = 0.0
    hover_time: float = 0.0
    start_offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("static", "linear-shuttle", "circular"):
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        if self.speed < 0 or self.hover_time < 0:
            raise ValueError("speed and hover_time must be non-negative")
        if self.kind == "linear-shuttle" and len(self.waypoints) != 2:
            raise ValueError("linear-shuttle needs exactly two waypoints")
        if self.kind == "static" and len(self.waypoints) != 1:
            raise ValueError("static trajectory needs one waypoint")
        if self.kind == "circular" and self.radius <= 0:
            raise ValueError("circular trajectory needs radius > 0")

    def position(self, t):
        """Position at time(s) t (scalar or array) -> (..., 3) array."""
        t = np.asarray(t, dtype=float)
        if self.kind == "static":
            p = np.asarray(self.waypoints[0], dtype=float)
            return np.broadcast_to(p, t.shape + (3,)).copy()
        if self.kind == "circular":
            omega = self.speed / self.radius
            phase = omega * (t + self.start_offset)
            c = np.asarray(self.center, dtype=float)
            out = np.empty(t.shape + (3,))
            out[..., 0] = c[0] + self.radius * np.cos(phase)
            out[..., 1] = c[1] + self.radius * np.sin(phase)
            out[..., 2] = c[2]
            return out
        # linear shuttle with endpoint dwell
        p0 = np.asarray(self.waypoints[0], dtype=float)
        p1 = np.asarray(self.waypoints[1], dtype=float)
        leg = np.linalg.norm(p1 - p0)
        if leg == 0.0 or self.speed == 0.0:
            return np.broadcast_to(p0, t.shape + (3,)).copy()
        t_leg = leg / self.speed
        period = 2.0 * (t_leg + self.hover_time)
        tau = np.mod(t + self.start_offset, period)
        # piecewise: go, dwell at far end, return, dwell at origin
        frac = np.zeros_like(tau)
        going = tau < t_leg
        frac[going] = tau[going] / t_leg
        at_far = (tau >= t_leg) & (tau < t_leg + self.hover_time)
        frac[at_far] = 1.0
        coming = (tau >= t_leg + self.hover_time) & (tau < 2 * t_leg + self.hover_time)
        frac[coming] = 1.0 - (tau[coming] - t_leg - self.hover_time) / t_leg
        # remaining: dwell at origin, frac stays 0
        return p0 + frac[..., None] * (p1 - p0)


@dataclass(frozen=True)
class ChannelParams:
    """Large-scale channel parameterization (3GPP-UMi-style defaults).

    Path-loss triples are (a, b, c) for a + b*log10(d_m) + c*log10(f_c) in dB.
    los_prob is (scale, rate, offset) in P(LOS) = 1/(1 + scale*exp(-rate*(theta - offset)))
    with theta the elevation angle in degrees.  shadow is (mean dB, variance dB^2,
    correlation distance m).  kappa intervals bound the Gamma fading shape.
    """

    carrier_freq: float = 3e9
    bandwidth: float = 10e6
    noise_power: float = 1e-12  # -90 dBm
    pathloss_los: tuple = (22.0, 28.0, 20.0)
    pathloss_nlos: tuple = (22.7, 36.7, 26.0)
    los_prob: tuple = (6.0, 0.15, 6.0)
    shadow: tuple = (0.0, 8.0, 5.0)
    kappa_air_ground: tuple = (1.0, 30.0)
    kappa_air_air: tuple = (30.0, 60.0)

    def __post_init__(self):
        if self.bandwidth <= 0 or self.noise_power <= 0:
            raise ValueError("bandwidth and noise power must be positive")
        if self.shadow[1] < 0:
            raise ValueError("shadow variance must be non-negative")
        for lo, hi in (self.kappa_air_ground, self.kappa_air_air):
            if lo <= 0 or hi < lo:
                raise ValueError("kappa intervals must be positive and ordered")


@dataclass(frozen=True)
class NodeSpec:
    id: int
    role: str  # source | cargo-uav | patrol-uav | destination | neighbor
    trajectory: Trajectory


@dataclass(frozen=True)
class Commodity:
    id: int
    src: int
    dst: int
    size_bits: float

    def __post_init__(self):
        if self.size_bits < 0:
            raise ValueError("commodity size must be non-negative")


@dataclass(frozen=True)
class Scenario:
    """Full planning input: nodes, channel, task, horizon, seed."""

    seed: int
    horizon: float
    nodes: tuple  # of NodeSpec, aerial network first, then neighbors
    channel: ChannelParams = field(default_factory=ChannelParams)
    commodities: tuple = ()
    dt: float = 0.05

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")

    @property
    def aerial_ids(self):
        return [n.id for n in self.nodes if n.role != "neighbor"]

    @property
    def neighbor_ids(self):
        return [n.id for n in self.nodes if n.role == "neighbor"]

    def node(self, node_id):
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(f"no node with id {node_id}")

    def is_aerial_link(self, m, n):
        """True when both ends are UAVs (air-to-air fading class)."""
        roles = (self.node(m).role, self.node(n).role)
        return all(r in ("cargo-uav", "patrol-uav") for r in roles)


def _traj_to_json(tr: Trajectory) -> dict:
    return {
        "kind": tr.kind,
        "waypoints": [list(w) for w in tr.waypoints],
        "center": list(tr.center),
        "radius": tr.radius,
        "speed": tr.speed,
        "hover_time": tr.hover_time,
        "start_offset": tr.start_offset,
    }


def _traj_from_json(d: dict) -> Trajectory:
    return Trajectory(
        kind=d["kind"],
        waypoints=tuple(tuple(w) for w in d.get("waypoints", [])),
        center=tuple(d.get("center", (0.0, 0.0, 0.0))),
        radius=d.get("radius", 0.0),
        speed=d.get("speed", 0.0),
        hover_time=d.get("hover_time", 0.0),
        start_offset=d.get("start_offset", 0.0),
    )


def scenario_to_json(sc: Scenario) -> str:
    doc = {
        "seed": sc.seed,
        "horizon_s": sc.horizon,
        "dt_s": sc.dt,
        "channel": {
            "carrier_freq_hz": sc.channel.carrier_freq,
            "bandwidth_hz": sc.channel.bandwidth,
            "noise_power_w": sc.channel.noise_power,
            "pathloss_los": list(sc.channel.pathloss_los),
            "pathloss_nlos": list(sc.channel.pathloss_nlos),
            "los_prob": list(sc.channel.los_prob),
            "shadow": list(sc.channel.shadow),
            "kappa_air_ground": list(sc.channel.kappa_air_ground),
            "kappa_air_air": list(sc.channel.kappa_air_air),
        },
        "nodes": [
            {"id": n.id, "role": n.role, "trajectory": _traj_to_json(n.trajectory)}
            for n in sc.nodes
        ],
        "task": {
            "commodities": [
                {"id": c.id, "src": c.src, "dst": c.dst, "S_bits": c.size_bits}
                for c in sc.commodities
            ]
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def scenario_from_json(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"invalid scenario JSON: {e}") from e
    try:
        ch = doc["channel"]
        params = ChannelParams(
            carrier_freq=ch["carrier_freq_hz"],
            bandwidth=ch["bandwidth_hz"],
            noise_power=ch["noise_power_w"],
            pathloss_los=tuple(ch["pathloss_los"]),
            pathloss_nlos=tuple(ch["pathloss_nlos"]),
            los_prob=tuple(ch["los_prob"]),
            shadow=tuple(ch["shadow"]),
            kappa_air_ground=tuple(ch["kappa_air_ground"]),
            kappa_air_air=tuple(ch["kappa_air_air"]),
        )
        nodes = tuple(
            NodeSpec(id=n["id"], role=n["role"], trajectory=_traj_from_json(n["trajectory"]))
            for n in doc["nodes"]
        )
        commodities = tuple(
            Commodity(id=c["id"], src=c["src"], dst=c["dst"], size_bits=c["S_bits"])
            for c in doc["task"]["commodities"]
        )
        return Scenario(
            seed=int(doc["seed"]),
            horizon=float(doc["horizon_s"]),
            nodes=nodes,
            channel=params,
            commodities=commodities,
            dt=float(doc.get("dt_s", 0.05)),
        )
    except (KeyError, TypeError) as e:
        raise ValueError(f"scenario JSON missing or malformed field: {e}") from e


def watts_to_dbm(p):
    """dBm appears only at I/O boundaries; internals stay linear."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(p / 1e-3)


def dbm_to_watts(dbm):
    return 1e-3 * 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)

"""The two model seats: joint routing/safety decision and local trajectory.

Both are adapter interfaces (a hosted VLM/VLA can fill either seat) with
deterministic reference implementations driven by the structured scene:

* RuleJointModel classifies a step as routine/complex and proceed/stop from
  the goal cue, traffic-light state, pedestrian proximity, and crowd density,
  with a confidence that drops 0.1 per ambiguity flag.
* ArcLocalPolicy emits a short constant-curvature arc toward the body-frame
  goal, swerving among sampled curvatures when a pedestrian is predicted too
  close to the nominal arc.

At desk scale the camera image is replaced by SceneDescription: a structured
rendering of exactly the cues the decision logic consumes. image_payload is
kept so a real vision adapter can receive actual frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

from .errors import DecisionModelFailure, PolicyFailure
from .geodesy import LocalPose, wrap_angle
from .route import Waypoint

ROUTINGS = ("routine", "complex")
ACTIONS = ("proceed", "stop_and_wait")

# Robot kinematic envelope (differential-drive base).
MAX_SPEED = 1.2  # m/s
MAX_YAW_RATE = 1.0  # rad/s

TRAJECTORY_HORIZON = 8
TRAJECTORY_SPACING_M = 0.5
MAX_CURVATURE = 1.0  # 1/m; heading change over the first point stays executable
CURVATURE_CANDIDATES = 64

CLEARANCE_HARD_M = 1.0  # arcs below this clearance are infeasible
CLEARANCE_SOFT_M = 1.5  # pedestrians inside this trigger the swerve search

STOP_PEDESTRIAN_M = 1.0
FLAG_PEDESTRIAN_M = 2.5
CROWD_COMPLEX = 3


@dataclass(frozen=True)
class PedestrianObs:
    position: tuple[float, float]  # local frame, meters
    velocity: tuple[float, float]  # m/s


@dataclass(frozen=True)
class TrafficLightObs:
    phase: str  # "red" | "green"
    distance_m: float


@dataclass(frozen=True)
class SceneDescription:
    pedestrians: tuple[PedestrianObs, ...]
    traffic_light: TrafficLightObs | None
    in_crossing_zone: bool
    crowd_density: int
    image_payload: bytes | None = None


@dataclass(frozen=True)
class Observation:
    """Everything one control step feeds the decision models."""

    scene: SceneDescription
    pose: LocalPose
    history: tuple[LocalPose, ...]
    goal: Waypoint
    instruction: str
    step: int


@dataclass(frozen=True)
class JointDecision:
    routing: str
    action: str
    conf: float
    reason: str

    def __post_init__(self):
        if self.routing not in ROUTINGS:
            raise ValueError(f"routing must be one of {ROUTINGS}, got {self.routing!r}")
        if self.action not in ACTIONS:
            raise ValueError(f"action must be one of {ACTIONS}, got {self.action!r}")
        if not (isinstance(self.conf, (int, float)) and math.isfinite(self.conf) and 0.0 <= self.conf <= 1.0):
            raise ValueError(f"conf must be in [0, 1], got {self.conf!r}")
        if not self.reason.strip():
            raise ValueError("reason must be non-empty")


@dataclass(frozen=True)
class Trajectory:
    """Short-horizon body-frame plan: x forward, y left, meters."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.points) < 1:
            raise ValueError("trajectory needs at least one point")
        first = math.hypot(*self.points[0])
        if first > MAX_SPEED * 0.5 + 1e-9:  # reachable within one 0.5 s control step
            raise ValueError(f"first trajectory point {first:.2f} m away is not reachable in one step")
        for a, b in zip(self.points, self.points[1:]):
            if math.dist(a, b) > 1.0 + 1e-9:
                raise ValueError("consecutive trajectory points must be within 1 m")

    @property
    def horizon(self) -> int:
        return len(self.points)


class JointDecisionModel(Protocol):
    def decide(self, obs: Observation) -> JointDecision:
        ...


class LocalPolicy(Protocol):
    def predict(self, obs: Observation) -> Trajectory:
        ...


def body_frame(obs: Observation, p: tuple[float, float]) -> tuple[float, float]:
    """Transform a local-frame point into the robot's egocentric frame."""
    dx = p[0] - obs.pose.x
    dy = p[1] - obs.pose.y
    c = math.cos(-obs.pose.yaw)
    s = math.sin(-obs.pose.yaw)
    return (c * dx - s * dy, s * dx + c * dy)


def body_to_local(pose: LocalPose, p: tuple[float, float]) -> tuple[float, float]:
    """Inverse of body_frame for a given pose."""
    c = math.cos(pose.yaw)
    s = math.sin(pose.yaw)
    return (pose.x + c * p[0] - s * p[1], pose.y + s * p[0] + c * p[1])


def _rotate(angle: float, v: tuple[float, float]) -> tuple[float, float]:
    c, s = math.cos(angle), math.sin(angle)
    return (c * v[0] - s * v[1], s * v[0] + c * v[1])


def nearest_pedestrian_m(obs: Observation) -> float | None:
    if not obs.scene.pedestrians:
        return None
    return min(math.dist(p.position, obs.pose.xy) for p in obs.scene.pedestrians)


class RuleJointModel:
    """Deterministic reference for the joint routing + safety decision.

    complex iff the goal carries a cue or the crowd is dense; stop-and-wait
    iff a red light governs a crossing-cue segment or a pedestrian is within
    1 m; conf = 1 minus 0.1 per ambiguity flag, floored at 0.
    """

    def decide(self, obs: Observation) -> JointDecision:
        scene = obs.scene
        cue = obs.goal.cue
        light = scene.traffic_light
        ped_m = nearest_pedestrian_m(obs)

        is_complex = cue != "none" or scene.crowd_density >= CROWD_COMPLEX
        red_block = light is not None and light.phase == "red" and cue in ("crossing", "traffic_light")
        ped_block = ped_m is not None and ped_m < STOP_PEDESTRIAN_M

        flags: list[str] = []
        if scene.crowd_density >= CROWD_COMPLEX:
            flags.append(f"{scene.crowd_density} pedestrians within 5 m")
        if ped_m is not None and ped_m < FLAG_PEDESTRIAN_M:
            flags.append(f"pedestrian only {ped_m:.1f} m away")
        if cue in ("crossing", "traffic_light") and light is None:
            flags.append("signal state not visible yet")
        if cue == "none" and light is not None:
            flags.append("signal ahead on an unflagged segment")

        conf = max(0.0, 1.0 - 0.1 * len(flags))

        if red_block:
            reason = f"red light {light.distance_m:.0f} m ahead governs the {cue.replace('_', ' ')} segment"
        elif ped_block:
            reason = f"pedestrian {ped_m:.1f} m away, inside the stop margin"
        elif is_complex:
            what = f"{cue.replace('_', ' ')} segment" if cue != "none" else "dense crowd"
            state = f"light is {light.phase}" if light is not None else "no blocking signal"
            reason = f"{what} ahead; {state}, path clear"
        else:
            reason = "routine segment, scene clear"

        return JointDecision(
            routing="complex" if is_complex else "routine",
            action="stop_and_wait" if (red_block or ped_block) else "proceed",
            conf=conf,
            reason=reason,
        )


def _arc_points(curvature: float, n: int = TRAJECTORY_HORIZON, spacing: float = TRAJECTORY_SPACING_M):
    pts = []
    for k in range(1, n + 1):
        s = k * spacing
        if abs(curvature) < 1e-12:
            pts.append((s, 0.0))
        else:
            pts.append((math.sin(curvature * s) / curvature, (1.0 - math.cos(curvature * s)) / curvature))
    return tuple(pts)


def _min_clearance(points, pedestrians: list[tuple[tuple[float, float], tuple[float, float]]]) -> float:
    """Min distance from arc points to pedestrians advanced along their velocity."""
    best = math.inf
    for k, (px, py) in enumerate(points):
        t = (k + 1) * TRAJECTORY_SPACING_M / MAX_SPEED
        for (ox, oy), (vx, vy) in pedestrians:
            d = math.hypot(px - (ox + vx * t), py - (oy + vy * t))
            if d < best:
                best = d
    return best


_CURVATURE_GRID = tuple(
    -MAX_CURVATURE + 2.0 * MAX_CURVATURE * i / (CURVATURE_CANDIDATES - 1) for i in range(CURVATURE_CANDIDATES)
)


class ArcLocalPolicy:
    """Reference local policy: pure-pursuit style constant-curvature arcs."""

    def predict(self, obs: Observation) -> Trajectory:
        gx, gy = body_frame(obs, obs.goal.local)
        r2 = gx * gx + gy * gy
        nominal = 0.0 if r2 < 1e-12 else max(-MAX_CURVATURE, min(MAX_CURVATURE, 2.0 * gy / r2))

        # Only pedestrians that can interact with the arc within its time
        # horizon matter; everyone else is dropped before the search.
        arc_reach = TRAJECTORY_HORIZON * TRAJECTORY_SPACING_M
        t_max = arc_reach / MAX_SPEED
        peds = []
        for p in obs.scene.pedestrians:
            pos = body_frame(obs, p.position)
            vel = _rotate(-obs.pose.yaw, p.velocity)
            if math.hypot(*pos) <= arc_reach + CLEARANCE_SOFT_M + math.hypot(*vel) * t_max:
                peds.append((pos, vel))

        nominal_points = _arc_points(nominal)
        if not peds or _min_clearance(nominal_points, peds) >= CLEARANCE_SOFT_M:
            return Trajectory(points=nominal_points)

        candidates = (nominal,) + _CURVATURE_GRID
        scored = []
        for curvature in candidates:
            points = _arc_points(curvature)
            clearance = _min_clearance(points, peds)
            goal_dist = math.hypot(points[-1][0] - gx, points[-1][1] - gy)
            scored.append((clearance, goal_dist, points))

        for threshold in (CLEARANCE_SOFT_M, CLEARANCE_HARD_M):
            feasible = [(gd, pts) for cl, gd, pts in scored if cl >= threshold]
            if feasible:
                _, points = min(feasible, key=lambda t: t[0])
                return Trajectory(points=points)
        # Fully boxed in: hand back the least-bad arc; the decision gate is
        # responsible for stopping when someone is this close.
        _, _, points = max(scored, key=lambda t: t[0])
        return Trajectory(points=points)


def decide(joint_model: JointDecisionModel, obs: Observation) -> JointDecision:
    """Query the joint model, mapping any non-conforming output to a failure."""
    try:
        decision = joint_model.decide(obs)
    except Exception as exc:
        raise DecisionModelFailure(f"joint decision adapter raised: {exc}") from exc
    if not isinstance(decision, JointDecision):
        raise DecisionModelFailure(f"joint decision adapter returned {type(decision).__name__}, not JointDecision")
    return decision


def predict_trajectory(local_policy: LocalPolicy, obs: Observation) -> Trajectory:
    """Query the local policy, mapping any non-conforming output to a failure."""
    try:
        trajectory = local_policy.predict(obs)
    except Exception as exc:
        raise PolicyFailure(f"local policy adapter raised: {exc}") from exc
    if not isinstance(trajectory, Trajectory):
        raise PolicyFailure(f"local policy adapter returned {type(trajectory).__name__}, not Trajectory")
    return trajectory

"""Deterministic kinematic world: robot, scripted pedestrians, traffic lights.

The world is a value: advance() returns a new WorldState, so advancing the
same state twice always yields identical results. All stochastic behavior
(localization noise) is derived from (rng_seed, step_count), never from a
shared mutable generator, which keeps traces bit-stable under a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geodesy import LocalPose, wrap_angle
from .policy import (
    MAX_SPEED,
    MAX_YAW_RATE,
    PedestrianObs,
    SceneDescription,
    TrafficLightObs,
)

SENSE_PEDESTRIAN_RANGE_M = 20.0
CROWD_RADIUS_M = 5.0
LIGHT_VISIBLE_RANGE_M = 25.0
LIGHT_VISIBLE_HALF_ANGLE = math.radians(60.0)


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian localization noise."""

    sigma_xy: float = 0.05
    sigma_yaw: float = 0.01

    def __post_init__(self):
        if self.sigma_xy < 0.0 or self.sigma_yaw < 0.0:
            raise ValueError("noise sigmas must be non-negative")


@dataclass(frozen=True)
class ControlCommand:
    """One executable action: track a body-frame point, hold, or rotate."""

    kind: str  # "track" | "stop" | "yaw_align"
    target: tuple[float, float] | float | None = None

    def __post_init__(self):
        if self.kind == "stop":
            if self.target is not None:
                raise ValueError("stop carries no target")
        elif self.kind == "track":
            if not (isinstance(self.target, tuple) and len(self.target) == 2):
                raise ValueError("track needs a body-frame (x, y) target")
        elif self.kind == "yaw_align":
            if not isinstance(self.target, (int, float)):
                raise ValueError("yaw_align needs a target heading")
        else:
            raise ValueError(f"unknown command kind {self.kind!r}")

    @classmethod
    def stop(cls) -> "ControlCommand":
        return cls(kind="stop")

    @classmethod
    def track(cls, target: tuple[float, float]) -> "ControlCommand":
        return cls(kind="track", target=target)

    @classmethod
    def yaw_align(cls, heading: float) -> "ControlCommand":
        return cls(kind="yaw_align", target=heading)


@dataclass(frozen=True)
class Pedestrian:
    """Scripted waypoint-walker; `s` is its arc position along `path`."""

    id: str
    path: tuple[tuple[float, float], ...]
    speed: float
    loop: bool = True
    s: float = 0.0

    def _cumulative(self) -> list[float]:
        cum = [0.0]
        for a, b in zip(self.path, self.path[1:]):
            cum.append(cum[-1] + math.dist(a, b))
        return cum

    def total_length(self) -> float:
        return self._cumulative()[-1]

    def position(self) -> tuple[float, float]:
        if len(self.path) == 1:
            return self.path[0]
        cum = self._cumulative()
        total = cum[-1]
        if total <= 0.0:
            return self.path[0]
        s = self.s % total if self.loop else min(self.s, total)
        for i in range(len(self.path) - 1):
            if s <= cum[i + 1] or i == len(self.path) - 2:
                seg = cum[i + 1] - cum[i]
                t = 0.0 if seg <= 0.0 else (s - cum[i]) / seg
                ax, ay = self.path[i]
                bx, by = self.path[i + 1]
                return (ax + t * (bx - ax), ay + t * (by - ay))
        return self.path[-1]

    def velocity(self) -> tuple[float, float]:
        if len(self.path) == 1 or self.speed <= 0.0:
            return (0.0, 0.0)
        cum = self._cumulative()
        total = cum[-1]
        if total <= 0.0 or (not self.loop and self.s >= total):
            return (0.0, 0.0)
        s = self.s % total if self.loop else self.s
        for i in range(len(self.path) - 1):
            if s <= cum[i + 1] or i == len(self.path) - 2:
                seg = cum[i + 1] - cum[i]
                if seg <= 0.0:
                    return (0.0, 0.0)
                ax, ay = self.path[i]
                bx, by = self.path[i + 1]
                return (self.speed * (bx - ax) / seg, self.speed * (by - ay) / seg)
        return (0.0, 0.0)


@dataclass(frozen=True)
class TrafficLight:
    id: str
    x: float
    y: float
    red_s: float
    green_s: float
    offset_s: float = 0.0

    def __post_init__(self):
        if self.red_s < 0.0 or self.green_s < 0.0 or self.red_s + self.green_s <= 0.0:
            raise ValueError(f"light {self.id!r} needs non-negative phases with a positive cycle")

    def phase_at(self, t: float) -> str:
        cycle = self.red_s + self.green_s
        return "red" if (t + self.offset_s) % cycle < self.red_s else "green"


@dataclass(frozen=True)
class CrossingZone:
    id: str
    polygon: tuple[tuple[float, float], ...]
    light_id: str | None = None

    def __post_init__(self):
        if len(self.polygon) < 3:
            raise ValueError(f"crossing {self.id!r} polygon needs at least 3 vertices")


def point_in_polygon(polygon: tuple[tuple[float, float], ...], x: float, y: float) -> bool:
    """Ray-casting containment test; points on an edge count as inside."""
    inside = False
    n = len(polygon)
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        # On-segment check keeps the boundary unambiguous.
        cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
        if abs(cross) < 1e-12 and min(ax, bx) - 1e-12 <= x <= max(ax, bx) + 1e-12 and min(ay, by) - 1e-12 <= y <= max(ay, by) + 1e-12:
            return True
        if (ay > y) != (by > y):
            x_hit = ax + (y - ay) * (bx - ax) / (by - ay)
            if x_hit > x:
                inside = not inside
    return inside


def segments_intersect(p1, p2, p3, p4) -> bool:
    """Proper or touching intersection of segments p1p2 and p3p4."""

    def orient(a, b, c) -> float:
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_segment(a, b, c) -> bool:
        return (
            min(a[0], b[0]) - 1e-12 <= c[0] <= max(a[0], b[0]) + 1e-12
            and min(a[1], b[1]) - 1e-12 <= c[1] <= max(a[1], b[1]) + 1e-12
        )

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    for d, a, b, c in ((d1, p3, p4, p1), (d2, p3, p4, p2), (d3, p1, p2, p3), (d4, p1, p2, p4)):
        if abs(d) < 1e-12 and on_segment(a, b, c):
            return True
    return False


@dataclass(frozen=True)
class WorldState:
    robot: LocalPose
    robot_speed: float
    pedestrians: tuple[Pedestrian, ...]
    lights: tuple[TrafficLight, ...]
    crossings: tuple[CrossingZone, ...]
    clock: float
    step_count: int
    rng_seed: int

    def light_by_id(self, light_id: str) -> TrafficLight:
        for light in self.lights:
            if light.id == light_id:
                return light
        raise KeyError(light_id)


def advance(world: WorldState, cmd: ControlCommand, dt: float) -> WorldState:
    """Integrate one control interval: robot per `cmd`, pedestrians, clock."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")

    robot = world.robot
    speed = 0.0
    if cmd.kind == "stop":
        pass  # zero-displacement hold, bit-exact
    elif cmd.kind == "yaw_align":
        dyaw = wrap_angle(float(cmd.target) - robot.yaw)
        dyaw = max(-MAX_YAW_RATE * dt, min(MAX_YAW_RATE * dt, dyaw))
        robot = LocalPose(robot.x, robot.y, wrap_angle(robot.yaw + dyaw))
    else:  # track
        tx, ty = cmd.target
        c, s = math.cos(robot.yaw), math.sin(robot.yaw)
        wx = robot.x + c * tx - s * ty
        wy = robot.y + s * tx + c * ty
        dist = math.hypot(wx - robot.x, wy - robot.y)
        if dist > 1e-9:
            desired = math.atan2(wy - robot.y, wx - robot.x)
            dyaw = wrap_angle(desired - robot.yaw)
            dyaw = max(-MAX_YAW_RATE * dt, min(MAX_YAW_RATE * dt, dyaw))
            yaw = wrap_angle(robot.yaw + dyaw)
            step_d = min(dist, MAX_SPEED * dt)
            robot = LocalPose(robot.x + step_d * math.cos(yaw), robot.y + step_d * math.sin(yaw), yaw)
            speed = step_d / dt

    pedestrians = tuple(replace(p, s=p.s + p.speed * dt) for p in world.pedestrians)
    return replace(
        world,
        robot=robot,
        robot_speed=speed,
        pedestrians=pedestrians,
        clock=world.clock + dt,
        step_count=world.step_count + 1,
    )


def sense(world: WorldState) -> SceneDescription:
    """Structured scene snapshot: the desk-scale stand-in for a camera frame."""
    rx, ry = world.robot.x, world.robot.y

    observed: list[PedestrianObs] = []
    crowd = 0
    for ped in world.pedestrians:
        px, py = ped.position()
        d = math.hypot(px - rx, py - ry)
        if d <= SENSE_PEDESTRIAN_RANGE_M:
            observed.append(PedestrianObs(position=(px, py), velocity=ped.velocity()))
        if d <= CROWD_RADIUS_M:
            crowd += 1

    light_obs: TrafficLightObs | None = None
    best: tuple[float, str] | None = None
    for light in world.lights:
        d = math.hypot(light.x - rx, light.y - ry)
        if d > LIGHT_VISIBLE_RANGE_M:
            continue
        heading_off = abs(wrap_angle(math.atan2(light.y - ry, light.x - rx) - world.robot.yaw))
        if heading_off > LIGHT_VISIBLE_HALF_ANGLE:
            continue
        if best is None or (d, light.id) < best:
            best = (d, light.id)
            light_obs = TrafficLightObs(phase=light.phase_at(world.clock), distance_m=d)

    in_zone = any(point_in_polygon(zone.polygon, rx, ry) for zone in world.crossings)
    return SceneDescription(
        pedestrians=tuple(observed),
        traffic_light=light_obs,
        in_crossing_zone=in_zone,
        crowd_density=crowd,
    )


def localize(world: WorldState, noise: NoiseModel) -> LocalPose:
    """Robot pose estimate with seeded Gaussian noise; sigma 0 is exact."""
    if noise.sigma_xy == 0.0 and noise.sigma_yaw == 0.0:
        return world.robot
    rng = np.random.default_rng((world.rng_seed, world.step_count, 0x10CA112E))
    dx, dy = rng.normal(0.0, noise.sigma_xy, size=2)
    dyaw = rng.normal(0.0, noise.sigma_yaw)
    return LocalPose(world.robot.x + float(dx), world.robot.y + float(dy), wrap_angle(world.robot.yaw + float(dyaw)))

"""Waypoint plan construction and the forward-looking goal rule.

A WalkingRoute's polylines are resampled at a fixed arc-length spacing into
frame-aligned waypoints; each waypoint inherits the semantic cue and step
index of the route step containing its arc position (a waypoint exactly on a
step boundary belongs to the later step). The lookahead goal is the first
waypoint a fixed distance past the waypoint nearest the robot, clamped to the
plan's end, which keeps the local goal advancing smoothly through turns.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from .errors import DegenerateRoute
from .geodesy import LocalFrame, LocalPose, GeoPoint, to_geo, to_local
from .map_service import WalkingRoute

DEFAULT_SPACING_M = 5.0
DEFAULT_LOOKAHEAD_M = 10.0

_CUE_PREFIX = {
    "crossing": "Prepare to cross at the pedestrian crossing",
    "traffic_light": "Check the traffic light before crossing",
}


@dataclass(frozen=True)
class Waypoint:
    geo: GeoPoint
    local: tuple[float, float]
    cue: str
    step_index: int
    arc_length: float


@dataclass(frozen=True)
class WaypointPlan:
    waypoints: tuple[Waypoint, ...]
    frame: LocalFrame
    spacing: float

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise ValueError("plan needs at least 2 waypoints")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            if b.arc_length <= a.arc_length:
                raise ValueError("waypoint arc lengths must be strictly increasing")
        # Inner separations must stay near the nominal spacing; the final
        # waypoint is exempt (it pins the route destination exactly).
        for a, b in zip(self.waypoints[:-2], self.waypoints[1:-1]):
            gap = b.arc_length - a.arc_length
            if not 0.5 * self.spacing - 1e-9 <= gap <= 1.5 * self.spacing + 1e-9:
                raise ValueError(f"waypoint separation {gap:.3f} m outside [{0.5 * self.spacing}, {1.5 * self.spacing}]")

    @property
    def length(self) -> float:
        return self.waypoints[-1].arc_length

    @property
    def destination(self) -> Waypoint:
        return self.waypoints[-1]


def _local_vertices(route: WalkingRoute, frame: LocalFrame):
    """Flatten a route into local-frame vertices with per-segment step indices."""
    vertices: list[tuple[float, float]] = []
    segment_steps: list[int] = []  # step owning segment (vertices[i], vertices[i+1])
    for step_idx, step in enumerate(route.steps):
        for p in step.polyline:
            xy = to_local(frame, p)
            if vertices and math.dist(vertices[-1], xy) <= 1e-9:
                continue
            vertices.append(xy)
            if len(vertices) > 1:
                segment_steps.append(step_idx)
    return vertices, segment_steps


def build_waypoint_plan(route: WalkingRoute, frame: LocalFrame, spacing: float = DEFAULT_SPACING_M) -> WaypointPlan:
    """Resample a walking route at `spacing` meters of arc length.

    Both route endpoints are always included; interior samples fall on exact
    multiples of `spacing`.
    """
    if spacing <= 0.0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    vertices, segment_steps = _local_vertices(route, frame)
    if len(vertices) < 2:
        raise DegenerateRoute("route collapses to a single point in the local frame")

    cum = [0.0]
    for a, b in zip(vertices, vertices[1:]):
        cum.append(cum[-1] + math.dist(a, b))
    total = cum[-1]
    if total <= 1e-9:
        raise DegenerateRoute(f"route has zero local length ({total:.3e} m)")

    # Arc positions where each route step begins; used for cue inheritance.
    step_starts = [0.0]
    for seg_idx in range(1, len(segment_steps)):
        if segment_steps[seg_idx] != segment_steps[seg_idx - 1]:
            step_starts.append(cum[seg_idx])
    step_of_first_segment = segment_steps[0]

    arcs: list[float] = []
    a = 0.0
    while a < total - 1e-9:
        arcs.append(a)
        a += spacing
    arcs.append(total)

    waypoints: list[Waypoint] = []
    for arc in arcs:
        seg = min(bisect_right(cum, arc) - 1, len(vertices) - 2)
        seg_len = cum[seg + 1] - cum[seg]
        t = (arc - cum[seg]) / seg_len
        x = vertices[seg][0] + t * (vertices[seg + 1][0] - vertices[seg][0])
        y = vertices[seg][1] + t * (vertices[seg + 1][1] - vertices[seg][1])
        # Boundary samples belong to the later step.
        step_idx = step_of_first_segment + max(0, bisect_right(step_starts, arc) - 1)
        step_idx = min(step_idx, len(route.steps) - 1)
        waypoints.append(
            Waypoint(
                geo=to_geo(frame, x, y),
                local=(x, y),
                cue=route.steps[step_idx].semantic_cue,
                step_index=step_idx,
                arc_length=arc,
            )
        )
    return WaypointPlan(waypoints=tuple(waypoints), frame=frame, spacing=spacing)


def nearest_waypoint_index(plan: WaypointPlan, pose: LocalPose) -> int:
    """Index of the waypoint closest to the pose; ties go to the lower index."""
    best_idx, best_d2 = 0, math.inf
    for idx, wp in enumerate(plan.waypoints):
        d2 = (wp.local[0] - pose.x) ** 2 + (wp.local[1] - pose.y) ** 2
        if d2 < best_d2:
            best_idx, best_d2 = idx, d2
    return best_idx


def lookahead_goal(plan: WaypointPlan, pose: LocalPose, lookahead: float = DEFAULT_LOOKAHEAD_M) -> Waypoint:
    """First waypoint at least `lookahead` meters of arc past the nearest one.

    Clamped to the final waypoint; never behind the nearest waypoint.
    """
    if lookahead <= 0.0:
        raise ValueError(f"lookahead must be positive, got {lookahead}")
    nearest = plan.waypoints[nearest_waypoint_index(plan, pose)]
    target_arc = nearest.arc_length + lookahead
    for wp in plan.waypoints:
        if wp.arc_length >= target_arc:
            return wp
    return plan.waypoints[-1]


def step_instruction(plan: WaypointPlan, goal: Waypoint, route: WalkingRoute) -> str:
    """Step-aware instruction text for the current lookahead goal."""
    text = route.steps[goal.step_index].instruction_text
    prefix = _CUE_PREFIX.get(goal.cue)
    if prefix is None:
        return text
    return f"{prefix}, then {text}"


def projected_arc_length(plan: WaypointPlan, x: float, y: float) -> float:
    """Arc length of the orthogonal projection of (x, y) onto the plan polyline."""
    best_arc, best_d2 = 0.0, math.inf
    for a, b in zip(plan.waypoints, plan.waypoints[1:]):
        ax, ay = a.local
        bx, by = b.local
        vx, vy = bx - ax, by - ay
        seg_len2 = vx * vx + vy * vy
        t = 0.0 if seg_len2 == 0.0 else max(0.0, min(1.0, ((x - ax) * vx + (y - ay) * vy) / seg_len2))
        px, py = ax + t * vx, ay + t * vy
        d2 = (x - px) ** 2 + (y - py) ** 2
        if d2 < best_d2:
            best_d2 = d2
            best_arc = a.arc_length + t * (b.arc_length - a.arc_length)
    return best_arc

"""The closed loop: observe, decide, gate, act, update, terminate.

One episode grounds the instruction to a destination, fetches and resamples
the walking route, then alternates observation assembly, the joint decision,
and execution. A track command is issued only when the decision is `proceed`
AND its confidence clears the gate threshold; anything else holds the robot,
waits a retry interval, and re-observes. Consecutive holds beyond the safety
budget abort the episode back to the operator; a hard iteration budget
catches everything else.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, fields, replace

from .errors import DecisionModelFailure, EmptyBatch, PolicyFailure, WayfarerError
from .geodesy import LocalFrame, LocalPose, to_geo, wrap_angle
from .grounding import (
    GroundedDestination,
    Instruction,
    IntentModel,
    ground_destination,
    pool_candidates,
    propose_categories,
)
from .map_service import FixtureMapService, MapClient, WalkingRoute
from .policy import (
    JointDecision,
    JointDecisionModel,
    LocalPolicy,
    Observation,
    body_frame,
    decide,
    predict_trajectory,
)
from .route import WaypointPlan, build_waypoint_plan, lookahead_goal, step_instruction
from .scenario import Scenario, build_world
from .sim import ControlCommand, NoiseModel, WorldState, advance, localize, point_in_polygon, sense
from .trace import TraceWriter

# In-place rotation before translating when the goal sits this far off-heading.
YAW_ALIGN_THRESHOLD_RAD = 0.3

OUTCOMES = ("success", "aborted_safety", "aborted_iterations", "adapter_failure")


@dataclass(frozen=True)
class EpisodeConfig:
    """Loop parameters; every field can be overridden per scenario or CLI."""

    alpha: float = 0.8  # confidence gate on proceed decisions
    arrival_tolerance: float = 3.0  # meters to the final waypoint
    max_iterations: int = 2000
    safety_budget: int = 10  # max consecutive stop-and-wait retries
    retry_interval: float = 2.0  # seconds held per stop-and-wait
    lookahead: float = 10.0
    spacing: float = 5.0
    history_len: int = 16
    control_period: float = 0.5  # seconds per proceed step

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        for name in ("arrival_tolerance", "max_iterations", "safety_budget", "retry_interval",
                     "lookahead", "spacing", "history_len", "control_period"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    _INT_FIELDS = ("max_iterations", "safety_budget", "history_len")

    def with_overrides(self, overrides: dict) -> "EpisodeConfig":
        """Apply key=value overrides, rejecting unknown keys by name."""
        if not overrides:
            return self
        known = {f.name for f in fields(self)}
        cleaned = {}
        for key, value in overrides.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r} (known: {', '.join(sorted(known))})")
            cleaned[key] = int(value) if key in self._INT_FIELDS else float(value)
        return replace(self, **cleaned)


@dataclass(frozen=True)
class EpisodeResult:
    outcome: str
    steps: int
    distance_traveled: float
    stop_wait_events: int
    final_distance: float
    trace_path: str | None = None
    error: str | None = None

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")


@dataclass(frozen=True)
class TrialBatch:
    results: tuple[EpisodeResult, ...]

    @property
    def n(self) -> int:
        return len(self.results)


def success_rate(batch: TrialBatch) -> float:
    """Fraction of trials whose outcome is success (exact arithmetic)."""
    if batch.n == 0:
        raise EmptyBatch("success rate over zero trials is undefined")
    return sum(1 for r in batch.results if r.outcome == "success") / batch.n


def assemble_observation(
    world: WorldState,
    plan: WaypointPlan,
    route: WalkingRoute,
    history: tuple[LocalPose, ...],
    cfg: EpisodeConfig,
    noise: NoiseModel,
    step: int,
) -> Observation:
    """Build the per-step observation tuple from the live world."""
    pose = localize(world, noise)
    goal = lookahead_goal(plan, pose, cfg.lookahead)
    return Observation(
        scene=sense(world),
        pose=pose,
        history=history,
        goal=goal,
        instruction=step_instruction(plan, goal, route),
        step=step,
    )


def _decision_record(d: JointDecision) -> dict:
    return {"routing": d.routing, "action": d.action, "conf": d.conf, "reason": d.reason}


def _command_record(cmd: ControlCommand) -> dict:
    target = cmd.target
    if isinstance(target, tuple):
        target = [target[0], target[1]]
    return {"kind": cmd.kind, "target": target}


def _scene_record(obs: Observation) -> dict:
    light = obs.scene.traffic_light
    peds = obs.scene.pedestrians
    nearest = min((math.dist(p.position, obs.pose.xy) for p in peds), default=None)
    return {
        "crowd": obs.scene.crowd_density,
        "nearest_ped": nearest,
        "light": None if light is None else {"phase": light.phase, "distance": light.distance_m},
        "in_zone": obs.scene.in_crossing_zone,
    }


def run_episode(
    instruction: Instruction,
    world: WorldState,
    frame: LocalFrame,
    map_client: MapClient,
    intent_model: IntentModel,
    joint_model: JointDecisionModel,
    local_policy: LocalPolicy,
    cfg: EpisodeConfig,
    noise: NoiseModel = NoiseModel(0.0, 0.0),
    trace: TraceWriter | None = None,
) -> EpisodeResult:
    """Run one full episode; never raises for in-protocol failures."""

    def emit(record: dict) -> None:
        if trace is not None:
            trace.write(record)

    def finish(outcome: str, steps: int, traveled: float, stop_events: int,
               final_distance: float, error: str | None = None) -> EpisodeResult:
        emit({
            "type": "result",
            "outcome": outcome,
            "steps": steps,
            "distance_traveled": traveled,
            "stop_wait_events": stop_events,
            "final_distance": final_distance,
            "error": error,
        })
        return EpisodeResult(
            outcome=outcome,
            steps=steps,
            distance_traveled=traveled,
            stop_wait_events=stop_events,
            final_distance=final_distance,
            trace_path=str(trace.path) if trace is not None else None,
            error=error,
        )

    # -- destination grounding and coarse route -------------------------
    try:
        categories = propose_categories(intent_model, instruction)
        candidates = pool_candidates(map_client, categories, instruction.issued_at)
        grounded: GroundedDestination = ground_destination(intent_model, instruction, candidates, categories)
        walking_route = map_client.walking_route(instruction.issued_at, grounded.choice.location)
        plan = build_waypoint_plan(walking_route, frame, cfg.spacing)
    except WayfarerError as exc:
        # NoCandidates / NoRouteFound / FixtureMissing / IntentModelFailure:
        # the episode cannot start; the closed outcome enum reports these as
        # adapter_failure with the cause recorded.
        emit({"type": "meta", "instruction": instruction.text, "error": str(exc)})
        return finish("adapter_failure", 0, 0.0, 0, math.inf, error=str(exc))

    emit({
        "type": "meta",
        "instruction": instruction.text,
        "seed": world.rng_seed,
        "config": {f.name: getattr(cfg, f.name) for f in fields(cfg)},
        "destination": {
            "id": grounded.choice.id,
            "name": grounded.choice.name,
            "category": grounded.choice.category,
            "lat": grounded.choice.location.lat,
            "lon": grounded.choice.location.lon,
        },
        "rationale": grounded.rationale,
        "categories": list(grounded.proposed_categories),
        "plan": [[wp.local[0], wp.local[1]] for wp in plan.waypoints],
        "plan_length": plan.length,
        "crossings": [
            {"id": z.id, "polygon": [list(v) for v in z.polygon], "light": z.light_id} for z in world.crossings
        ],
        "lights": [
            {"id": l.id, "x": l.x, "y": l.y, "red_s": l.red_s, "green_s": l.green_s, "offset_s": l.offset_s}
            for l in world.lights
        ],
        "error": None,
    })

    history: deque[LocalPose] = deque(maxlen=cfg.history_len)
    consecutive_stops = 0
    stop_events = 0
    traveled = 0.0
    dest = plan.destination.local

    for step in range(cfg.max_iterations):
        obs = assemble_observation(world, plan, walking_route, tuple(history), cfg, noise, step)
        remaining = math.dist(obs.pose.xy, dest)
        if remaining <= cfg.arrival_tolerance:
            return finish("success", step, traveled, stop_events, remaining)

        try:
            decision = decide(joint_model, obs)
        except DecisionModelFailure as exc:
            # Degrade to a conservative hold; it counts against the budget.
            decision = JointDecision(
                routing="complex", action="stop_and_wait", conf=0.0,
                reason=f"decision model failure: {exc}",
            )

        gate_open = decision.action == "proceed" and decision.conf >= cfg.alpha
        record: dict = {
            "type": "step",
            "step": step,
            "clock": world.clock,
            "pose_est": [obs.pose.x, obs.pose.y, obs.pose.yaw],
            "pose_true": [world.robot.x, world.robot.y, world.robot.yaw],
            "goal": {
                "arc": obs.goal.arc_length,
                "x": obs.goal.local[0],
                "y": obs.goal.local[1],
                "cue": obs.goal.cue,
                "step_index": obs.goal.step_index,
            },
            "instruction": obs.instruction,
            "scene": _scene_record(obs),
            "decision": _decision_record(decision),
            "distance_remaining": remaining,
        }

        if gate_open:
            consecutive_stops = 0
            try:
                trajectory = predict_trajectory(local_policy, obs)
            except PolicyFailure as exc:
                record.update({"command": _command_record(ControlCommand.stop()), "consecutive_stops": 0,
                               "post_true": [world.robot.x, world.robot.y, world.robot.yaw],
                               "post_in_crossings": [], "light_phases": {}})
                emit(record)
                return finish("adapter_failure", step + 1, traveled, stop_events, remaining, error=str(exc))
            gx, gy = body_frame(obs, obs.goal.local)
            heading_error = math.atan2(gy, gx)
            if abs(heading_error) > YAW_ALIGN_THRESHOLD_RAD:
                cmd = ControlCommand.yaw_align(wrap_angle(obs.pose.yaw + heading_error))
            else:
                cmd = ControlCommand.track(trajectory.points[0])
            dt = cfg.control_period
        else:
            consecutive_stops += 1
            cmd = ControlCommand.stop()
            if consecutive_stops > cfg.safety_budget:
                record.update({
                    "command": _command_record(cmd),
                    "consecutive_stops": consecutive_stops,
                    "post_true": [world.robot.x, world.robot.y, world.robot.yaw],
                    "post_in_crossings": [z.id for z in world.crossings
                                          if point_in_polygon(z.polygon, world.robot.x, world.robot.y)],
                    "light_phases": {l.id: l.phase_at(world.clock) for l in world.lights},
                })
                emit(record)
                return finish("aborted_safety", step + 1, traveled, stop_events, remaining)
            stop_events += 1
            dt = cfg.retry_interval

        before = world.robot
        world = advance(world, cmd, dt)
        traveled += math.dist(world.robot.xy, before.xy)
        record.update({
            "command": _command_record(cmd),
            "consecutive_stops": consecutive_stops,
            "post_true": [world.robot.x, world.robot.y, world.robot.yaw],
            "post_in_crossings": [z.id for z in world.crossings
                                  if point_in_polygon(z.polygon, world.robot.x, world.robot.y)],
            "light_phases": {l.id: l.phase_at(world.clock) for l in world.lights},
        })
        emit(record)
        history.append(obs.pose)

    final = math.dist(localize(world, noise).xy, dest)
    return finish("aborted_iterations", cfg.max_iterations, traveled, stop_events, final)


def run_scenario(
    scenario: Scenario,
    seed: int,
    cfg: EpisodeConfig | None = None,
    intent_model: IntentModel | None = None,
    joint_model: JointDecisionModel | None = None,
    local_policy: LocalPolicy | None = None,
    map_client: MapClient | None = None,
    trace_path: str | None = None,
) -> EpisodeResult:
    """Convenience wrapper: build the world for one trial and run it."""
    from .grounding import RuleIntentModel
    from .policy import ArcLocalPolicy, RuleJointModel

    cfg = (cfg or EpisodeConfig()).with_overrides(scenario.config_overrides)
    frame = LocalFrame(scenario.origin)
    world = build_world(scenario, seed)
    if map_client is None:
        map_client = FixtureMapService(scenario.fixture_path)
    instruction = Instruction(
        text=scenario.instruction,
        issued_at=to_geo(frame, scenario.start.x, scenario.start.y),
    )
    trace = TraceWriter(trace_path) if trace_path is not None else None
    try:
        return run_episode(
            instruction,
            world,
            frame,
            map_client,
            intent_model if intent_model is not None else RuleIntentModel(),
            joint_model if joint_model is not None else RuleJointModel(),
            local_policy if local_policy is not None else ArcLocalPolicy(),
            cfg,
            noise=scenario.noise,
            trace=trace,
        )
    finally:
        if trace is not None:
            trace.close()

"""wayfarer: instruction-grounded outdoor navigation simulator.

Grounds an abstract instruction to a map-service POI, retrieves and resamples
a walking route into frame-aligned waypoints, and closes the loop with a
joint routine/complex + proceed/stop decision gate, short-horizon body-frame
trajectories, and a deterministic kinematic world.
"""

from .errors import (
    DecisionModelFailure,
    DegenerateRoute,
    DegenerateSegment,
    EmptyBatch,
    FixtureMissing,
    IntentModelFailure,
    NoCandidates,
    NoRouteFound,
    OutOfFrameRange,
    ParseError,
    PolicyFailure,
    WayfarerError,
)
from .geodesy import GeoPoint, LocalFrame, LocalPose, bearing, haversine_distance, to_geo, to_local
from .grounding import (
    GroundedDestination,
    Instruction,
    IntentSelection,
    RuleIntentModel,
    ground_destination,
    pool_candidates,
    propose_categories,
)
from .map_service import FixtureMapService, PoiCandidate, RouteStep, WalkingRoute
from .orchestrator import (
    EpisodeConfig,
    EpisodeResult,
    TrialBatch,
    assemble_observation,
    run_episode,
    run_scenario,
    success_rate,
)
from .policy import (
    ArcLocalPolicy,
    JointDecision,
    Observation,
    RuleJointModel,
    SceneDescription,
    Trajectory,
    body_frame,
    decide,
    predict_trajectory,
)
from .route import Waypoint, WaypointPlan, build_waypoint_plan, lookahead_goal, step_instruction
from .scenario import Scenario, build_world, list_builtin_scenarios, load_scenario, resolve_scenario_path
from .sim import ControlCommand, NoiseModel, WorldState, advance, localize, sense

__version__ = "0.1.0"

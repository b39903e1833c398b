"""Scenario documents: one episode's world, instruction, and config overrides.

A scenario binds a map fixture to a concrete local-frame world: frame origin,
robot start pose, crossing polygons, light schedules, pedestrian scripts, and
localization noise, plus the natural-language instruction the episode starts
from. Scenarios shipped with the package are addressable by bare name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import yamlio
from .errors import ParseError
from .geodesy import GeoPoint, LocalPose
from .sim import CrossingZone, NoiseModel, Pedestrian, TrafficLight, WorldState


@dataclass(frozen=True)
class Scenario:
    name: str
    task: str
    instruction: str
    fixture_path: Path
    origin: GeoPoint
    start: LocalPose
    noise: NoiseModel
    lights: tuple[TrafficLight, ...]
    crossings: tuple[CrossingZone, ...]
    pedestrians: tuple[Pedestrian, ...]
    config_overrides: dict = field(default_factory=dict)
    expected_destination: str | None = None
    path: Path | None = None


def _geo(fields: yamlio.Fields, path: str) -> GeoPoint:
    lat_node = fields.require("lat")
    lon_node = fields.require("lon")
    try:
        return GeoPoint(yamlio.as_float(lat_node, "lat"), yamlio.as_float(lon_node, "lon"))
    except ValueError as exc:
        raise ParseError(path, lat_node.line, str(exc)) from exc


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate one scenario document."""
    path = Path(path)
    doc = yamlio.load_file(path)
    top = yamlio.Fields(doc, "scenario document")

    version = yamlio.as_int(top.require("version"), "version")
    if version != 1:
        raise ParseError(str(path), doc.line, f"unsupported scenario version {version}")
    name = yamlio.as_str(top.require("name"), "name")
    task = yamlio.as_str(top.require("task"), "task")
    instruction = yamlio.as_str(top.require("instruction"), "instruction")
    if not instruction.strip():
        raise ParseError(str(path), doc.line, "instruction must be non-empty")

    fixture_rel = yamlio.as_str(top.require("fixture"), "fixture")
    fixture_path = (path.parent / fixture_rel).resolve()

    origin_fields = yamlio.Fields(top.require("origin"), "origin")
    origin = _geo(origin_fields, str(path))
    origin_fields.finish()

    start_fields = yamlio.Fields(top.require("start"), "start")
    sx = yamlio.as_float(start_fields.require("x"), "start x")
    sy = yamlio.as_float(start_fields.require("y"), "start y")
    yaw_node = start_fields.optional("yaw")
    syaw = yamlio.as_float(yaw_node, "start yaw") if yaw_node is not None else 0.0
    start_fields.finish()

    noise = NoiseModel()
    noise_node = top.optional("noise")
    if noise_node is not None:
        nf = yamlio.Fields(noise_node, "noise")
        sigma_xy_node = nf.optional("sigma_xy")
        sigma_yaw_node = nf.optional("sigma_yaw")
        nf.finish()
        try:
            noise = NoiseModel(
                sigma_xy=yamlio.as_float(sigma_xy_node, "sigma_xy") if sigma_xy_node is not None else 0.05,
                sigma_yaw=yamlio.as_float(sigma_yaw_node, "sigma_yaw") if sigma_yaw_node is not None else 0.01,
            )
        except ValueError as exc:
            raise ParseError(str(path), noise_node.line, str(exc)) from exc

    lights: list[TrafficLight] = []
    lights_node = top.optional("lights")
    if lights_node is not None:
        for entry in yamlio.as_list(lights_node, "lights"):
            f = yamlio.Fields(entry, "light entry")
            offset_node = f.optional("offset_s")
            try:
                light = TrafficLight(
                    id=yamlio.as_str(f.require("id"), "light id"),
                    x=yamlio.as_float(f.require("x"), "light x"),
                    y=yamlio.as_float(f.require("y"), "light y"),
                    red_s=yamlio.as_float(f.require("red_s"), "red_s"),
                    green_s=yamlio.as_float(f.require("green_s"), "green_s"),
                    offset_s=yamlio.as_float(offset_node, "offset_s") if offset_node is not None else 0.0,
                )
            except ValueError as exc:
                raise ParseError(str(path), entry.line, str(exc)) from exc
            f.finish()
            if any(l.id == light.id for l in lights):
                raise ParseError(str(path), entry.line, f"duplicate light id {light.id!r}")
            lights.append(light)

    crossings: list[CrossingZone] = []
    crossings_node = top.optional("crossings")
    if crossings_node is not None:
        for entry in yamlio.as_list(crossings_node, "crossings"):
            f = yamlio.Fields(entry, "crossing entry")
            zone_id = yamlio.as_str(f.require("id"), "crossing id")
            polygon = tuple(
                yamlio.as_xy(p, "polygon vertex") for p in yamlio.as_list(f.require("polygon"), "polygon")
            )
            light_node = f.optional("light")
            light_id = yamlio.as_str(light_node, "crossing light") if light_node is not None else None
            f.finish()
            if light_id is not None and not any(l.id == light_id for l in lights):
                raise ParseError(str(path), entry.line, f"crossing {zone_id!r} references unknown light {light_id!r}")
            try:
                zone = CrossingZone(id=zone_id, polygon=polygon, light_id=light_id)
            except ValueError as exc:
                raise ParseError(str(path), entry.line, str(exc)) from exc
            if any(z.id == zone.id for z in crossings):
                raise ParseError(str(path), entry.line, f"duplicate crossing id {zone.id!r}")
            crossings.append(zone)

    pedestrians: list[Pedestrian] = []
    peds_node = top.optional("pedestrians")
    if peds_node is not None:
        for entry in yamlio.as_list(peds_node, "pedestrians"):
            f = yamlio.Fields(entry, "pedestrian entry")
            ped_id = yamlio.as_str(f.require("id"), "pedestrian id")
            ped_path = tuple(yamlio.as_xy(p, "path point") for p in yamlio.as_list(f.require("path"), "path"))
            speed = yamlio.as_float(f.require("speed"), "speed")
            loop_node = f.optional("loop")
            loop = yamlio.as_bool(loop_node, "loop") if loop_node is not None else True
            f.finish()
            if not ped_path:
                raise ParseError(str(path), entry.line, f"pedestrian {ped_id!r} needs at least one path point")
            if speed < 0.0:
                raise ParseError(str(path), entry.line, f"pedestrian {ped_id!r} speed must be >= 0")
            if any(p.id == ped_id for p in pedestrians):
                raise ParseError(str(path), entry.line, f"duplicate pedestrian id {ped_id!r}")
            pedestrians.append(Pedestrian(id=ped_id, path=ped_path, speed=speed, loop=loop))

    overrides: dict = {}
    config_node = top.optional("config")
    if config_node is not None:
        for key, value_node in yamlio.as_map(config_node, "config").items():
            if isinstance(value_node.value, bool) or not isinstance(value_node.value, (int, float)):
                raise value_node.error(f"config override {key!r} must be a number")
            overrides[key] = value_node.value

    expected_node = top.optional("expected_destination")
    expected = yamlio.as_str(expected_node, "expected_destination") if expected_node is not None else None
    top.finish()

    return Scenario(
        name=name,
        task=task,
        instruction=instruction,
        fixture_path=fixture_path,
        origin=origin,
        start=LocalPose(sx, sy, syaw),
        noise=noise,
        lights=tuple(lights),
        crossings=tuple(crossings),
        pedestrians=tuple(pedestrians),
        config_overrides=overrides,
        expected_destination=expected,
        path=path,
    )


def build_world(scenario: Scenario, seed: int) -> WorldState:
    """Fresh WorldState for one trial of this scenario."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return WorldState(
        robot=scenario.start,
        robot_speed=0.0,
        pedestrians=scenario.pedestrians,
        lights=scenario.lights,
        crossings=scenario.crossings,
        clock=0.0,
        step_count=0,
        rng_seed=seed,
    )


def builtin_scenario_dir() -> Path:
    return Path(str(resources.files("wayfarer").joinpath("data/scenarios")))


def list_builtin_scenarios() -> list[str]:
    return sorted(p.stem for p in builtin_scenario_dir().glob("*.yaml"))


def resolve_scenario_path(name_or_path: str) -> Path:
    """Accept either a filesystem path or a shipped scenario's bare name."""
    direct = Path(name_or_path)
    if direct.exists():
        return direct
    builtin = builtin_scenario_dir() / f"{name_or_path}.yaml"
    if builtin.exists():
        return builtin
    raise FileNotFoundError(
        f"no scenario file at {name_or_path!r} and no built-in scenario of that name "
        f"(built-ins: {', '.join(list_builtin_scenarios()) or 'none'})"
    )

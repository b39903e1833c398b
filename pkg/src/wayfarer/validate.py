"""Structural checks behind the CLI `validate` subcommand.

Parsing already rejects malformed documents; these checks catch semantically
broken ones: disconnected route pairs, cached routes that are not shortest
paths, self-intersecting crossing polygons, unroutable POIs, and scenario
references that do not resolve against their fixture.
"""

from __future__ import annotations

from .errors import NoRouteFound, ParseError
from .geodesy import LocalFrame, haversine_distance, to_local
from .map_service import SNAP_RADIUS_M, FixtureMapService
from .scenario import Scenario
from .sim import segments_intersect


def fixture_issues(service: FixtureMapService) -> list[str]:
    issues: list[str] = []

    for poi in service.pois:
        nearest = min(haversine_distance(poi.location, loc) for loc in service.nodes.values())
        if nearest > SNAP_RADIUS_M:
            issues.append(
                f"poi {poi.id!r} is {nearest:.0f} m from the nearest path node; no route can reach it"
            )

    for route in service.named_routes:
        try:
            best, edge_indices = service.shortest_path(route.start, route.end)
        except NoRouteFound:
            issues.append(f"route {route.name!r}: nodes {route.start!r} and {route.end!r} are disconnected")
            continue
        # The cached node list must chain along real edges...
        cached = 0.0
        broken = False
        for a, b in zip(route.nodes, route.nodes[1:]):
            edge = next(
                (e for e in service.edges if {e.a, e.b} == {a, b}),
                None,
            )
            if edge is None:
                issues.append(f"route {route.name!r}: no edge between {a!r} and {b!r}")
                broken = True
                break
            cached += edge.length_m
        # ...and be a shortest path, or the cache is stale.
        if not broken and cached > best + 1e-6:
            issues.append(
                f"route {route.name!r} caches {cached:.1f} m but the shortest path is {best:.1f} m"
            )
    return issues


def _polygon_issues(zone_id: str, polygon: tuple[tuple[float, float], ...]) -> list[str]:
    issues: list[str] = []
    n = len(polygon)
    area = 0.0
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        area += x1 * y2 - x2 * y1
    if abs(area) < 1e-9:
        issues.append(f"crossing {zone_id!r}: polygon has (near) zero area")
    for i in range(n):
        for j in range(i + 1, n):
            # Adjacent edges legitimately share one vertex.
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n]):
                issues.append(f"crossing {zone_id!r}: polygon edges {i} and {j} self-intersect")
    return issues


def scenario_issues(scenario: Scenario) -> list[str]:
    issues: list[str] = []

    try:
        service = FixtureMapService(scenario.fixture_path)
    except ParseError as exc:
        return [f"fixture does not load: {exc}"]
    issues.extend(f"fixture: {msg}" for msg in fixture_issues(service))

    if scenario.expected_destination is not None:
        if not any(p.id == scenario.expected_destination for p in service.pois):
            issues.append(
                f"expected_destination {scenario.expected_destination!r} is not a POI in fixture {service.name!r}"
            )

    frame = LocalFrame(scenario.origin)
    nearest_node = min(
        haversine_distance(scenario.origin, loc) for loc in service.nodes.values()
    )
    if nearest_node > 10_000.0:
        issues.append(f"frame origin is {nearest_node / 1000:.1f} km from the fixture graph")
    start_to_node = min(
        (scenario.start.x - to_local(frame, loc)[0]) ** 2 + (scenario.start.y - to_local(frame, loc)[1]) ** 2
        for loc in service.nodes.values()
    )
    if start_to_node**0.5 > SNAP_RADIUS_M:
        issues.append(f"start pose is {start_to_node ** 0.5:.0f} m from the nearest path node")

    for zone in scenario.crossings:
        issues.extend(_polygon_issues(zone.id, zone.polygon))

    for light in scenario.lights:
        if light.red_s + light.green_s < 1.0:
            issues.append(f"light {light.id!r}: cycle shorter than 1 s is almost certainly a typo")

    for ped in scenario.pedestrians:
        if ped.speed > 3.0:
            issues.append(f"pedestrian {ped.id!r}: speed {ped.speed} m/s is not a walking pace")

    return issues

"""Map-service client: POI search and pedestrian walking routes.

The public interface mirrors what commercial map services expose (ranked POI
search, turn-by-turn walking routes with crossing/signal annotations). The
shipped backend is fixture-based: it loads a versioned YAML document holding
POIs, a pedestrian graph with per-edge semantic cues, and a cache of named
routes, and answers route queries with shortest paths over that graph. A live
HTTP backend can implement the same two methods without touching callers.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from . import yamlio
from .errors import FixtureMissing, NoRouteFound, ParseError
from .geodesy import GeoPoint, haversine_distance

SEMANTIC_CUES = ("none", "crossing", "traffic_light")

# How far a route endpoint may sit from the nearest graph node before the
# fixture is considered to not cover it.
SNAP_RADIUS_M = 50.0

# Rough coverage test: queries further than this from every node are treated
# as outside the mapped region entirely.
COVERAGE_RADIUS_M = 100_000.0

DEFAULT_STEP_TEXT = "continue straight"


@dataclass(frozen=True)
class PoiCandidate:
    """One ranked place returned by a POI search."""

    id: str
    name: str
    category: str
    location: GeoPoint
    rank: int

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError(f"rank must be >= 0, got {self.rank}")


@dataclass(frozen=True)
class RouteStep:
    """One turn-by-turn walking step with its polyline and semantic cue."""

    polyline: tuple[GeoPoint, ...]
    instruction_text: str
    semantic_cue: str = "none"

    def __post_init__(self):
        if len(self.polyline) < 2:
            raise ValueError("step polyline needs at least 2 points")
        if self.semantic_cue not in SEMANTIC_CUES:
            raise ValueError(f"unknown semantic cue {self.semantic_cue!r}")
        for a, b in zip(self.polyline, self.polyline[1:]):
            if haversine_distance(a, b) <= 1e-9:
                raise ValueError("step polyline contains coincident points")

    @property
    def start(self) -> GeoPoint:
        return self.polyline[0]

    @property
    def end(self) -> GeoPoint:
        return self.polyline[-1]

    def length_m(self) -> float:
        return sum(haversine_distance(a, b) for a, b in zip(self.polyline, self.polyline[1:]))


@dataclass(frozen=True)
class WalkingRoute:
    """An ordered chain of RouteSteps between snapped endpoints."""

    steps: tuple[RouteStep, ...]
    origin: GeoPoint
    destination: GeoPoint

    def __post_init__(self):
        if not self.steps:
            raise ValueError("route has no steps")
        for k, (a, b) in enumerate(zip(self.steps, self.steps[1:])):
            gap = haversine_distance(a.end, b.start)
            if gap > 1.0:
                raise ValueError(f"steps {k} and {k + 1} do not chain (gap {gap:.2f} m)")
        if self.length_m() <= 0.0:
            raise ValueError("route has zero length")

    def length_m(self) -> float:
        return sum(step.length_m() for step in self.steps)


class MapClient(Protocol):
    """What the rest of the pipeline needs from a map service."""

    def poi_search(self, category: str, near: GeoPoint, radius_m: float, limit: int) -> list[PoiCandidate]:
        ...

    def walking_route(self, origin: GeoPoint, destination: GeoPoint) -> WalkingRoute:
        ...


@dataclass(frozen=True)
class GraphEdge:
    a: str
    b: str
    cue: str
    text: str
    length_m: float


@dataclass(frozen=True)
class NamedRoute:
    name: str
    start: str
    end: str
    nodes: tuple[str, ...]


class FixtureMapService:
    """Deterministic map backend over an authored fixture document."""

    def __init__(self, path: str | Path):
        self.path = str(path)
        self.name = ""
        self.pois: list[PoiCandidate] = []
        self.nodes: dict[str, GeoPoint] = {}
        self.edges: list[GraphEdge] = []
        self.named_routes: list[NamedRoute] = []
        self._adjacency: dict[str, list[tuple[str, int]]] = {}
        self._load(yamlio.load_file(path))

    # -- loading ----------------------------------------------------------

    def _geo(self, fields: yamlio.Fields, what: str) -> GeoPoint:
        lat_node = fields.require("lat")
        lon_node = fields.require("lon")
        try:
            return GeoPoint(yamlio.as_float(lat_node, "lat"), yamlio.as_float(lon_node, "lon"))
        except ValueError as exc:
            raise ParseError(self.path, lat_node.line, f"{what}: {exc}") from exc

    def _load(self, doc: yamlio.Node) -> None:
        top = yamlio.Fields(doc, "fixture document")
        version = yamlio.as_int(top.require("version"), "version")
        if version != 1:
            raise ParseError(self.path, doc.line, f"unsupported fixture version {version}")
        self.name = yamlio.as_str(top.require("name"), "name")

        seen_rank: set[int] = set()
        seen_poi: set[str] = set()
        for entry in yamlio.as_list(top.require("pois"), "pois"):
            f = yamlio.Fields(entry, "poi entry")
            poi = PoiCandidate(
                id=yamlio.as_str(f.require("id"), "poi id"),
                name=yamlio.as_str(f.require("name"), "poi name"),
                category=yamlio.as_str(f.require("category"), "poi category"),
                location=self._geo(f, "poi location"),
                rank=yamlio.as_int(f.require("rank"), "poi rank"),
            )
            f.finish()
            if poi.id in seen_poi:
                raise ParseError(self.path, entry.line, f"duplicate poi id {poi.id!r}")
            if poi.rank in seen_rank:
                raise ParseError(self.path, entry.line, f"duplicate poi rank {poi.rank}")
            seen_poi.add(poi.id)
            seen_rank.add(poi.rank)
            self.pois.append(poi)

        graph = yamlio.Fields(top.require("graph"), "graph")
        for entry in yamlio.as_list(graph.require("nodes"), "graph nodes"):
            f = yamlio.Fields(entry, "graph node")
            node_id = yamlio.as_str(f.require("id"), "node id")
            location = self._geo(f, "node location")
            f.finish()
            if node_id in self.nodes:
                raise ParseError(self.path, entry.line, f"duplicate node id {node_id!r}")
            self.nodes[node_id] = location

        for entry in yamlio.as_list(graph.require("edges"), "graph edges"):
            f = yamlio.Fields(entry, "graph edge")
            a = yamlio.as_str(f.require("a"), "edge endpoint a")
            b = yamlio.as_str(f.require("b"), "edge endpoint b")
            cue_node = f.optional("cue")
            cue = yamlio.as_str(cue_node, "edge cue") if cue_node is not None else "none"
            text_node = f.optional("text")
            text = yamlio.as_str(text_node, "edge text") if text_node is not None else DEFAULT_STEP_TEXT
            f.finish()
            for endpoint in (a, b):
                if endpoint not in self.nodes:
                    raise ParseError(self.path, entry.line, f"edge references unknown node {endpoint!r}")
            if cue not in SEMANTIC_CUES:
                raise ParseError(self.path, entry.line, f"unknown edge cue {cue!r} (expected one of {SEMANTIC_CUES})")
            length = haversine_distance(self.nodes[a], self.nodes[b])
            if length <= 1e-9:
                raise ParseError(self.path, entry.line, f"edge {a!r}-{b!r} has zero length")
            self.edges.append(GraphEdge(a, b, cue, text, length))
        graph.finish()

        routes_node = top.optional("routes")
        if routes_node is not None:
            for entry in yamlio.as_list(routes_node, "routes"):
                f = yamlio.Fields(entry, "named route")
                route = NamedRoute(
                    name=yamlio.as_str(f.require("name"), "route name"),
                    start=yamlio.as_str(f.require("from"), "route from"),
                    end=yamlio.as_str(f.require("to"), "route to"),
                    nodes=tuple(
                        yamlio.as_str(n, "route node") for n in yamlio.as_list(f.require("nodes"), "route nodes")
                    ),
                )
                f.finish()
                for node_id in route.nodes + (route.start, route.end):
                    if node_id not in self.nodes:
                        raise ParseError(self.path, entry.line, f"route references unknown node {node_id!r}")
                if len(route.nodes) < 2 or route.nodes[0] != route.start or route.nodes[-1] != route.end:
                    raise ParseError(self.path, entry.line, f"route {route.name!r} node list must run from 'from' to 'to'")
                self.named_routes.append(route)
        top.finish()

        self._adjacency = {node_id: [] for node_id in self.nodes}
        for idx, edge in enumerate(self.edges):
            self._adjacency[edge.a].append((edge.b, idx))
            self._adjacency[edge.b].append((edge.a, idx))

    # -- queries ----------------------------------------------------------

    def _check_coverage(self, p: GeoPoint) -> None:
        if not self.nodes:
            raise FixtureMissing(f"fixture {self.name!r} has no graph data")
        nearest = min(haversine_distance(p, loc) for loc in self.nodes.values())
        if nearest > COVERAGE_RADIUS_M:
            raise FixtureMissing(f"fixture {self.name!r} has no data near ({p.lat:.4f}, {p.lon:.4f})")

    def poi_search(self, category: str, near: GeoPoint, radius_m: float, limit: int) -> list[PoiCandidate]:
        """Ranked POIs of `category` within `radius_m` of `near`, at most `limit`."""
        if radius_m <= 0.0:
            raise ValueError(f"radius must be positive, got {radius_m}")
        if limit < 1:
            raise ValueError(f"limit must be >= 1, got {limit}")
        self._check_coverage(near)
        wanted = category.strip().lower()
        hits = [
            poi
            for poi in self.pois
            if poi.category.lower() == wanted and haversine_distance(near, poi.location) <= radius_m
        ]
        hits.sort(key=lambda poi: poi.rank)
        return hits[:limit]

    def _snap(self, p: GeoPoint, label: str) -> str:
        self._check_coverage(p)
        best_id, best_dist = "", math.inf
        for node_id in sorted(self.nodes):
            d = haversine_distance(p, self.nodes[node_id])
            if d < best_dist:
                best_id, best_dist = node_id, d
        if best_dist > SNAP_RADIUS_M:
            raise FixtureMissing(
                f"{label} ({p.lat:.5f}, {p.lon:.5f}) is {best_dist:.0f} m from the nearest mapped path"
            )
        return best_id

    def shortest_path(self, start: str, end: str) -> tuple[float, list[int]]:
        """Dijkstra over the pedestrian graph; returns (meters, edge indices).

        Ties are broken by node id so results are stable across runs.
        """
        dist: dict[str, float] = {start: 0.0}
        prev: dict[str, tuple[str, int]] = {}
        done: set[str] = set()
        heap: list[tuple[float, str]] = [(0.0, start)]
        while heap:
            d, node = heapq.heappop(heap)
            if node in done:
                continue
            done.add(node)
            if node == end:
                break
            for other, edge_idx in self._adjacency[node]:
                nd = d + self.edges[edge_idx].length_m
                if nd < dist.get(other, math.inf):
                    dist[other] = nd
                    prev[other] = (node, edge_idx)
                    heapq.heappush(heap, (nd, other))
        if end not in done:
            raise NoRouteFound(f"no pedestrian route between nodes {start!r} and {end!r}")
        path: list[int] = []
        node = end
        while node != start:
            node, edge_idx = prev[node]
            path.append(edge_idx)
        path.reverse()
        return dist[end], path

    def walking_route(self, origin: GeoPoint, destination: GeoPoint) -> WalkingRoute:
        """Shortest walking route between the snapped endpoints."""
        if haversine_distance(origin, destination) < 1e-9:
            raise NoRouteFound("origin and destination coincide; nothing to route")
        start = self._snap(origin, "route origin")
        end = self._snap(destination, "route destination")
        if start == end:
            raise NoRouteFound(f"origin and destination both map to node {start!r}; nothing to route")
        _, edge_indices = self.shortest_path(start, end)
        steps: list[RouteStep] = []
        node = start
        for edge_idx in edge_indices:
            edge = self.edges[edge_idx]
            other = edge.b if edge.a == node else edge.a
            steps.append(
                RouteStep(
                    polyline=(self.nodes[node], self.nodes[other]),
                    instruction_text=edge.text,
                    semantic_cue=edge.cue,
                )
            )
            node = other
        return WalkingRoute(steps=tuple(steps), origin=self.nodes[start], destination=self.nodes[end])

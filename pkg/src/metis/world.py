"""Scenario data model: building geometry, entities, validation and the file format.

A scenario is a static top-down description of one building floor on the
(x, z) plane, units in meters: thick wall segments, doors attached to walls
(optionally marked as exits), obstacles, safe areas, ordered spawn areas,
pedestrian types and placements, and fire sources. Scenario values are
immutable after load/validation and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Iterable

import numpy as np

from .errors import DegenerateBounds, ParseError, VersionError
from .geometry import (
    obb_from_rect,
    obb_from_segment,
    points_in_circles,
    points_in_obbs,
    project_point_segment,
)

SCHEMA_VERSION = 1

GRID_PITCH = 0.5
SNAP_TOLERANCE = 0.25
DEFAULT_WALL_THICKNESS = 0.2
# bbox padding beyond the geometry envelope so containment is strict
BBOX_PAD = 0.25

OBSTACLE_KINDS = ("desk", "cabinet", "shelf", "plant", "generic")


@dataclass
class WallSegment:
    a: tuple[float, float]
    b: tuple[float, float]
    thickness: float = DEFAULT_WALL_THICKNESS


@dataclass
class Door:
    wall_index: int
    center: tuple[float, float]
    width: float
    exit: bool = False
    open: bool = True


@dataclass
class Obstacle:
    kind: str = "generic"
    # exactly one of rect / circle is set
    rect: tuple[float, float, float, float] | None = None
    circle: tuple[float, float, float] | None = None


@dataclass
class SafeArea:
    region: tuple[float, float, float, float]


@dataclass
class SpawnArea:
    region: tuple[float, float, float, float]
    order: int


@dataclass
class PedestrianType:
    name: str
    speed: float = 3.0
    radius: float = 0.25
    color: str = "#3A7BD5"
    health: float = 100.0


@dataclass
class PedestrianPlacement:
    type: str
    position: tuple[float, float]


@dataclass
class FireSource:
    origin: tuple[float, float]
    max_radius: float = 3.0
    growth_rate: float = 0.25
    patch_rate: int = 3
    ignition_tick: int = 0


@dataclass
class FireConfig:
    """Per-scenario fire tuning: growth cadence, patch size, contact damage."""

    growth_interval: float = 1.0  # seconds of simulated time between growth ticks
    patch_radius: float = 0.5
    damage_rate: float = 50.0  # hp per second of fire contact


@dataclass
class ValidationIssue:
    code: str
    entity: str = ""
    detail: str = ""


@dataclass
class Scenario:
    id: str = "scenario"
    name: str = ""
    walls: list[WallSegment] = field(default_factory=list)
    doors: list[Door] = field(default_factory=list)
    obstacles: list[Obstacle] = field(default_factory=list)
    safe_areas: list[SafeArea] = field(default_factory=list)
    spawn_areas: list[SpawnArea] = field(default_factory=list)
    pedestrian_types: list[PedestrianType] = field(default_factory=list)
    pedestrians: list[PedestrianPlacement] = field(default_factory=list)
    fire_sources: list[FireSource] = field(default_factory=list)
    fire: FireConfig = field(default_factory=FireConfig)
    _bbox: tuple | None = field(default=None, compare=False, repr=False)
    _compiled: "CompiledGeometry | None" = field(default=None, compare=False, repr=False)

    @property
    def bbox(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Derived axis-aligned bounds, geometry envelope plus a pad."""
        if self._bbox is None:
            object.__setattr__(self, "_bbox", _derive_bbox(self))
        return self._bbox

    def exits(self) -> list[tuple[int, Door]]:
        return [(i, d) for i, d in enumerate(self.doors) if d.exit]


def _wall_corners(w: WallSegment) -> np.ndarray:
    obb = obb_from_segment(w.a, w.b, w.thickness)
    cx, cz, ux, uz, hl, hw = obb
    u = np.array([ux, uz])
    n = np.array([-uz, ux])
    c = np.array([cx, cz])
    return np.array([c + hl * u + hw * n, c + hl * u - hw * n,
                     c - hl * u + hw * n, c - hl * u - hw * n])


def _derive_bbox(s: Scenario):
    pts: list[tuple[float, float]] = []
    for w in s.walls:
        pts.extend(map(tuple, _wall_corners(w)))
    for o in s.obstacles:
        if o.rect is not None:
            x0, z0, x1, z1 = o.rect
            pts += [(x0, z0), (x1, z1)]
        elif o.circle is not None:
            cx, cz, r = o.circle
            pts += [(cx - r, cz - r), (cx + r, cz + r)]
    for area in list(s.safe_areas) + list(s.spawn_areas):
        x0, z0, x1, z1 = area.region
        pts += [(x0, z0), (x1, z1)]
    if not pts:
        return ((0.0, 0.0), (0.0, 0.0))
    arr = np.asarray(pts, dtype=float)
    lo = arr.min(axis=0) - BBOX_PAD
    hi = arr.max(axis=0) + BBOX_PAD
    return ((float(lo[0]), float(lo[1])), (float(hi[0]), float(hi[1])))


def normalize_point(scenario: Scenario, p) -> tuple[float, float]:
    """Map a world point into [0,1]^2 relative to the scenario bounds."""
    (x0, z0), (x1, z1) = scenario.bbox
    w, h = x1 - x0, z1 - z0
    if w <= 0 or h <= 0:
        raise DegenerateBounds(f"bbox has zero extent: {scenario.bbox}")
    return ((p[0] - x0) / w, (p[1] - z0) / h)


def snap(scenario: Scenario, p, mode: str = "grid",
         pitch: float = GRID_PITCH, tolerance: float = SNAP_TOLERANCE):
    """Snap a point to the grid or to the nearest wall/obstacle edge.

    Grid mode rounds each coordinate to the nearest pitch multiple. Edge mode
    projects onto the closest wall centerline or obstacle boundary when that
    edge is within tolerance, otherwise returns the point unchanged.
    """
    if mode == "grid":
        return (
            math.floor(p[0] / pitch + 0.5) * pitch,
            math.floor(p[1] / pitch + 0.5) * pitch,
        )
    if mode != "edge":
        raise ValueError(f"unknown snap mode: {mode!r}")
    best = None
    best_dist = tolerance
    for w in scenario.walls:
        q, _, dist = project_point_segment(p, w.a, w.b)
        if dist <= best_dist:
            best, best_dist = tuple(q), dist
    for o in scenario.obstacles:
        if o.rect is not None:
            x0, z0, x1, z1 = o.rect
            edges = [((x0, z0), (x1, z0)), ((x1, z0), (x1, z1)),
                     ((x1, z1), (x0, z1)), ((x0, z1), (x0, z0))]
            for a, b in edges:
                q, _, dist = project_point_segment(p, a, b)
                if dist <= best_dist:
                    best, best_dist = tuple(q), dist
        elif o.circle is not None:
            cx, cz, r = o.circle
            d = math.hypot(p[0] - cx, p[1] - cz)
            dist = abs(d - r)
            if dist <= best_dist and d > 1e-12:
                q = (cx + (p[0] - cx) * r / d, cz + (p[1] - cz) * r / d)
                best, best_dist = q, dist
    return best if best is not None else (float(p[0]), float(p[1]))


def nearest_exit(scenario: Scenario, p) -> tuple[int, Door]:
    """Closest exit door to a point; ties break toward the lowest door index."""
    best = None
    best_d = math.inf
    for i, door in scenario.exits():
        d = math.hypot(p[0] - door.center[0], p[1] - door.center[1])
        if d < best_d - 1e-12:
            best, best_d = (i, door), d
    if best is None:
        raise ValueError("scenario has no exit door")
    return best


# ---------------------------------------------------------------------------
# validation

def validate(scenario: Scenario) -> list[ValidationIssue]:
    """Check every scenario invariant; an empty list means the scenario is valid.

    Issues are data, not failures: the editor keeps invalid intermediate
    states and surfaces these codes to the user.
    """
    issues: list[ValidationIssue] = []

    if not any(d.exit for d in scenario.doors):
        issues.append(ValidationIssue("MissingExit", detail="no door is marked as an exit"))
    # a scenario is peopled either by placements or by spawn areas
    if not scenario.pedestrians and not scenario.spawn_areas:
        issues.append(ValidationIssue("NoPedestrians", detail="no pedestrians and no spawn areas"))
    if not scenario.walls:
        issues.append(ValidationIssue("NoWalls"))

    for i, w in enumerate(scenario.walls):
        if w.a == w.b:
            issues.append(ValidationIssue("DegenerateWall", f"walls[{i}]"))
        if w.thickness <= 0:
            issues.append(ValidationIssue("BadWallThickness", f"walls[{i}]"))

    for i, d in enumerate(scenario.doors):
        ent = f"doors[{i}]"
        if d.width <= 0:
            issues.append(ValidationIssue("BadDoorWidth", ent))
        if not (0 <= d.wall_index < len(scenario.walls)):
            issues.append(ValidationIssue("DoorOffWall", ent, "wall_index out of range"))
            continue
        wall = scenario.walls[d.wall_index]
        _, _, dist = project_point_segment(d.center, wall.a, wall.b)
        if dist > SNAP_TOLERANCE:
            issues.append(ValidationIssue("DoorOffWall", ent, f"{dist:.3f} m from wall"))

    for i, o in enumerate(scenario.obstacles):
        ent = f"obstacles[{i}]"
        if o.kind not in OBSTACLE_KINDS:
            issues.append(ValidationIssue("BadObstacleKind", ent, o.kind))
        if o.rect is not None:
            x0, z0, x1, z1 = o.rect
            if x1 <= x0 or z1 <= z0:
                issues.append(ValidationIssue("BadObstacle", ent, "non-positive area"))
        elif o.circle is not None:
            if o.circle[2] <= 0:
                issues.append(ValidationIssue("BadObstacle", ent, "non-positive radius"))
        else:
            issues.append(ValidationIssue("BadObstacle", ent, "no shape"))

    for i, a in enumerate(scenario.safe_areas):
        x0, z0, x1, z1 = a.region
        if x1 <= x0 or z1 <= z0:
            issues.append(ValidationIssue("BadSafeArea", f"safe_areas[{i}]"))

    orders = [a.order for a in scenario.spawn_areas]
    if orders and sorted(orders) != list(range(1, len(orders) + 1)):
        issues.append(ValidationIssue("SpawnOrderInvalid", "spawn_areas",
                                      f"orders {sorted(orders)} are not 1..{len(orders)}"))
    wall_obbs = np.array([obb_from_segment(w.a, w.b, w.thickness)
                          for w in scenario.walls if w.a != w.b])
    for i, a in enumerate(scenario.spawn_areas):
        ent = f"spawn_areas[{i}]"
        x0, z0, x1, z1 = a.region
        if x1 <= x0 or z1 <= z0:
            issues.append(ValidationIssue("BadSpawnArea", ent))
            continue
        if wall_obbs.size and _rect_hits_obbs((x0, z0, x1, z1), wall_obbs):
            issues.append(ValidationIssue("SpawnOnWall", ent))

    names = set()
    for i, t in enumerate(scenario.pedestrian_types):
        ent = f"pedestrian_types[{i}]"
        if t.speed <= 0 or t.radius <= 0 or t.health <= 0:
            issues.append(ValidationIssue("BadPedestrianType", ent, t.name))
        if t.name in names:
            issues.append(ValidationIssue("DuplicatePedestrianType", ent, t.name))
        names.add(t.name)

    (bx0, bz0), (bx1, bz1) = scenario.bbox
    for i, p in enumerate(scenario.pedestrians):
        ent = f"pedestrians[{i}]"
        if p.type not in names:
            issues.append(ValidationIssue("UnknownPedestrianType", ent, p.type))
        x, z = p.position
        if not (bx0 <= x <= bx1 and bz0 <= z <= bz1):
            issues.append(ValidationIssue("PedestrianOutsideBounds", ent))
            continue
        pt = np.array([[x, z]])
        if wall_obbs.size and bool(points_in_obbs(pt, wall_obbs).any()):
            issues.append(ValidationIssue("PedestrianInGeometry", ent, "inside a wall"))
            continue
        rects = np.array([obb_from_rect(o.rect[:2], o.rect[2:])
                          for o in scenario.obstacles if o.rect is not None])
        circles = np.array([o.circle for o in scenario.obstacles if o.circle is not None])
        if (rects.size and bool(points_in_obbs(pt, rects).any())) or (
                circles.size and bool(points_in_circles(pt, circles).any())):
            issues.append(ValidationIssue("PedestrianInGeometry", ent, "inside an obstacle"))

    for i, f in enumerate(scenario.fire_sources):
        ent = f"fire_sources[{i}]"
        if f.max_radius <= 0 or f.growth_rate <= 0 or f.patch_rate < 1:
            issues.append(ValidationIssue("BadFireSource", ent))

    return issues


def _rect_hits_obbs(rect, obbs: np.ndarray) -> bool:
    """Coarse rect-vs-obb overlap: samples the rect border and interior grid."""
    x0, z0, x1, z1 = rect
    xs = np.linspace(x0, x1, 9)
    zs = np.linspace(z0, z1, 9)
    gx, gz = np.meshgrid(xs, zs)
    pts = np.column_stack([gx.ravel(), gz.ravel()])
    return bool(points_in_obbs(pts, obbs).any())


# ---------------------------------------------------------------------------
# compiled geometry for raycasting and collision

@dataclass
class CompiledGeometry:
    """Scenario geometry flattened into category arrays for fast queries.

    Walls are cut at every door span; door panels become their own oriented
    boxes. Movement solids are wall pieces, closed non-exit door panels,
    and obstacles. Exit doors never block (treated as open).
    """

    wall_obbs: np.ndarray
    door_obbs: np.ndarray          # all non-exit door panels (detection)
    door_obbs_closed: np.ndarray   # closed non-exit panels (blocking/solid)
    exit_obbs: np.ndarray          # exit door panels (detection only)
    obstacle_obbs: np.ndarray
    obstacle_circles: np.ndarray
    solid_obbs: np.ndarray
    solid_circles: np.ndarray

    def detection_geometry(self, category: str, fire_circles: np.ndarray):
        if category == "wall":
            return self.wall_obbs, _EMPTY_CIRCLES
        if category == "door":
            return self.door_obbs, _EMPTY_CIRCLES
        if category == "exit_door":
            return self.exit_obbs, _EMPTY_CIRCLES
        if category == "static_object":
            return self.obstacle_obbs, self.obstacle_circles
        if category == "fire":
            return _EMPTY_OBBS, fire_circles
        raise ValueError(f"unknown category: {category!r}")

    def blocking_geometry(self, category: str, fire_circles: np.ndarray):
        # closed doors block; open and exit doors do not
        if category == "door":
            return self.door_obbs_closed, _EMPTY_CIRCLES
        if category == "exit_door":
            return _EMPTY_OBBS, _EMPTY_CIRCLES
        return self.detection_geometry(category, fire_circles)


_EMPTY_OBBS = np.zeros((0, 6))
_EMPTY_CIRCLES = np.zeros((0, 3))


def compile_geometry(scenario: Scenario) -> CompiledGeometry:
    """Build (and cache) the flattened geometry arrays for a scenario."""
    if scenario._compiled is not None:
        return scenario._compiled

    wall_pieces: list[np.ndarray] = []
    door_all: list[np.ndarray] = []
    door_closed: list[np.ndarray] = []
    exit_panels: list[np.ndarray] = []

    for wi, wall in enumerate(scenario.walls):
        a = np.asarray(wall.a, dtype=float)
        b = np.asarray(wall.b, dtype=float)
        length = float(np.hypot(*(b - a)))
        if length < 1e-9:
            continue
        axis = (b - a) / length
        spans = []
        for door in scenario.doors:
            if door.wall_index != wi:
                continue
            _, t, _ = project_point_segment(door.center, wall.a, wall.b)
            mid = t * length
            lo = max(0.0, mid - door.width / 2.0)
            hi = min(length, mid + door.width / 2.0)
            if hi > lo:
                spans.append((lo, hi))
                panel = obb_from_segment(a + axis * lo, a + axis * hi, wall.thickness)
                if door.exit:
                    exit_panels.append(panel)
                else:
                    door_all.append(panel)
                    if not door.open:
                        door_closed.append(panel)
        # complement of the door spans -> solid wall pieces
        spans.sort()
        cursor = 0.0
        for lo, hi in spans:
            if lo - cursor > 1e-9:
                wall_pieces.append(obb_from_segment(a + axis * cursor, a + axis * lo,
                                                    wall.thickness))
            cursor = max(cursor, hi)
        if length - cursor > 1e-9:
            wall_pieces.append(obb_from_segment(a + axis * cursor, b, wall.thickness))

    obstacle_obbs = [obb_from_rect(o.rect[:2], o.rect[2:])
                     for o in scenario.obstacles if o.rect is not None]
    obstacle_circles = [list(o.circle) for o in scenario.obstacles if o.circle is not None]

    def stack(rows: list, width: int) -> np.ndarray:
        return np.array(rows, dtype=float) if rows else np.zeros((0, width))

    walls = stack(wall_pieces, 6)
    doors = stack(door_all, 6)
    closed = stack(door_closed, 6)
    exits = stack(exit_panels, 6)
    obs_obbs = stack(obstacle_obbs, 6)
    obs_circles = stack(obstacle_circles, 3)
    solids = np.vstack([walls, closed, obs_obbs]) if (
        walls.size + closed.size + obs_obbs.size) else _EMPTY_OBBS

    compiled = CompiledGeometry(
        wall_obbs=walls,
        door_obbs=doors,
        door_obbs_closed=closed,
        exit_obbs=exits,
        obstacle_obbs=obs_obbs,
        obstacle_circles=obs_circles,
        solid_obbs=solids,
        solid_circles=obs_circles,
    )
    object.__setattr__(scenario, "_compiled", compiled)
    return compiled


# ---------------------------------------------------------------------------
# file format (schema version 1)

_TOP_LEVEL_KEYS = ("walls", "doors", "obstacles", "safe_areas", "spawn_areas",
                   "pedestrian_types", "pedestrians", "fire_sources")


def _num(value, loc: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError("expected a number", loc)
    return float(value)


def _point(value, loc: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ParseError("expected [x, z]", loc)
    return (_num(value[0], loc + "[0]"), _num(value[1], loc + "[1]"))


def _quad(value, loc: str) -> tuple[float, float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 4:
        raise ParseError("expected [x0, z0, x1, z1]", loc)
    return tuple(_num(v, f"{loc}[{i}]") for i, v in enumerate(value))


def _color(value, loc: str) -> str:
    if not isinstance(value, str) or len(value) != 7 or value[0] != "#":
        raise ParseError('expected "#RRGGBB"', loc)
    try:
        int(value[1:], 16)
    except ValueError:
        raise ParseError('expected "#RRGGBB"', loc) from None
    return value


def load_scenario(data: bytes | str) -> Scenario:
    """Parse scenario bytes; raises ParseError / VersionError on bad input."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", f"line {e.lineno}") from None
    if not isinstance(doc, dict):
        raise ParseError("document root must be an object", "$")
    if "metis_scenario_version" not in doc:
        raise ParseError("missing key", "metis_scenario_version")
    if doc["metis_scenario_version"] != SCHEMA_VERSION:
        raise VersionError(
            f"unsupported scenario version {doc['metis_scenario_version']!r}")
    for key in _TOP_LEVEL_KEYS:
        if key not in doc:
            raise ParseError("missing key", key)
        if not isinstance(doc[key], list):
            raise ParseError("expected a list", key)

    walls = []
    for i, w in enumerate(doc["walls"]):
        loc = f"walls[{i}]"
        if not isinstance(w, dict):
            raise ParseError("expected an object", loc)
        walls.append(WallSegment(
            a=_point(w.get("a"), loc + ".a"),
            b=_point(w.get("b"), loc + ".b"),
            thickness=_num(w.get("thickness", DEFAULT_WALL_THICKNESS), loc + ".thickness"),
        ))

    doors = []
    for i, d in enumerate(doc["doors"]):
        loc = f"doors[{i}]"
        if not isinstance(d, dict):
            raise ParseError("expected an object", loc)
        if not isinstance(d.get("wall_index"), int) or isinstance(d.get("wall_index"), bool):
            raise ParseError("expected an integer", loc + ".wall_index")
        doors.append(Door(
            wall_index=d["wall_index"],
            center=_point(d.get("center"), loc + ".center"),
            width=_num(d.get("width"), loc + ".width"),
            exit=bool(d.get("exit", False)),
            open=bool(d.get("open", True)),
        ))

    obstacles = []
    for i, o in enumerate(doc["obstacles"]):
        loc = f"obstacles[{i}]"
        if not isinstance(o, dict):
            raise ParseError("expected an object", loc)
        rect = _quad(o["rect"], loc + ".rect") if "rect" in o else None
        circle = None
        if "circle" in o:
            c = o["circle"]
            if not isinstance(c, (list, tuple)) or len(c) != 3:
                raise ParseError("expected [cx, cz, r]", loc + ".circle")
            circle = tuple(_num(v, f"{loc}.circle[{j}]") for j, v in enumerate(c))
        if rect is None and circle is None:
            raise ParseError("obstacle needs rect or circle", loc)
        obstacles.append(Obstacle(kind=str(o.get("kind", "generic")), rect=rect, circle=circle))

    safe_areas = [SafeArea(region=_quad(a.get("region"), f"safe_areas[{i}].region"))
                  for i, a in enumerate(doc["safe_areas"])]

    spawn_areas = []
    for i, a in enumerate(doc["spawn_areas"]):
        loc = f"spawn_areas[{i}]"
        order = a.get("order")
        if not isinstance(order, int) or isinstance(order, bool) or order < 1:
            raise ParseError("expected a positive integer", loc + ".order")
        spawn_areas.append(SpawnArea(region=_quad(a.get("region"), loc + ".region"),
                                     order=order))

    ped_types = []
    for i, t in enumerate(doc["pedestrian_types"]):
        loc = f"pedestrian_types[{i}]"
        if not isinstance(t.get("name"), str):
            raise ParseError("expected a string", loc + ".name")
        ped_types.append(PedestrianType(
            name=t["name"],
            speed=_num(t.get("speed", 3.0), loc + ".speed"),
            radius=_num(t.get("radius", 0.25), loc + ".radius"),
            color=_color(t.get("color", "#3A7BD5"), loc + ".color"),
            health=_num(t.get("health", 100.0), loc + ".health"),
        ))

    pedestrians = []
    for i, p in enumerate(doc["pedestrians"]):
        loc = f"pedestrians[{i}]"
        if not isinstance(p.get("type"), str):
            raise ParseError("expected a string", loc + ".type")
        pedestrians.append(PedestrianPlacement(
            type=p["type"], position=_point(p.get("position"), loc + ".position")))

    fire_sources = []
    for i, f in enumerate(doc["fire_sources"]):
        loc = f"fire_sources[{i}]"
        patch_rate = f.get("patch_rate", 3)
        ignition = f.get("ignition_tick", 0)
        if not isinstance(patch_rate, int) or isinstance(patch_rate, bool):
            raise ParseError("expected an integer", loc + ".patch_rate")
        if not isinstance(ignition, int) or isinstance(ignition, bool):
            raise ParseError("expected an integer", loc + ".ignition_tick")
        fire_sources.append(FireSource(
            origin=_point(f.get("origin"), loc + ".origin"),
            max_radius=_num(f.get("max_radius", 3.0), loc + ".max_radius"),
            growth_rate=_num(f.get("growth_rate", 0.25), loc + ".growth_rate"),
            patch_rate=patch_rate,
            ignition_tick=ignition,
        ))

    fire_cfg = FireConfig()
    if "fire" in doc:
        fc = doc["fire"]
        if not isinstance(fc, dict):
            raise ParseError("expected an object", "fire")
        fire_cfg = FireConfig(
            growth_interval=_num(fc.get("growth_interval", 1.0), "fire.growth_interval"),
            patch_radius=_num(fc.get("patch_radius", 0.5), "fire.patch_radius"),
            damage_rate=_num(fc.get("damage_rate", 50.0), "fire.damage_rate"),
        )

    return Scenario(
        id=str(doc.get("id", "scenario")),
        name=str(doc.get("name", "")),
        walls=walls, doors=doors, obstacles=obstacles,
        safe_areas=safe_areas, spawn_areas=spawn_areas,
        pedestrian_types=ped_types, pedestrians=pedestrians,
        fire_sources=fire_sources, fire=fire_cfg,
    )


def save_scenario(s: Scenario) -> bytes:
    """Serialize a scenario to canonical UTF-8 JSON bytes."""
    doc = {
        "metis_scenario_version": SCHEMA_VERSION,
        "id": s.id,
        "name": s.name,
        "walls": [{"a": list(w.a), "b": list(w.b), "thickness": w.thickness}
                  for w in s.walls],
        "doors": [{"wall_index": d.wall_index, "center": list(d.center),
                   "width": d.width, "exit": d.exit, "open": d.open}
                  for d in s.doors],
        "obstacles": [
            {"kind": o.kind, **({"rect": list(o.rect)} if o.rect is not None
                                else {"circle": list(o.circle)})}
            for o in s.obstacles],
        "safe_areas": [{"region": list(a.region)} for a in s.safe_areas],
        "spawn_areas": [{"region": list(a.region), "order": a.order}
                        for a in s.spawn_areas],
        "pedestrian_types": [{"name": t.name, "speed": t.speed, "radius": t.radius,
                              "color": t.color, "health": t.health}
                             for t in s.pedestrian_types],
        "pedestrians": [{"type": p.type, "position": list(p.position)}
                        for p in s.pedestrians],
        "fire_sources": [{"origin": list(f.origin), "max_radius": f.max_radius,
                          "growth_rate": f.growth_rate, "patch_rate": f.patch_rate,
                          "ignition_tick": f.ignition_tick}
                         for f in s.fire_sources],
        "fire": {"growth_interval": s.fire.growth_interval,
                 "patch_radius": s.fire.patch_radius,
                 "damage_rate": s.fire.damage_rate},
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def canonicalize(data: bytes | str) -> bytes:
    """Parse-then-serialize; the stable byte form the service stores and returns."""
    return save_scenario(load_scenario(data))


def default_pedestrian_type(scenario: Scenario) -> PedestrianType:
    """Type used for curriculum-spawned training agents."""
    if scenario.pedestrian_types:
        return scenario.pedestrian_types[0]
    return PedestrianType(name="adult")


def with_id(scenario: Scenario, new_id: str) -> Scenario:
    return replace(scenario, id=new_id, _bbox=None, _compiled=None)


# ---------------------------------------------------------------------------
# shipped sample buildings

def sample_names() -> list[str]:
    root = resources.files("metis").joinpath("data/scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_sample(name: str) -> Scenario:
    root = resources.files("metis").joinpath("data/scenarios")
    return load_scenario(root.joinpath(f"{name}.json").read_bytes())


def sample_bytes(name: str) -> bytes:
    root = resources.files("metis").joinpath("data/scenarios")
    return root.joinpath(f"{name}.json").read_bytes()

"""Per-agent observations: three raycast sensor sweeps plus six manual features.

Each sensor casts a fan of rays across an arc centered on the agent's heading
and reports, per ray, the normalized distance to the nearest detectable hit
(1.0 when nothing detectable is hit, including when a blocker gets in the way
first). The full observation is 70 values: 20 + 20 + 24 ray features, the
normalized exit position, the normalized agent position, and the world-space
unit direction from agent to exit.

All functions here are pure over immutable inputs; batching over agents is
just a wider origin/heading array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import rays_vs_circles, rays_vs_obbs
from .world import CompiledGeometry, Scenario, compile_geometry, normalize_point

OBS_DIM = 70


@dataclass(frozen=True)
class SensorConfig:
    name: str
    ray_count: int
    ray_length: float
    arc_deg: float
    detectable: frozenset[str]
    blockers: frozenset[str]


# short-range hazard sensor, walled off from seeing into other rooms
SENSOR_A = SensorConfig("A", 20, 15.0, 140.0,
                        frozenset({"static_object", "fire"}),
                        frozenset({"wall", "door"}))
# mid-range structural sensor (walls occlude naturally: they are detectable)
SENSOR_B = SensorConfig("B", 20, 25.0, 80.0,
                        frozenset({"door", "exit_door", "wall"}), frozenset())
# long-range structural sensor
SENSOR_C = SensorConfig("C", 24, 50.0, 140.0,
                        frozenset({"door", "exit_door", "wall"}), frozenset())

SENSORS = (SENSOR_A, SENSOR_B, SENSOR_C)


def ray_offsets(config: SensorConfig) -> np.ndarray:
    """Angular offsets (radians) of each ray relative to the heading.

    Evenly spaced across the arc with both endpoints included, so ray 0 sits
    at -arc/2 and the last ray at +arc/2.
    """
    half = np.deg2rad(config.arc_deg) / 2.0
    if config.ray_count == 1:
        return np.zeros(1)
    return np.linspace(-half, half, config.ray_count)


def _fire_circles(fires) -> np.ndarray:
    if fires is None:
        return np.zeros((0, 3))
    if isinstance(fires, np.ndarray):
        return fires.reshape(-1, 3) if fires.size else np.zeros((0, 3))
    return fires.circles()


def _nearest_hits(origins: np.ndarray, dirs: np.ndarray, categories,
                  compiled: CompiledGeometry, fire_circles: np.ndarray,
                  blocking: bool) -> np.ndarray:
    """Min hit distance per ray across a set of categories (inf = no hit)."""
    t = np.full(len(origins), np.inf)
    for cat in sorted(categories):
        if blocking:
            obbs, circles = compiled.blocking_geometry(cat, fire_circles)
        else:
            obbs, circles = compiled.detection_geometry(cat, fire_circles)
        if len(obbs):
            np.minimum(t, rays_vs_obbs(origins, dirs, obbs).min(axis=1), out=t)
        if len(circles):
            np.minimum(t, rays_vs_circles(origins, dirs, circles).min(axis=1), out=t)
    return t


def sweep_batch(compiled: CompiledGeometry, fires, origins: np.ndarray,
                headings: np.ndarray, config: SensorConfig) -> np.ndarray:
    """Sensor features for many agents at once; shape (n_agents, ray_count)."""
    origins = np.atleast_2d(np.asarray(origins, dtype=float))
    headings = np.atleast_2d(np.asarray(headings, dtype=float))
    n = len(origins)
    r = config.ray_count
    base = np.arctan2(headings[:, 1], headings[:, 0])
    angles = base[:, None] + ray_offsets(config)[None, :]
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1).reshape(n * r, 2)
    flat_origins = np.repeat(origins, r, axis=0)

    circles = _fire_circles(fires)
    detect_t = _nearest_hits(flat_origins, dirs, config.detectable,
                             compiled, circles, blocking=False)
    only_block = config.blockers - config.detectable
    block_t = _nearest_hits(flat_origins, dirs, only_block,
                            compiled, circles, blocking=True)

    detected = (detect_t <= config.ray_length) & (detect_t <= block_t)
    features = np.where(detected, detect_t / config.ray_length, 1.0)
    return features.reshape(n, r)


def cast_ray(scenario: Scenario, fires, origin, direction,
             config: SensorConfig) -> float:
    """Feature for a single ray: d/ray_length on a detectable hit, else 1.0."""
    compiled = compile_geometry(scenario)
    origins = np.asarray(origin, dtype=float).reshape(1, 2)
    dirs = np.asarray(direction, dtype=float).reshape(1, 2)
    circles = _fire_circles(fires)
    detect_t = _nearest_hits(origins, dirs, config.detectable,
                             compiled, circles, blocking=False)[0]
    only_block = config.blockers - config.detectable
    block_t = _nearest_hits(origins, dirs, only_block,
                            compiled, circles, blocking=True)[0]
    if detect_t <= config.ray_length and detect_t <= block_t:
        return float(detect_t / config.ray_length)
    return 1.0


def sweep(scenario: Scenario, fires, agent, config: SensorConfig) -> np.ndarray:
    compiled = compile_geometry(scenario)
    return sweep_batch(compiled, fires, [agent.position], [agent.heading], config)[0]


def observe(scenario: Scenario, fires, agent, exit_door) -> np.ndarray:
    """The 70-value observation for one agent relative to one exit door."""
    return observe_batch(
        scenario, fires,
        np.asarray([agent.position], dtype=float),
        np.asarray([agent.heading], dtype=float),
        np.asarray([exit_door.center], dtype=float),
    )[0]


def observe_batch(scenario: Scenario, fires, positions: np.ndarray,
                  headings: np.ndarray, exit_centers: np.ndarray) -> np.ndarray:
    """Observations for n agents; shape (n, 70). Rows follow the fixed layout:
    sensor A [0..19], B [20..39], C [40..63], then the six manual features.
    """
    compiled = compile_geometry(scenario)
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    headings = np.atleast_2d(np.asarray(headings, dtype=float))
    exit_centers = np.atleast_2d(np.asarray(exit_centers, dtype=float))
    n = len(positions)

    out = np.empty((n, OBS_DIM))
    col = 0
    for config in SENSORS:
        out[:, col:col + config.ray_count] = sweep_batch(
            compiled, fires, positions, headings, config)
        col += config.ray_count

    (x0, z0), (x1, z1) = scenario.bbox
    span = np.array([x1 - x0, z1 - z0])
    lo = np.array([x0, z0])
    if span[0] <= 0 or span[1] <= 0:
        # force the error path through the scalar helper
        normalize_point(scenario, positions[0])
    out[:, 64:66] = (exit_centers - lo) / span
    out[:, 66:68] = (positions - lo) / span

    delta = exit_centers - positions
    norm = np.hypot(delta[:, 0], delta[:, 1])
    safe = np.where(norm > 0, norm, 1.0)
    direction = delta / safe[:, None]
    direction[norm == 0] = 0.0
    out[:, 68:70] = direction
    return out

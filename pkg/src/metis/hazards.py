"""Physical step function: agent movement with sliding collision response,
fire growth with random patch spawning, and contact damage.

Agents are discs moving on the (x, z) plane. One action per fixed tick of
dt = 0.05 s; the 2x2 action space (left/right x backward/forward) means every
step is diagonal in the world frame. Agents pass through each other; only
walls, closed non-exit doors, and obstacles are solid.

step_agent and apply_damage are pure per-agent given an immutable fire
snapshot; propagate_fire is the single RNG-owning mutation point per tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    disc_circles_pushes,
    disc_hits_circles,
    disc_hits_obbs,
    disc_obbs_pushes,
    points_in_obbs,
)
from .world import FireConfig, PedestrianType, Scenario, compile_geometry

DT = 0.05

ACTIVE = "active"
SAFE = "safe"
DEAD = "dead"

LEFT, RIGHT = 0, 1
BACKWARD, FORWARD = 0, 1

# max movement per collision substep; keeps fast agents from skipping
# through a wall slab in a single update
_MAX_SUBSTEP = 0.2
_PUSH_ITERS = 16


@dataclass(frozen=True)
class ActionPair:
    """One action per branch: horizontal in {left=0, right=1}, vertical in
    {backward=0, forward=1}. There is no standing still."""

    horizontal: int
    vertical: int

    def direction(self) -> tuple[float, float]:
        h = -1.0 if self.horizontal == LEFT else 1.0
        v = -1.0 if self.vertical == BACKWARD else 1.0
        s = math.sqrt(0.5)
        return (h * s, v * s)


@dataclass
class AgentState:
    id: int
    type: PedestrianType
    position: tuple[float, float]
    heading: tuple[float, float]
    health: float = 100.0
    status: str = ACTIVE
    step_count: int = 0
    cumulative_reward: float = 0.0


@dataclass
class StepOutcome:
    collided: bool = False
    entered_safe_area: bool = False
    touched_fire: bool = False
    prev_position: tuple[float, float] = (0.0, 0.0)


@dataclass
class FireSourceState:
    origin: tuple[float, float]
    max_radius: float
    growth_rate: float
    patch_rate: int
    ignition_tick: int
    current_radius: float = 0.0

    def active(self, tick: int) -> bool:
        return tick >= self.ignition_tick


@dataclass
class FireField:
    """Snapshot of every burning disc: growing sources plus spawned patches."""

    sources: list[FireSourceState] = field(default_factory=list)
    patches: list[tuple[float, float, float]] = field(default_factory=list)
    config: FireConfig = field(default_factory=FireConfig)

    def circles(self) -> np.ndarray:
        rows = [(s.origin[0], s.origin[1], s.current_radius)
                for s in self.sources if s.current_radius > 0.0]
        rows += self.patches
        return np.array(rows, dtype=float) if rows else np.zeros((0, 3))

    def to_dict(self) -> dict:
        return {
            "sources": [[*s.origin, s.max_radius, s.growth_rate, s.patch_rate,
                         s.ignition_tick, s.current_radius] for s in self.sources],
            "patches": [list(p) for p in self.patches],
            "config": [self.config.growth_interval, self.config.patch_radius,
                       self.config.damage_rate],
        }

    @staticmethod
    def from_dict(d: dict) -> "FireField":
        sources = [FireSourceState(origin=(r[0], r[1]), max_radius=r[2],
                                   growth_rate=r[3], patch_rate=int(r[4]),
                                   ignition_tick=int(r[5]), current_radius=r[6])
                   for r in d["sources"]]
        patches = [tuple(p) for p in d["patches"]]
        gi, pr, dr = d["config"]
        return FireField(sources, patches,
                         FireConfig(growth_interval=gi, patch_radius=pr, damage_rate=dr))


def fire_field_from_scenario(scenario: Scenario) -> FireField:
    sources = [FireSourceState(origin=f.origin, max_radius=f.max_radius,
                               growth_rate=f.growth_rate, patch_rate=f.patch_rate,
                               ignition_tick=f.ignition_tick)
               for f in scenario.fire_sources]
    return FireField(sources=sources, config=scenario.fire)


def training_fire_field(scenario: Scenario) -> FireField:
    """Static stand-in fires for training: every source burns at patch radius,
    never grows, never spawns. Keeps hazard positions fixed across episodes."""
    field_ = fire_field_from_scenario(scenario)
    for s in field_.sources:
        s.ignition_tick = 0
        s.current_radius = min(field_.config.patch_radius, s.max_radius)
    return field_


# ---------------------------------------------------------------------------
# movement

def _resolve(compiled, pos: np.ndarray, radius: float) -> np.ndarray:
    """Push a disc out of all solids (deepest overlap first) until clear."""
    has_obbs = len(compiled.solid_obbs) > 0
    has_circles = len(compiled.solid_circles) > 0
    for _ in range(_PUSH_ITERS):
        best_depth = 1e-12
        best_push = None
        if has_obbs:
            pushes, depths = disc_obbs_pushes(pos, radius, compiled.solid_obbs)
            k = int(depths.argmax())
            if depths[k] > best_depth:
                best_depth = depths[k]
                best_push = pushes[k]
        if has_circles:
            pushes, depths = disc_circles_pushes(pos, radius,
                                                 compiled.solid_circles)
            k = int(depths.argmax())
            if depths[k] > best_depth:
                best_depth = depths[k]
                best_push = pushes[k]
        if best_push is None:
            break
        pos = pos + best_push
    return pos


def touches_fire(fires: FireField, position, radius: float) -> bool:
    circles = fires.circles()
    if not len(circles):
        return False
    return disc_hits_circles(np.asarray(position, dtype=float), radius, circles)


def in_safe_area(scenario: Scenario, position) -> bool:
    x, z = position
    for a in scenario.safe_areas:
        x0, z0, x1, z1 = a.region
        if x0 <= x <= x1 and z0 <= z <= z1:
            return True
    return False


def step_agent(scenario: Scenario, fires: FireField, agent: AgentState,
               action: ActionPair, dt: float = DT) -> tuple[AgentState, StepOutcome]:
    """Advance one agent by one tick and report what happened.

    The intended displacement is speed * dt along the diagonal unit direction;
    solids remove the blocked normal component (the agent slides). Stepping
    into a safe area freezes the agent as safe. Fire contact is only reported
    here; apply_damage decides its consequence.
    """
    assert agent.status == ACTIVE
    compiled = compile_geometry(scenario)
    speed = agent.type.speed
    radius = agent.type.radius
    dx, dz = action.direction()
    intended = np.array([dx, dz]) * speed * dt

    pos = np.asarray(agent.position, dtype=float)
    start = pos.copy()
    length = float(np.hypot(*intended))
    substeps = max(1, math.ceil(length / _MAX_SUBSTEP))
    for k in range(substeps):
        pos = _resolve(compiled, pos + intended / substeps, radius)

    actual = pos - start
    collided = bool(np.hypot(*(actual - intended)) > 1e-9)
    heading = agent.heading
    norm = float(np.hypot(*actual))
    if norm > 1e-12:
        heading = (float(actual[0] / norm), float(actual[1] / norm))

    new_pos = (float(pos[0]), float(pos[1]))
    entered_safe = in_safe_area(scenario, new_pos)
    touched = touches_fire(fires, new_pos, radius)

    out = StepOutcome(collided=collided, entered_safe_area=entered_safe,
                      touched_fire=touched,
                      prev_position=(float(start[0]), float(start[1])))
    new_agent = replace(agent, position=new_pos, heading=heading,
                        status=SAFE if entered_safe else agent.status,
                        step_count=agent.step_count + 1)
    return new_agent, out


# ---------------------------------------------------------------------------
# fire

def growth_period_ticks(config: FireConfig, dt: float = DT) -> int:
    return max(1, round(config.growth_interval / dt))


def propagate_fire(fires: FireField, scenario: Scenario,
                   rng: np.random.Generator, tick: int) -> FireField:
    """Fire update for one tick; pure given the owned RNG stream.

    Inert sources ignite once the tick reaches their ignition_tick, starting
    at patch radius. On growth ticks each active source's radius grows by
    growth_rate * Uniform(0.5, 1.5), capped at max_radius, and spawns
    patch_rate patches uniformly inside its disc (wall interiors rejected).
    Sources are processed in stable ascending order so the stream replays.
    """
    compiled = compile_geometry(scenario)
    cfg = fires.config
    sources = [replace(s) for s in fires.sources]
    patches = list(fires.patches)

    for s in sources:
        if tick >= s.ignition_tick and s.current_radius == 0.0:
            s.current_radius = min(cfg.patch_radius, s.max_radius)

    grow = tick > 0 and tick % growth_period_ticks(cfg) == 0
    if grow:
        for s in sources:
            if not s.active(tick) or s.current_radius <= 0.0:
                continue
            u = rng.uniform(0.5, 1.5)
            s.current_radius = min(s.max_radius, s.current_radius + s.growth_rate * u)
            for _ in range(s.patch_rate):
                p = _sample_patch_center(s, compiled, rng)
                if p is not None:
                    patches.append((p[0], p[1], cfg.patch_radius))

    return FireField(sources=sources, patches=patches, config=cfg)


def _sample_patch_center(source: FireSourceState, compiled,
                         rng: np.random.Generator, tries: int = 64):
    """Uniform point in the source disc, rejecting wall interiors."""
    for _ in range(tries):
        r = source.current_radius * math.sqrt(rng.uniform())
        theta = 2.0 * math.pi * rng.uniform()
        p = (source.origin[0] + r * math.cos(theta),
             source.origin[1] + r * math.sin(theta))
        if len(compiled.wall_obbs) and bool(
                points_in_obbs(np.array([p]), compiled.wall_obbs).any()):
            continue
        return p
    return None


# ---------------------------------------------------------------------------
# damage

TRAINING = "training"
SIMULATION = "simulation"


def apply_damage(fires: FireField, agent: AgentState, dt: float = DT,
                 mode: str = SIMULATION) -> AgentState:
    """Consequence of fire contact: instant episode death in training,
    gradual health loss in simulation."""
    assert agent.status == ACTIVE
    if not touches_fire(fires, agent.position, agent.type.radius):
        return agent
    if mode == TRAINING:
        return replace(agent, status=DEAD)
    health = max(0.0, agent.health - fires.config.damage_rate * dt)
    return replace(agent, health=health, status=DEAD if health <= 0.0 else ACTIVE)


def penetration_depth(scenario: Scenario, position, radius: float) -> float:
    """Deepest overlap between an agent disc and any solid; 0 when clear."""
    compiled = compile_geometry(scenario)
    pos = np.asarray(position, dtype=float)
    depth = 0.0
    if len(compiled.solid_obbs):
        depth = max(depth, float(
            disc_obbs_pushes(pos, radius, compiled.solid_obbs)[1].max()))
    if len(compiled.solid_circles):
        depth = max(depth, float(
            disc_circles_pushes(pos, radius, compiled.solid_circles)[1].max()))
    return depth


def solid_overlap(scenario: Scenario, position, radius: float) -> bool:
    compiled = compile_geometry(scenario)
    pos = np.asarray(position, dtype=float)
    if len(compiled.solid_obbs) and disc_hits_obbs(pos, radius, compiled.solid_obbs):
        return True
    return bool(len(compiled.solid_circles)
                and disc_hits_circles(pos, radius, compiled.solid_circles))

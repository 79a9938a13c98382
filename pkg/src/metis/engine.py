"""Deterministic evacuation runs: the tick loop, end conditions, live fire
injection, the event log, and final results.

Each tick advances in a fixed order: drain injected fires, snapshot the fire
field, then for every active agent in ascending id (observe, act greedily,
step, apply damage), then propagate fire, then evaluate end conditions in
declaration order. All randomness flows through one seeded stream, and
injections are quantized to tick boundaries and logged with their effective
tick, so a run is replayable bit for bit from (scenario, policy, seed,
stamped injections).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import IncompatiblePolicy, SimEnded
from .hazards import (
    ACTIVE,
    DEAD,
    DT,
    SAFE,
    SIMULATION,
    ActionPair,
    AgentState,
    FireField,
    FireSourceState,
    apply_damage,
    fire_field_from_scenario,
    propagate_fire,
    step_agent,
)
from .perception import OBS_DIM, observe_batch
from .trainer import Policy
from .world import FireSource, Scenario, ValidationIssue, validate

LOG_FORMAT = "metis-events"
LOG_VERSION = 1
BACKSTOP_SECONDS = 600.0

ALL_RESOLVED = "all_resolved"
COUNT_SAFE = "count_safe"
COUNT_DEAD = "count_dead"
TIME_LIMIT = "time_limit"
MANUAL = "manual"


@dataclass(frozen=True)
class EndCondition:
    kind: str
    n: int | None = None
    seconds: float | None = None

    def __post_init__(self):
        if self.kind in (COUNT_SAFE, COUNT_DEAD):
            if self.n is None or self.n < 1:
                raise ValueError(f"{self.kind} needs n >= 1")
        elif self.kind == TIME_LIMIT:
            if self.seconds is None or self.seconds <= 0:
                raise ValueError("time_limit needs seconds > 0")
        elif self.kind not in (ALL_RESOLVED, MANUAL):
            raise ValueError(f"unknown end condition kind: {self.kind!r}")


def parse_end_condition(spec: str) -> EndCondition:
    """Parse CLI/HTTP forms: all_resolved, manual, count_safe:N, count_dead:N,
    time_limit:SECONDS."""
    kind, _, arg = spec.partition(":")
    if kind in (ALL_RESOLVED, MANUAL):
        if arg:
            raise ValueError(f"{kind} takes no parameter")
        return EndCondition(kind)
    if kind in (COUNT_SAFE, COUNT_DEAD):
        return EndCondition(kind, n=int(arg))
    if kind == TIME_LIMIT:
        return EndCondition(kind, seconds=float(arg))
    raise ValueError(f"unknown end condition: {spec!r}")


@dataclass
class SimEvent:
    tick: int
    kind: str
    payload: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"tick": self.tick, "kind": self.kind,
                           "payload": self.payload},
                          sort_keys=True, separators=(",", ":"))


@dataclass
class SimResults:
    total: int
    survived: int
    died: int
    unresolved: int
    elapsed_ticks: int
    end_reason: str

    def to_dict(self) -> dict:
        return {"total": self.total, "survived": self.survived,
                "died": self.died, "unresolved": self.unresolved,
                "elapsed_ticks": self.elapsed_ticks,
                "end_reason": self.end_reason}


def validate_fire_source(scenario: Scenario, source: FireSource) -> list[ValidationIssue]:
    issues = []
    if source.max_radius <= 0 or source.growth_rate <= 0 or source.patch_rate < 1:
        issues.append(ValidationIssue("BadFireSource", "injection"))
    (x0, z0), (x1, z1) = scenario.bbox
    x, z = source.origin
    if not (x0 <= x <= x1 and z0 <= z <= z1):
        issues.append(ValidationIssue("FireOutsideBounds", "injection"))
    return issues


class Simulation:
    """One evacuation run; owns all mutable world state, advanced serially."""

    def __init__(self, scenario: Scenario, policy: Policy,
                 end_conditions: list[EndCondition] | None = None,
                 seed: int = 0):
        issues = validate(scenario)
        if issues:
            raise ValueError(f"scenario invalid: {[i.code for i in issues]}")
        if policy.net.cfg.input_dim != OBS_DIM:
            raise IncompatiblePolicy(
                f"policy input dim {policy.net.cfg.input_dim} != {OBS_DIM}")
        self.scenario = scenario
        self.policy = policy
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.conditions = list(end_conditions or [EndCondition(ALL_RESOLVED)])
        if not any(c.kind == TIME_LIMIT for c in self.conditions):
            # implicit backstop so a run always terminates
            self.conditions.append(EndCondition(TIME_LIMIT, seconds=BACKSTOP_SECONDS))

        types = {t.name: t for t in scenario.pedestrian_types}
        self.exit_doors = [d for _, d in scenario.exits()]
        self.exit_centers = np.array([d.center for d in self.exit_doors])
        self.agents: list[AgentState] = []
        for i, p in enumerate(scenario.pedestrians):
            ptype = types[p.type]
            heading = self._heading_to_exit(p.position)
            self.agents.append(AgentState(
                id=i, type=ptype, position=tuple(p.position), heading=heading,
                health=ptype.health))

        self.fires: FireField = fire_field_from_scenario(scenario)
        self.tick = 0
        self.ended = False
        self.end_reason: str | None = None
        self.events: list[SimEvent] = []
        self._pending: list[tuple[int, FireSource]] = []
        self.injection_log: list[tuple[int, FireSource]] = []
        self._was_burning = [False] * len(self.fires.sources)
        self._emit(0, "sim_started", {"total": len(self.agents),
                                      "seed": seed,
                                      "scenario_id": scenario.id})
        # sources active from the start must burn before the first tick
        for si, s in enumerate(self.fires.sources):
            if s.ignition_tick <= 0:
                s.current_radius = min(self.fires.config.patch_radius, s.max_radius)
                self._was_burning[si] = True
                self._emit(0, "fire_ignited",
                           {"source": si, "x": s.origin[0], "z": s.origin[1]})

    # -- helpers -------------------------------------------------------------

    def _heading_to_exit(self, pos) -> tuple[float, float]:
        d = np.hypot(self.exit_centers[:, 0] - pos[0],
                     self.exit_centers[:, 1] - pos[1])
        c = self.exit_centers[int(d.argmin())]
        dx, dz = c[0] - pos[0], c[1] - pos[1]
        n = float(np.hypot(dx, dz))
        return (dx / n, dz / n) if n > 1e-12 else (1.0, 0.0)

    def _nearest_exit_center(self, pos) -> np.ndarray:
        d = np.hypot(self.exit_centers[:, 0] - pos[0],
                     self.exit_centers[:, 1] - pos[1])
        return self.exit_centers[int(d.argmin())]

    def _emit(self, tick: int, kind: str, payload: dict):
        self.events.append(SimEvent(tick, kind, payload))

    def results(self) -> SimResults:
        survived = sum(1 for a in self.agents if a.status == SAFE)
        died = sum(1 for a in self.agents if a.status == DEAD)
        active = sum(1 for a in self.agents if a.status == ACTIVE)
        return SimResults(total=len(self.agents), survived=survived, died=died,
                          unresolved=active, elapsed_ticks=self.tick,
                          end_reason=self.end_reason or "")

    # -- live steering -------------------------------------------------------

    def inject_fire(self, source: FireSource, at_tick: int | None = None) -> int:
        """Queue a new fire source; it activates at the next tick boundary
        (or the given stamped tick during replay). Returns the effective tick."""
        if self.ended:
            raise SimEnded("cannot inject into an ended simulation")
        issues = validate_fire_source(self.scenario, source)
        if issues:
            err = ValueError(f"invalid fire source: {[i.code for i in issues]}")
            err.issues = issues
            raise err
        effective = self.tick + 1 if at_tick is None else max(at_tick, self.tick + 1)
        self._pending.append((effective, source))
        return effective

    def _drain_injections(self, tick: int):
        due = [(t, s) for t, s in self._pending if t <= tick]
        self._pending = [(t, s) for t, s in self._pending if t > tick]
        for t, src in sorted(due, key=lambda e: e[0]):
            state = FireSourceState(
                origin=tuple(src.origin), max_radius=src.max_radius,
                growth_rate=src.growth_rate, patch_rate=src.patch_rate,
                ignition_tick=tick)
            self.fires.sources.append(state)
            self._was_burning.append(False)
            self.injection_log.append((tick, src))
            self._emit(tick, "fire_injected", {
                "x": src.origin[0], "z": src.origin[1],
                "max_radius": src.max_radius, "growth_rate": src.growth_rate,
                "patch_rate": src.patch_rate, "effective_tick": tick})

    # -- the tick ------------------------------------------------------------

    def step(self):
        """Advance the world by one tick (no-op after the run has ended)."""
        if self.ended:
            return
        self.tick += 1
        tick = self.tick
        self._drain_injections(tick)

        fire_snapshot = self.fires
        active_idx = [i for i, a in enumerate(self.agents) if a.status == ACTIVE]
        if active_idx:
            positions = np.array([self.agents[i].position for i in active_idx])
            headings = np.array([self.agents[i].heading for i in active_idx])
            exits = np.array([self._nearest_exit_center(self.agents[i].position)
                              for i in active_idx])
            obs = observe_batch(self.scenario, fire_snapshot, positions,
                                headings, exits)
            actions = self.policy.act_batch(obs, mode="greedy")
            for row, i in enumerate(active_idx):
                agent = self.agents[i]
                action = ActionPair(int(actions[row, 0]), int(actions[row, 1]))
                stepped, outcome = step_agent(self.scenario, fire_snapshot,
                                              agent, action)
                if outcome.collided:
                    self._emit(tick, "collision", {"agent": agent.id})
                if stepped.status == SAFE:
                    self._emit(tick, "agent_safe", {"agent": agent.id})
                elif stepped.status == ACTIVE:
                    stepped = apply_damage(fire_snapshot, stepped, DT, SIMULATION)
                    if stepped.status == DEAD:
                        self._emit(tick, "agent_dead", {"agent": agent.id})
                self.agents[i] = stepped

        before_patches = len(self.fires.patches)
        self.fires = propagate_fire(self.fires, self.scenario, self.rng, tick)
        for si, s in enumerate(self.fires.sources):
            burning = s.current_radius > 0.0
            if burning and not self._was_burning[si]:
                self._emit(tick, "fire_ignited",
                           {"source": si, "x": s.origin[0], "z": s.origin[1]})
            self._was_burning[si] = burning
        for cx, cz, r in self.fires.patches[before_patches:]:
            self._emit(tick, "fire_patch_spawned", {"x": cx, "z": cz, "r": r})

        reason = evaluate_end(self.conditions, self.results(), tick)
        if reason is not None:
            self._end(reason)

    def _end(self, reason: str):
        self.end_reason = reason
        self._emit(self.tick, "sim_ended",
                   {"reason": reason, "results": self.results().to_dict()})
        self.ended = True

    def stop(self):
        """Manual end (operator stop)."""
        if not self.ended:
            self._end(MANUAL)

    # -- log serialization ---------------------------------------------------

    def log_lines(self) -> list[str]:
        header = json.dumps({"format": LOG_FORMAT, "version": LOG_VERSION,
                             "seed": self.seed, "scenario_id": self.scenario.id},
                            sort_keys=True, separators=(",", ":"))
        return [header] + [e.to_json() for e in self.events]

    def log_bytes(self) -> bytes:
        return ("\n".join(self.log_lines()) + "\n").encode("utf-8")


def evaluate_end(conditions: list[EndCondition], results: SimResults,
                 tick: int) -> str | None:
    """First satisfied condition in declaration order, or None."""
    for c in conditions:
        if c.kind == ALL_RESOLVED and results.unresolved == 0:
            return ALL_RESOLVED
        if c.kind == COUNT_SAFE and results.survived >= c.n:
            return COUNT_SAFE
        if c.kind == COUNT_DEAD and results.died >= c.n:
            return COUNT_DEAD
        if c.kind == TIME_LIMIT and tick * DT >= c.seconds:
            return TIME_LIMIT
        # manual never self-triggers
    return None


def run(scenario: Scenario, policy: Policy,
        end_conditions: list[EndCondition] | None = None, seed: int = 0,
        injections: list[tuple[int, FireSource]] | None = None,
        max_ticks: int | None = None) -> tuple[SimResults, Simulation]:
    """Headless run to completion. injections are (tick, source) stamps,
    exactly what a previous run's injection_log recorded, so replays match."""
    sim = Simulation(scenario, policy, end_conditions, seed)
    for t, src in injections or []:
        sim.inject_fire(src, at_tick=t)
    while not sim.ended:
        sim.step()
        if max_ticks is not None and sim.tick >= max_ticks and not sim.ended:
            sim.stop()
    return sim.results(), sim

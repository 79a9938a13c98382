"""Per-step and terminal rewards plus the spawn-area curriculum.

Rewards are tiny per-step costs scaled by 1/maxStep with a distance shaping
term, overridden by +1 / -1 on the terminal step. Three shaping modes exist
because the published formula rewards being far from the exit; the literal
form is the default, a proximity flip and a potential-difference form are
selectable. The curriculum unlocks spawn areas one at a time once the rolling
mean return over the last 20 episodes clears 0.925.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArea
from .geometry import points_in_circles, points_in_obbs
from .hazards import AgentState, StepOutcome
from .world import Door, Scenario, SpawnArea, compile_geometry, normalize_point

PAPER_LITERAL = "paper_literal"
PROXIMITY = "proximity"
POTENTIAL = "potential"

UNLOCK_THRESHOLD = 0.925
WINDOW = 20
SPAWN_POOL = 5


@dataclass(frozen=True)
class RewardConfig:
    max_step: int = 10_000
    step_penalty_num: float = -0.4
    collision_penalty_num: float = -0.3
    distance_coeff: float = 0.3
    terminal_safe: float = 1.0
    terminal_fire: float = -1.0
    shaping_mode: str = PAPER_LITERAL


def normalized_distance(scenario: Scenario, exit_center, position) -> float:
    ex, ez = normalize_point(scenario, exit_center)
    px, pz = normalize_point(scenario, position)
    return math.hypot(ex - px, ez - pz)


def step_reward(cfg: RewardConfig, agent: AgentState, exit_door: Door,
                scenario: Scenario, outcome: StepOutcome) -> float:
    """Reward for one completed step. Terminal events replace everything else."""
    if outcome.entered_safe_area:
        return cfg.terminal_safe
    if outcome.touched_fire:
        return cfg.terminal_fire

    d = normalized_distance(scenario, exit_door.center, agent.position)
    r = cfg.step_penalty_num / cfg.max_step
    if outcome.collided:
        r += cfg.collision_penalty_num / cfg.max_step

    if cfg.shaping_mode == PAPER_LITERAL:
        r += d * cfg.distance_coeff / cfg.max_step
    elif cfg.shaping_mode == PROXIMITY:
        r += (math.sqrt(2.0) - d) * cfg.distance_coeff / cfg.max_step
    elif cfg.shaping_mode == POTENTIAL:
        d_prev = normalized_distance(scenario, exit_door.center, outcome.prev_position)
        r += cfg.distance_coeff * (d_prev - d)
    else:
        raise ValueError(f"unknown shaping mode: {cfg.shaping_mode!r}")
    return r


# ---------------------------------------------------------------------------
# curriculum

@dataclass
class CurriculumState:
    """Progress through the ordered spawn areas.

    One global rolling window gates unlocks (and resets after each one, so a
    newly opened area is judged on fresh episodes); per-area windows feed the
    final all-areas stage.
    """

    area_count: int
    unlocked_count: int = 1
    global_window: list[float] = field(default_factory=list)
    per_area_windows: list[list[float]] = field(default_factory=list)
    all_unlocked_final: bool = False

    def __post_init__(self):
        if not self.per_area_windows:
            self.per_area_windows = [[] for _ in range(self.area_count)]

    def to_dict(self) -> dict:
        return {
            "area_count": self.area_count,
            "unlocked_count": self.unlocked_count,
            "global_window": list(self.global_window),
            "per_area_windows": [list(w) for w in self.per_area_windows],
            "all_unlocked_final": self.all_unlocked_final,
        }

    @staticmethod
    def from_dict(d: dict) -> "CurriculumState":
        return CurriculumState(
            area_count=int(d["area_count"]),
            unlocked_count=int(d["unlocked_count"]),
            global_window=list(d["global_window"]),
            per_area_windows=[list(w) for w in d["per_area_windows"]],
            all_unlocked_final=bool(d["all_unlocked_final"]),
        )


def record_episode(cur: CurriculumState, area: int,
                   episode_return: float) -> CurriculumState:
    """Fold one finished episode into the curriculum; may unlock the next area.

    area is 1-based and must already be unlocked.
    """
    if not (1 <= area <= cur.unlocked_count):
        raise InvalidArea(f"area {area} not in [1, {cur.unlocked_count}]")
    cur = CurriculumState(
        area_count=cur.area_count,
        unlocked_count=cur.unlocked_count,
        global_window=list(cur.global_window),
        per_area_windows=[list(w) for w in cur.per_area_windows],
        all_unlocked_final=cur.all_unlocked_final,
    )
    cur.global_window.append(episode_return)
    if len(cur.global_window) > WINDOW:
        cur.global_window.pop(0)
    w = cur.per_area_windows[area - 1]
    w.append(episode_return)
    if len(w) > WINDOW:
        w.pop(0)

    if (len(cur.global_window) == WINDOW
            and sum(cur.global_window) / WINDOW >= UNLOCK_THRESHOLD
            and cur.unlocked_count < cur.area_count):
        cur.unlocked_count += 1
        cur.global_window = []

    if cur.unlocked_count == cur.area_count and not cur.all_unlocked_final:
        windows = cur.per_area_windows
        if all(windows) and (
                sum(sum(w) / len(w) for w in windows) / len(windows)
                >= UNLOCK_THRESHOLD):
            cur.all_unlocked_final = True
    return cur


def spawn_pool(cur: CurriculumState) -> list[int]:
    """1-based areas eligible for spawning under the current progress."""
    if cur.all_unlocked_final:
        return list(range(1, cur.area_count + 1))
    lo = max(1, cur.unlocked_count - SPAWN_POOL + 1)
    return list(range(lo, cur.unlocked_count + 1))


def choose_spawn(cur: CurriculumState, scenario: Scenario,
                 rng: np.random.Generator) -> tuple[SpawnArea, tuple[float, float]]:
    """Pick a spawn area uniformly from the eligible pool and a clear point in it."""
    areas = sorted(scenario.spawn_areas, key=lambda a: a.order)
    pool = spawn_pool(cur)
    order = pool[int(rng.integers(len(pool)))]
    area = areas[order - 1]
    return area, sample_point_in_area(scenario, area, rng)


def sample_point_in_area(scenario: Scenario, area: SpawnArea,
                         rng: np.random.Generator, clearance: float = 0.25,
                         tries: int = 128) -> tuple[float, float]:
    """Uniform point in the area region that does not overlap walls/obstacles."""
    compiled = compile_geometry(scenario)
    x0, z0, x1, z1 = area.region
    for _ in range(tries):
        p = (float(rng.uniform(x0, x1)), float(rng.uniform(z0, z1)))
        pt = np.array([p])
        if len(compiled.solid_obbs) and bool(
                points_in_obbs(pt, _inflate(compiled.solid_obbs, clearance)).any()):
            continue
        if len(compiled.solid_circles) and bool(
                points_in_circles(pt, _inflate_circles(compiled.solid_circles,
                                                       clearance)).any()):
            continue
        return p
    # crowded region: fall back to the center
    return ((x0 + x1) / 2.0, (z0 + z1) / 2.0)


def _inflate(obbs: np.ndarray, by: float) -> np.ndarray:
    out = obbs.copy()
    out[:, 4] += by
    out[:, 5] += by
    return out


def _inflate_circles(circles: np.ndarray, by: float) -> np.ndarray:
    out = circles.copy()
    out[:, 2] += by
    return out

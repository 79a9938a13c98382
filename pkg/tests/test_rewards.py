"""Reward arithmetic (exact to 1e-12) and the spawn-area curriculum."""

import math

import numpy as np
import pytest

from metis.errors import InvalidArea
from metis.hazards import AgentState, StepOutcome
from metis.rewards import (
    PAPER_LITERAL,
    POTENTIAL,
    PROXIMITY,
    SPAWN_POOL,
    UNLOCK_THRESHOLD,
    WINDOW,
    CurriculumState,
    RewardConfig,
    choose_spawn,
    normalized_distance,
    record_episode,
    sample_point_in_area,
    spawn_pool,
    step_reward,
)
from metis.world import (
    Door,
    Obstacle,
    PedestrianType,
    SafeArea,
    Scenario,
    SpawnArea,
    WallSegment,
    load_sample,
    nearest_exit,
)

ADULT = PedestrianType(name="adult")


def unit_square_scenario():
    """Scenario whose bbox is exactly [0,1]^2 so normalized == world coords."""
    pad = 0.25
    return Scenario(
        spawn_areas=[SpawnArea((pad, pad, 1 - pad, 1 - pad), order=1)],
        safe_areas=[SafeArea((pad, pad, 1 - pad, 1 - pad))],
        doors=[],
    )


def reward_at(cfg, position, exit_center, scenario, collided=False,
              prev_position=(0.0, 0.0), safe=False, fire=False):
    agent = AgentState(id=0, type=ADULT, position=position, heading=(1, 0))
    door = Door(wall_index=0, center=exit_center, width=1.0, exit=True)
    outcome = StepOutcome(collided=collided, entered_safe_area=safe,
                          touched_fire=fire, prev_position=prev_position)
    return step_reward(cfg, agent, door, scenario, outcome)


def test_normalized_distance_on_unit_square():
    s = unit_square_scenario()
    assert s.bbox == ((0.0, 0.0), (1.0, 1.0))
    assert normalized_distance(s, (1.0, 1.0), (0.0, 0.0)) == pytest.approx(
        math.sqrt(2.0), abs=1e-15)
    assert normalized_distance(s, (0.3, 0.4), (0.3, 0.4)) == 0.0


def test_reward_constants_exact():
    s = unit_square_scenario()
    cfg = RewardConfig()  # max_step 10000, paper-literal shaping
    # step cost alone, agent standing at the exit (d = 0)
    r = reward_at(cfg, (0.5, 0.5), (0.5, 0.5), s)
    assert abs(r - (-4.0e-5)) <= 1e-12
    # collision adds -3.0e-5
    r = reward_at(cfg, (0.5, 0.5), (0.5, 0.5), s, collided=True)
    assert abs(r - (-7.0e-5)) <= 1e-12
    # paper-literal shaping at d: adds d * 3.0e-5
    d = 0.5
    r = reward_at(cfg, (0.0, 0.5), (0.5, 0.5), s)
    assert abs(r - (-4.0e-5 + d * 3.0e-5)) <= 1e-12
    # all three combined at d = 1
    r = reward_at(cfg, (0.0, 0.0), (1.0, 0.0), s, collided=True)
    assert abs(r - (-4.0e-5 - 3.0e-5 + 1.0 * 3.0e-5)) <= 1e-12


def test_terminal_rewards_replace_step_costs():
    s = unit_square_scenario()
    cfg = RewardConfig()
    assert reward_at(cfg, (0.2, 0.2), (1.0, 1.0), s, collided=True, safe=True) == 1.0
    assert reward_at(cfg, (0.2, 0.2), (1.0, 1.0), s, collided=True, fire=True) == -1.0
    # safe wins when both are set on the same step
    assert reward_at(cfg, (0.2, 0.2), (1.0, 1.0), s, safe=True, fire=True) == 1.0


def test_proximity_shaping_flips_the_gradient():
    s = unit_square_scenario()
    lit = RewardConfig(shaping_mode=PAPER_LITERAL)
    prox = RewardConfig(shaping_mode=PROXIMITY)
    near_lit = reward_at(lit, (0.9, 0.5), (1.0, 0.5), s)
    far_lit = reward_at(lit, (0.1, 0.5), (1.0, 0.5), s)
    assert far_lit > near_lit  # the literal formula prefers being far away
    near_prox = reward_at(prox, (0.9, 0.5), (1.0, 0.5), s)
    far_prox = reward_at(prox, (0.1, 0.5), (1.0, 0.5), s)
    assert near_prox > far_prox
    # proximity term is (sqrt(2) - d) * 0.3 / max_step
    d = 0.9
    expected = -4.0e-5 + (math.sqrt(2.0) - d) * 3.0e-5
    assert abs(reward_at(prox, (0.1, 0.5), (1.0, 0.5), s) - expected) <= 1e-12


def test_potential_shaping_value_and_telescoping():
    s = unit_square_scenario()
    cfg = RewardConfig(shaping_mode=POTENTIAL)
    # moved from d=0.5 to d=0.4: 0.3 * (0.5 - 0.4), no 1/max_step on this term
    r = reward_at(cfg, (0.6, 0.5), (1.0, 0.5), s, prev_position=(0.5, 0.5))
    assert abs(r - (-4.0e-5 + 0.3 * 0.1)) <= 1e-12

    # over a path the shaping telescopes to 0.3 * (d_first - d_last)
    waypoints = [(0.1, 0.5), (0.3, 0.5), (0.2, 0.5), (0.7, 0.5), (0.9, 0.5)]
    exit_c = (1.0, 0.5)
    total = 0.0
    for prev, cur in zip(waypoints, waypoints[1:]):
        total += reward_at(cfg, cur, exit_c, s, prev_position=prev) + 4.0e-5
    d_first = normalized_distance(s, exit_c, waypoints[0])
    d_last = normalized_distance(s, exit_c, waypoints[-1])
    assert total == pytest.approx(0.3 * (d_first - d_last), abs=1e-12)


def test_unknown_shaping_mode_raises():
    s = unit_square_scenario()
    cfg = RewardConfig(shaping_mode="bogus")
    with pytest.raises(ValueError):
        reward_at(cfg, (0.5, 0.5), (1.0, 0.5), s)


# -- curriculum ---------------------------------------------------------------


def feed(cur, area, value, n):
    for _ in range(n):
        cur = record_episode(cur, area, value)
    return cur


def test_unlock_at_threshold():
    cur = CurriculumState(area_count=4)
    assert cur.unlocked_count == 1
    cur = feed(cur, 1, 0.93, WINDOW)
    assert cur.unlocked_count == 2
    assert cur.global_window == []  # window resets on unlock


def test_no_unlock_below_threshold():
    cur = CurriculumState(area_count=4)
    cur = feed(cur, 1, 0.92, WINDOW)
    assert cur.unlocked_count == 1
    # and stays locked however long the mediocre streak continues
    cur = feed(cur, 1, 0.92, 100)
    assert cur.unlocked_count == 1


def test_window_must_be_full():
    cur = CurriculumState(area_count=2)
    cur = feed(cur, 1, 1.0, WINDOW - 1)
    assert cur.unlocked_count == 1
    cur = record_episode(cur, 1, 1.0)
    assert cur.unlocked_count == 2


def test_unlock_uses_the_window_mean():
    assert UNLOCK_THRESHOLD == 0.925
    # just above / just below the threshold
    cur = feed(CurriculumState(area_count=2), 1, 0.9251, WINDOW)
    assert cur.unlocked_count == 2
    cur = feed(CurriculumState(area_count=2), 1, 0.9249, WINDOW)
    assert cur.unlocked_count == 1
    # the mean decides, not the minimum: one dud among excellent episodes
    cur = CurriculumState(area_count=2)
    cur = feed(cur, 1, 1.0, WINDOW - 1)
    cur = record_episode(cur, 1, 0.0)  # mean 0.95
    assert cur.unlocked_count == 2


def test_window_is_rolling():
    cur = CurriculumState(area_count=2)
    cur = feed(cur, 1, 0.0, WINDOW)  # bad history
    cur = feed(cur, 1, 1.0, WINDOW)  # a full window of good episodes
    assert cur.unlocked_count == 2


def test_record_episode_rejects_locked_area():
    cur = CurriculumState(area_count=3)
    with pytest.raises(InvalidArea):
        record_episode(cur, 2, 1.0)
    with pytest.raises(InvalidArea):
        record_episode(cur, 0, 1.0)
    cur = feed(cur, 1, 1.0, WINDOW)
    record_episode(cur, 2, 1.0)  # now fine


def test_record_episode_does_not_mutate_input():
    cur = CurriculumState(area_count=2)
    out = record_episode(cur, 1, 0.5)
    assert cur.global_window == []
    assert out.global_window == [0.5]


def test_spawn_pool_is_last_five_unlocked():
    cur = CurriculumState(area_count=12, unlocked_count=7)
    assert spawn_pool(cur) == [3, 4, 5, 6, 7]
    assert SPAWN_POOL == 5
    cur = CurriculumState(area_count=12, unlocked_count=3)
    assert spawn_pool(cur) == [1, 2, 3]
    cur = CurriculumState(area_count=12, unlocked_count=12, all_unlocked_final=True)
    assert spawn_pool(cur) == list(range(1, 13))


def test_final_stage_needs_every_area_window():
    cur = CurriculumState(area_count=2)
    cur = feed(cur, 1, 1.0, WINDOW)
    assert cur.unlocked_count == 2
    # high returns recorded only against area 1: area 2's window is empty
    cur = feed(cur, 1, 1.0, WINDOW)
    assert not cur.all_unlocked_final
    cur = feed(cur, 2, 1.0, 1)
    assert cur.all_unlocked_final  # mean of per-area means = 1.0


def test_final_stage_uses_mean_of_area_means():
    cur = CurriculumState(area_count=2)
    cur = feed(cur, 1, 1.0, WINDOW)
    # area 1 mean 1.0, area 2 mean 0.84: overall 0.92 < 0.925
    cur = feed(cur, 2, 0.84, 5)
    assert not cur.all_unlocked_final
    # lift area 2's mean to 0.87: overall 0.935
    cur = feed(cur, 2, 0.9, 5)
    assert cur.all_unlocked_final


def test_choose_spawn_draws_uniformly_from_pool():
    s = load_sample("training_building")
    areas = sorted(a.order for a in s.spawn_areas)
    assert areas == [1, 2, 3, 4]
    cur = CurriculumState(area_count=4, unlocked_count=3)
    rng = np.random.default_rng(0)
    counts = {1: 0, 2: 0, 3: 0}
    for _ in range(6000):
        area, point = choose_spawn(cur, s, rng)
        counts[area.order] += 1
        x0, z0, x1, z1 = area.region
        assert x0 <= point[0] <= x1 and z0 <= point[1] <= z1
    assert set(counts) == {1, 2, 3}
    for n in counts.values():
        assert abs(n - 2000) < 150  # ~3.5 sigma for Binomial(6000, 1/3)


def test_sample_point_keeps_clearance_from_solids():
    s = Scenario(
        walls=[WallSegment((2.0, -5.0), (2.0, 5.0), 0.2)],
        obstacles=[Obstacle(kind="desk", rect=(0.0, 0.0, 1.0, 1.0))],
        spawn_areas=[SpawnArea((0.0, -4.0, 4.0, 4.0), order=1)],
    )
    area = s.spawn_areas[0]
    rng = np.random.default_rng(4)
    for _ in range(500):
        x, z = sample_point_in_area(s, area, rng)
        assert not (1.85 < x < 2.15)  # wall face + 0.25 clearance
        assert not (-0.25 < x < 1.25 and -0.25 < z < 1.25)


def test_sample_point_falls_back_to_center_when_crowded():
    s = Scenario(
        obstacles=[Obstacle(kind="desk", rect=(-1.0, -1.0, 3.0, 3.0))],
        spawn_areas=[SpawnArea((0.0, 0.0, 2.0, 2.0), order=1)],
    )
    p = sample_point_in_area(s, s.spawn_areas[0], np.random.default_rng(0))
    assert p == (1.0, 1.0)


def test_curriculum_round_trip():
    cur = CurriculumState(area_count=3, unlocked_count=2,
                          global_window=[0.5, 0.7],
                          per_area_windows=[[0.5], [0.7], []],
                          all_unlocked_final=False)
    clone = CurriculumState.from_dict(cur.to_dict())
    assert clone == cur

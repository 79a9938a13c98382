"""Movement, sliding collision response, fire growth/patches, and damage."""

import math

import numpy as np
import pytest
from scipy import stats

from metis.hazards import (
    ACTIVE,
    DEAD,
    DT,
    SAFE,
    SIMULATION,
    TRAINING,
    ActionPair,
    AgentState,
    FireField,
    FireSourceState,
    apply_damage,
    fire_field_from_scenario,
    growth_period_ticks,
    in_safe_area,
    penetration_depth,
    propagate_fire,
    step_agent,
    touches_fire,
    training_fire_field,
)
from metis.world import (
    FireConfig,
    FireSource,
    Obstacle,
    PedestrianType,
    SafeArea,
    Scenario,
    WallSegment,
)

ADULT = PedestrianType(name="adult", speed=3.0, radius=0.25)


def make_agent(position, heading=(1.0, 0.0), ptype=ADULT):
    return AgentState(id=0, type=ptype, position=position, heading=heading)


def open_space():
    # far-away walls so the space around the origin is unobstructed
    return Scenario(walls=[WallSegment((-50.0, -50.0), (50.0, -50.0))])


NO_FIRE = FireField()


def test_action_pair_directions_are_diagonal():
    s = math.sqrt(0.5)
    assert ActionPair(1, 1).direction() == pytest.approx((s, s))
    assert ActionPair(0, 1).direction() == pytest.approx((-s, s))
    assert ActionPair(1, 0).direction() == pytest.approx((s, -s))
    assert ActionPair(0, 0).direction() == pytest.approx((-s, -s))
    for h in (0, 1):
        for v in (0, 1):
            assert np.hypot(*ActionPair(h, v).direction()) == pytest.approx(1.0)


def test_step_in_open_space_moves_diagonally():
    a = make_agent((0.0, 0.0))
    stepped, out = step_agent(open_space(), NO_FIRE, a, ActionPair(1, 1))
    d = 3.0 * DT * math.sqrt(0.5)  # 0.10606...
    assert stepped.position == pytest.approx((d, d), abs=1e-12)
    assert not out.collided
    assert out.prev_position == (0.0, 0.0)
    assert stepped.heading == pytest.approx((math.sqrt(0.5), math.sqrt(0.5)))
    assert stepped.step_count == 1
    assert stepped.status == ACTIVE


def test_step_against_wall_slides_along_it():
    # horizontal wall above the agent: forward motion is absorbed, lateral kept
    s = Scenario(walls=[WallSegment((-10.0, 1.0), (10.0, 1.0), 0.2)])
    a = make_agent((2.0, 0.6))
    stepped, out = step_agent(s, NO_FIRE, a, ActionPair(1, 1))
    d = 3.0 * DT * math.sqrt(0.5)
    assert out.collided
    # pushed back to wall face minus radius: 0.9 - 0.25
    assert stepped.position[1] == pytest.approx(0.65, abs=1e-9)
    assert stepped.position[0] == pytest.approx(2.0 + d, abs=1e-9)
    # heading follows the actual displacement, mostly +x now
    assert abs(stepped.heading[0]) > abs(stepped.heading[1])


def test_head_on_wall_still_slides_sideways():
    # vertical wall to the right: diagonal actions always have a z component,
    # so motion continues along the wall even when x is fully blocked
    s = Scenario(walls=[WallSegment((1.0, -10.0), (1.0, 10.0), 0.2)])
    a = make_agent((0.6, 0.0))
    stepped, out = step_agent(s, NO_FIRE, a, ActionPair(1, 1))
    assert out.collided
    assert stepped.position[0] == pytest.approx(0.65, abs=1e-9)
    assert stepped.position[1] > 0.09


def test_agent_never_penetrates_solids():
    s = Scenario(
        walls=[WallSegment((3.0, -10.0), (3.0, 10.0), 0.3)],
        obstacles=[Obstacle(kind="plant", circle=(1.5, 1.5, 0.5))],
    )
    rng = np.random.default_rng(2)
    a = make_agent((0.5, 0.5))
    for _ in range(300):
        action = ActionPair(int(rng.integers(2)), int(rng.integers(2)))
        a, _ = step_agent(s, NO_FIRE, a, action)
        assert penetration_depth(s, a.position, ADULT.radius) <= 1e-6


def test_zero_speed_type_never_moves():
    frozen = PedestrianType(name="slug", speed=1e-12)
    a = make_agent((1.0, 1.0), ptype=frozen)
    stepped, _ = step_agent(open_space(), NO_FIRE, a, ActionPair(1, 1))
    assert stepped.position == pytest.approx((1.0, 1.0), abs=1e-9)


def test_fast_agent_cannot_tunnel_through_thin_wall():
    s = Scenario(walls=[WallSegment((2.0, -10.0), (2.0, 10.0), 0.1)])
    bolt = PedestrianType(name="bolt", speed=40.0, radius=0.25)  # 2 m per tick
    a = make_agent((1.0, 0.0), ptype=bolt)
    stepped, out = step_agent(s, NO_FIRE, a, ActionPair(1, 1))
    assert out.collided
    assert stepped.position[0] <= 2.0 - 0.05 - 0.25 + 1e-9


def test_entering_safe_area_freezes_agent():
    s = open_space()
    s.safe_areas.append(SafeArea((1.0, -1.0, 3.0, 1.0)))
    a = make_agent((0.95, 0.0))
    stepped, out = step_agent(s, NO_FIRE, a, ActionPair(1, 1))
    assert out.entered_safe_area
    assert stepped.status == SAFE
    assert in_safe_area(s, stepped.position)


def test_safe_area_uses_center_containment():
    s = open_space()
    s.safe_areas.append(SafeArea((1.0, -1.0, 3.0, 1.0)))
    # disc overlaps the area but the center is outside: not safe yet
    assert not in_safe_area(s, (0.9, 0.0))
    assert in_safe_area(s, (1.0, 0.0))  # boundary is inclusive


def test_touch_fire_is_reported_by_step():
    fires = FireField(patches=[(1.0, 0.11, 0.1)])
    a = make_agent((0.9, 0.0))
    stepped, out = step_agent(open_space(), fires, a, ActionPair(1, 1))
    assert out.touched_fire
    assert stepped.status == ACTIVE  # damage is a separate concern


def test_apply_damage_training_vs_simulation():
    fires = FireField(patches=[(0.0, 0.0, 0.5)])
    a = make_agent((0.6, 0.0))
    assert touches_fire(fires, a.position, a.type.radius)
    assert apply_damage(fires, a, DT, TRAINING).status == DEAD
    hurt = apply_damage(fires, a, DT, SIMULATION)
    assert hurt.status == ACTIVE
    assert hurt.health == pytest.approx(100.0 - 50.0 * DT)  # 97.5

    # 40 ticks of contact at 2.5 hp per tick drain 100 hp exactly
    for _ in range(40):
        a = apply_damage(fires, a, DT, SIMULATION)
    assert a.health == pytest.approx(0.0, abs=1e-9)
    assert a.status == DEAD


def test_apply_damage_without_contact_is_identity():
    fires = FireField(patches=[(10.0, 10.0, 0.5)])
    a = make_agent((0.0, 0.0))
    assert apply_damage(fires, a, DT, SIMULATION) == a


def test_growth_period_and_radius_arithmetic():
    assert growth_period_ticks(FireConfig(growth_interval=1.0)) == 20
    assert growth_period_ticks(FireConfig(growth_interval=0.5)) == 10
    assert growth_period_ticks(FireConfig(growth_interval=0.01)) == 1

    s = Scenario(walls=[WallSegment((-50, -50), (50, -50))])
    field = FireField(
        sources=[FireSourceState(origin=(0.0, 0.0), max_radius=5.0,
                                 growth_rate=0.25, patch_rate=2,
                                 ignition_tick=0, current_radius=1.0)])
    rng = np.random.default_rng(9)
    u = np.random.default_rng(9).uniform(0.5, 1.5)  # replay the first draw
    grown = propagate_fire(field, s, rng, tick=20)
    assert grown.sources[0].current_radius == pytest.approx(1.0 + 0.25 * u)
    assert len(grown.patches) == 2
    assert field.sources[0].current_radius == 1.0  # input untouched


def test_no_growth_off_schedule():
    s = open_space()
    field = FireField(
        sources=[FireSourceState(origin=(0.0, 0.0), max_radius=5.0,
                                 growth_rate=0.25, patch_rate=3,
                                 ignition_tick=0, current_radius=1.0)])
    rng = np.random.default_rng(0)
    for tick in (1, 7, 19, 21, 39):
        out = propagate_fire(field, s, rng, tick)
        assert out.sources[0].current_radius == 1.0
        assert out.patches == []


def test_radius_caps_at_max():
    s = open_space()
    field = FireField(
        sources=[FireSourceState(origin=(0.0, 0.0), max_radius=1.2,
                                 growth_rate=10.0, patch_rate=1,
                                 ignition_tick=0, current_radius=1.0)])
    out = propagate_fire(field, s, np.random.default_rng(1), tick=20)
    assert out.sources[0].current_radius == 1.2


def test_ignition_tick_gates_burning():
    s = open_space()
    src = FireSourceState(origin=(0.0, 0.0), max_radius=3.0, growth_rate=0.25,
                          patch_rate=1, ignition_tick=101)
    field = FireField(sources=[src])
    rng = np.random.default_rng(3)
    out = propagate_fire(field, s, rng, tick=100)
    assert out.sources[0].current_radius == 0.0
    # ignites at its tick, starting at the patch radius
    out = propagate_fire(out, s, rng, tick=101)
    assert out.sources[0].current_radius == field.config.patch_radius
    # a missed equality still ignites on the next call
    out2 = propagate_fire(field, s, rng, tick=150)
    assert out2.sources[0].current_radius == field.config.patch_radius


def test_patches_stay_inside_source_disc_and_off_walls():
    s = Scenario(walls=[WallSegment((0.6, -10.0), (0.6, 10.0), 0.2)])
    field = FireField(
        sources=[FireSourceState(origin=(0.0, 0.0), max_radius=2.0,
                                 growth_rate=0.1, patch_rate=50,
                                 ignition_tick=0, current_radius=1.5)])
    rng = np.random.default_rng(12)
    out = propagate_fire(field, s, rng, tick=20)
    assert len(out.patches) > 0
    r_after = out.sources[0].current_radius
    for (px, pz, pr) in out.patches:
        assert pr == field.config.patch_radius
        assert math.hypot(px, pz) <= r_after + 1e-9
        assert not (0.5 <= px <= 0.7)  # wall interior rejected


def test_patch_centers_are_uniform_over_the_disc():
    # area-uniform sampling: counts in 8 equal-area annuli should be flat
    s = open_space()
    field = FireField(
        sources=[FireSourceState(origin=(0.0, 0.0), max_radius=4.0,
                                 growth_rate=1e-9, patch_rate=4000,
                                 ignition_tick=0, current_radius=2.0)])
    out = propagate_fire(field, s, np.random.default_rng(77), tick=20)
    radii = np.array([math.hypot(px, pz) for px, pz, _ in out.patches])
    r_disc = out.sources[0].current_radius
    # annuli with equal area: edges at r_disc * sqrt(k/8)
    edges = r_disc * np.sqrt(np.arange(9) / 8)
    counts, _ = np.histogram(radii, bins=edges)
    assert counts.sum() == 4000
    chi2 = ((counts - 500.0) ** 2 / 500.0).sum()
    p = stats.chi2.sf(chi2, df=7)
    assert p > 0.01

    # angles uniform too
    angles = np.array([math.atan2(pz, px) for px, pz, _ in out.patches])
    counts, _ = np.histogram(angles, bins=np.linspace(-np.pi, np.pi, 9))
    chi2 = ((counts - 500.0) ** 2 / 500.0).sum()
    assert stats.chi2.sf(chi2, df=7) > 0.01


def test_propagate_is_deterministic_per_seed():
    s = open_space()
    field = FireField(
        sources=[FireSourceState(origin=(0.0, 0.0), max_radius=5.0,
                                 growth_rate=0.3, patch_rate=3,
                                 ignition_tick=0, current_radius=0.5),
                 FireSourceState(origin=(4.0, 4.0), max_radius=2.0,
                                 growth_rate=0.2, patch_rate=2,
                                 ignition_tick=40, current_radius=0.0)])

    def run(seed):
        f = field
        rng = np.random.default_rng(seed)
        states = []
        for tick in range(1, 101):
            f = propagate_fire(f, s, rng, tick)
            states.append((tuple(s2.current_radius for s2 in f.sources),
                           tuple(f.patches)))
        return states

    assert run(5) == run(5)
    assert run(5) != run(6)


def test_fire_field_round_trip_and_circles():
    field = FireField(
        sources=[FireSourceState(origin=(1.0, 2.0), max_radius=3.0,
                                 growth_rate=0.25, patch_rate=3,
                                 ignition_tick=7, current_radius=1.25)],
        patches=[(0.5, 0.5, 0.5)],
        config=FireConfig(growth_interval=2.0, patch_radius=0.4, damage_rate=25.0))
    clone = FireField.from_dict(field.to_dict())
    assert clone == field
    circles = field.circles()
    assert circles.shape == (2, 3)
    assert circles[0].tolist() == [1.0, 2.0, 1.25]

    # unignited sources contribute no circle
    empty = FireField(sources=[FireSourceState(origin=(0, 0), max_radius=1,
                                               growth_rate=0.1, patch_rate=1,
                                               ignition_tick=5)])
    assert empty.circles().shape == (0, 3)


def test_training_fire_field_is_static():
    s = Scenario(fire_sources=[FireSource((1.0, 1.0), max_radius=3.0),
                               FireSource((5.0, 5.0), max_radius=0.3)])
    field = training_fire_field(s)
    assert field.sources[0].current_radius == 0.5  # patch radius default
    assert field.sources[1].current_radius == pytest.approx(0.3)  # capped
    assert all(src.ignition_tick == 0 for src in field.sources)

    live = fire_field_from_scenario(s)
    assert all(src.current_radius == 0.0 for src in live.sources)

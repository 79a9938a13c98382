"""Geometry kernel tests against brute-force oracles.

The analytic ray/box and ray/circle intersections are checked by marching
along each ray in small steps and testing point containment, so the two
implementations share no intersection math. Push-out vectors are validated
by the property that applying them clears the overlap.
"""

import numpy as np
import pytest

from metis.geometry import (
    disc_circle_push,
    disc_circles_pushes,
    disc_hits_circles,
    disc_hits_obbs,
    disc_obb_push,
    disc_obbs_pushes,
    disc_overlaps_aarect,
    obb_from_rect,
    obb_from_segment,
    points_in_circles,
    points_in_obbs,
    project_point_segment,
    rays_vs_circles,
    rays_vs_obbs,
    unit,
)


def march_ray_hit(origin, direction, contains, max_t=60.0, step=0.001):
    """Oracle: first t where contains(point) flips true, by 1 mm marching."""
    ts = np.arange(0.0, max_t, step)
    pts = origin[None, :] + ts[:, None] * direction[None, :]
    inside = contains(pts)
    idx = np.flatnonzero(inside)
    return float(ts[idx[0]]) if len(idx) else np.inf


def test_unit_and_constructors():
    v = unit(np.array([3.0, 4.0]))
    assert np.allclose(v, [0.6, 0.8])
    obb = obb_from_segment((0, 0), (4, 0), 0.2)
    assert np.allclose(obb, [2, 0, 1, 0, 2, 0.1])
    obb = obb_from_rect((1, 2), (3, 6))
    assert np.allclose(obb, [2, 4, 1, 0, 1, 2])


def test_points_in_rotated_obb():
    # 45-degree box around origin, half extents 1 x 0.5
    s = np.sqrt(0.5)
    obb = np.array([[0.0, 0.0, s, s, 1.0, 0.5]])
    pts = np.array([[0.0, 0.0], [s, s], [1.0, 0.0], [0.9, 0.9], [2.0, 2.0]])
    inside = points_in_obbs(pts, obb)[:, 0]
    # (1, 0) is at local (s, -s): |s| <= 1 and 0.707 > 0.5 -> outside
    assert inside.tolist() == [True, True, False, False, False]


def test_rays_vs_obbs_matches_marching_oracle():
    rng = np.random.default_rng(7)
    obbs = []
    for _ in range(6):
        a = rng.uniform(-8, 8, 2)
        b = a + rng.uniform(-6, 6, 2)
        obbs.append(obb_from_segment(a, b, rng.uniform(0.1, 1.0)))
    obbs = np.array(obbs)

    origins = rng.uniform(-10, 10, (40, 2))
    angles = rng.uniform(0, 2 * np.pi, 40)
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    t = rays_vs_obbs(origins, dirs, obbs).min(axis=1)

    for i in range(40):
        expected = march_ray_hit(
            origins[i], dirs[i],
            lambda pts: points_in_obbs(pts, obbs).any(axis=1))
        if np.isinf(expected):
            assert t[i] > 60.0 or np.isinf(t[i])
        else:
            assert abs(t[i] - expected) < 2e-3


def test_rays_vs_circles_matches_marching_oracle():
    rng = np.random.default_rng(11)
    circles = np.column_stack([rng.uniform(-6, 6, (5, 2)),
                               rng.uniform(0.3, 2.0, 5)])
    origins = rng.uniform(-9, 9, (30, 2))
    angles = rng.uniform(0, 2 * np.pi, 30)
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    t = rays_vs_circles(origins, dirs, circles).min(axis=1)
    for i in range(30):
        expected = march_ray_hit(
            origins[i], dirs[i],
            lambda pts: points_in_circles(pts, circles).any(axis=1))
        if np.isinf(expected):
            assert np.isinf(t[i]) or t[i] > 60.0
        else:
            assert abs(t[i] - expected) < 2e-3


def test_ray_inside_geometry_hits_at_zero():
    obbs = obb_from_rect((-1, -1), (1, 1))[None, :]
    t = rays_vs_obbs(np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]]), obbs)
    assert t[0, 0] == 0.0
    circles = np.array([[0.0, 0.0, 2.0]])
    t = rays_vs_circles(np.array([[0.5, 0.0]]), np.array([[1.0, 0.0]]), circles)
    assert t[0, 0] == 0.0


def test_ray_parallel_to_slab():
    # ray running parallel to a box at z offset: must miss cleanly
    obbs = obb_from_rect((0, -0.1), (10, 0.1))[None, :]
    t = rays_vs_obbs(np.array([[0.0, 5.0]]), np.array([[1.0, 0.0]]), obbs)
    assert np.isinf(t[0, 0])
    # and hit when level with it
    t = rays_vs_obbs(np.array([[-1.0, 0.0]]), np.array([[1.0, 0.0]]), obbs)
    assert t[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_project_point_segment():
    q, t, d = project_point_segment((5.0, 3.0), (0.0, 0.0), (10.0, 0.0))
    assert np.allclose(q, [5, 0]) and t == pytest.approx(0.5) and d == pytest.approx(3)
    q, t, d = project_point_segment((-2.0, 1.0), (0.0, 0.0), (10.0, 0.0))
    assert np.allclose(q, [0, 0]) and t == 0.0 and d == pytest.approx(np.sqrt(5))


def test_disc_obb_push_clears_overlap():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a = rng.uniform(-5, 5, 2)
        b = a + rng.uniform(-4, 4, 2)
        if np.allclose(a, b):
            continue
        obb = obb_from_segment(a, b, rng.uniform(0.1, 0.8))
        center = rng.uniform(-6, 6, 2)
        radius = rng.uniform(0.1, 0.6)
        push = disc_obb_push(center, radius, obb)
        if push is None:
            continue
        moved = center + push
        again = disc_obb_push(moved, radius, obb)
        assert again is None or np.hypot(*again) < 1e-9


def test_vectorized_pushes_match_scalar():
    rng = np.random.default_rng(5)
    obbs = np.array([obb_from_segment(rng.uniform(-4, 4, 2),
                                      rng.uniform(-4, 4, 2),
                                      rng.uniform(0.1, 0.7))
                     for _ in range(12)])
    for _ in range(80):
        center = rng.uniform(-5, 5, 2)
        radius = rng.uniform(0.1, 0.5)
        pushes, depths = disc_obbs_pushes(center, radius, obbs)
        for k in range(len(obbs)):
            scalar = disc_obb_push(center, radius, obbs[k])
            if scalar is None:
                assert depths[k] == 0.0
            else:
                assert np.allclose(pushes[k], scalar, atol=1e-12)
                assert depths[k] == pytest.approx(np.hypot(*scalar), abs=1e-12)


def test_disc_circle_push_and_vectorized():
    circle = np.array([0.0, 0.0, 1.0])
    push = disc_circle_push((1.5, 0.0), 0.6, circle)
    assert np.allclose(push, [0.1, 0.0])
    assert disc_circle_push((3.0, 0.0), 0.6, circle) is None

    circles = np.array([[0.0, 0.0, 1.0], [5.0, 0.0, 1.0]])
    pushes, depths = disc_circles_pushes((1.5, 0.0), 0.6, circles)
    assert np.allclose(pushes[0], [0.1, 0.0]) and depths[1] == 0.0


def test_disc_hit_helpers():
    obbs = obb_from_rect((0, 0), (2, 2))[None, :]
    assert disc_hits_obbs(np.array([2.3, 1.0]), 0.4, obbs)
    assert not disc_hits_obbs(np.array([3.0, 1.0]), 0.4, obbs)
    circles = np.array([[0.0, 0.0, 1.0]])
    assert disc_hits_circles(np.array([1.2, 0.0]), 0.3, circles)
    assert not disc_hits_circles(np.array([1.4, 0.0]), 0.3, circles)
    assert disc_overlaps_aarect((2.5, 1.0), 0.5, (0, 0), (2, 2))
    assert not disc_overlaps_aarect((2.6, 1.0), 0.5, (0, 0), (2, 2))

"""2D geometry kernels: oriented boxes, circles, ray casting, disc collision.

Everything works on the (x, z) ground plane in meters. Shapes come in two
array layouts so ray sweeps can be evaluated for many rays at once:

* oriented box (obb): ``[cx, cz, ux, uz, half_len, half_wid]`` where
  ``(ux, uz)`` is the unit axis along the box length,
* circle: ``[cx, cz, r]``.

Thick wall segments and door panels are oriented boxes; axis-aligned
rectangles are oriented boxes with axis (1, 0).
"""

from __future__ import annotations

import math

import numpy as np

_EPS = 1e-12

Point = tuple[float, float]


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize a 2-vector; the zero vector maps to itself."""
    n = math.hypot(float(v[0]), float(v[1]))
    if n < _EPS:
        return np.zeros(2)
    return np.asarray(v, dtype=float) / n


def obb_from_segment(a, b, thickness: float) -> np.ndarray:
    """Oriented box covering a thick segment from ``a`` to ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    axis = unit(b - a)
    length = float(np.hypot(*(b - a)))
    center = (a + b) / 2.0
    return np.array(
        [center[0], center[1], axis[0], axis[1], length / 2.0, thickness / 2.0]
    )


def obb_from_rect(lo, hi) -> np.ndarray:
    """Oriented box for an axis-aligned rectangle [lo, hi]."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    center = (lo + hi) / 2.0
    half = (hi - lo) / 2.0
    return np.array([center[0], center[1], 1.0, 0.0, half[0], half[1]])


def _to_local(points: np.ndarray, obbs: np.ndarray):
    """Project points (P,2) into each obb's local frame -> (P,K) x and z."""
    dx = points[:, 0:1] - obbs[None, :, 0]
    dz = points[:, 1:2] - obbs[None, :, 1]
    ux, uz = obbs[:, 2], obbs[:, 3]
    # local x along the box axis, local z along its normal (-uz, ux)
    lx = dx * ux[None, :] + dz * uz[None, :]
    lz = -dx * uz[None, :] + dz * ux[None, :]
    return lx, lz


def points_in_obbs(points: np.ndarray, obbs: np.ndarray) -> np.ndarray:
    """Containment matrix (P,K); boundaries count as inside."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if obbs.size == 0:
        return np.zeros((points.shape[0], 0), dtype=bool)
    lx, lz = _to_local(points, obbs)
    return (np.abs(lx) <= obbs[None, :, 4] + _EPS) & (
        np.abs(lz) <= obbs[None, :, 5] + _EPS
    )


def points_in_circles(points: np.ndarray, circles: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if circles.size == 0:
        return np.zeros((points.shape[0], 0), dtype=bool)
    dx = points[:, 0:1] - circles[None, :, 0]
    dz = points[:, 1:2] - circles[None, :, 1]
    return dx * dx + dz * dz <= (circles[None, :, 2] + _EPS) ** 2


def rays_vs_obbs(origins: np.ndarray, dirs: np.ndarray, obbs: np.ndarray) -> np.ndarray:
    """Entry distance of each ray into each oriented box, (R,K).

    Misses are +inf; a ray starting inside a box gets distance 0. Directions
    must be unit-norm so distances are in meters.
    """
    origins = np.atleast_2d(np.asarray(origins, dtype=float))
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    if obbs.size == 0:
        return np.full((origins.shape[0], 0), np.inf)
    lx, lz = _to_local(origins, obbs)
    ux, uz = obbs[:, 2], obbs[:, 3]
    dlx = dirs[:, 0:1] * ux[None, :] + dirs[:, 1:2] * uz[None, :]
    dlz = -dirs[:, 0:1] * uz[None, :] + dirs[:, 1:2] * ux[None, :]

    hl = obbs[None, :, 4]
    hw = obbs[None, :, 5]

    def slab(o, d, h):
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-h - o) / d
            t2 = (h - o) / d
        tmin = np.minimum(t1, t2)
        tmax = np.maximum(t1, t2)
        parallel = np.abs(d) < _EPS
        inside = np.abs(o) <= h
        tmin = np.where(parallel, np.where(inside, -np.inf, np.inf), tmin)
        tmax = np.where(parallel, np.where(inside, np.inf, -np.inf), tmax)
        return tmin, tmax

    tmin_x, tmax_x = slab(lx, dlx, hl)
    tmin_z, tmax_z = slab(lz, dlz, hw)
    entry = np.maximum(tmin_x, tmin_z)
    exit_ = np.minimum(tmax_x, tmax_z)
    hit = (entry <= exit_) & (exit_ >= 0.0)
    t = np.maximum(entry, 0.0)
    return np.where(hit, t, np.inf)


def rays_vs_circles(
    origins: np.ndarray, dirs: np.ndarray, circles: np.ndarray
) -> np.ndarray:
    """Entry distance of each ray into each circle, (R,C); inf = miss."""
    origins = np.atleast_2d(np.asarray(origins, dtype=float))
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    if circles.size == 0:
        return np.full((origins.shape[0], 0), np.inf)
    mx = origins[:, 0:1] - circles[None, :, 0]
    mz = origins[:, 1:2] - circles[None, :, 1]
    b = mx * dirs[:, 0:1] + mz * dirs[:, 1:2]
    c = mx * mx + mz * mz - circles[None, :, 2] ** 2
    disc = b * b - c
    with np.errstate(invalid="ignore"):
        sq = np.sqrt(np.maximum(disc, 0.0))
    t1 = -b - sq
    t2 = -b + sq
    hit = (disc >= 0.0) & (t2 >= 0.0)
    t = np.maximum(t1, 0.0)
    return np.where(hit, t, np.inf)


def project_point_segment(p, a, b):
    """Closest point on segment [a, b] to p: (point, param t in [0,1], distance)."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom < _EPS:
        return a.copy(), 0.0, float(np.hypot(*(p - a)))
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    q = a + t * ab
    return q, t, float(np.hypot(*(p - q)))


def disc_obb_push(center, radius: float, obb: np.ndarray):
    """Minimum push vector moving a disc out of an oriented box, or None.

    The returned vector has length = penetration depth; the center inside the
    box is pushed out along the cheapest face.
    """
    cx, cz, ux, uz, hl, hw = obb
    dx = center[0] - cx
    dz = center[1] - cz
    lx = dx * ux + dz * uz
    lz = -dx * uz + dz * ux
    axis_u = np.array([ux, uz])
    axis_n = np.array([-uz, ux])
    if abs(lx) <= hl and abs(lz) <= hw:
        # center inside: exit along the closest face
        exit_x = hl - abs(lx)
        exit_z = hw - abs(lz)
        if exit_x < exit_z:
            direction = axis_u if lx >= 0 else -axis_u
            depth = exit_x + radius
        else:
            direction = axis_n if lz >= 0 else -axis_n
            depth = exit_z + radius
        return direction * depth
    qx = np.clip(lx, -hl, hl)
    qz = np.clip(lz, -hw, hw)
    ex = lx - qx
    ez = lz - qz
    dist = math.hypot(ex, ez)
    if dist >= radius:
        return None
    if dist < _EPS:
        return axis_n * radius
    world = (ex * axis_u + ez * axis_n) / dist
    return world * (radius - dist)


def disc_circle_push(center, radius: float, circle: np.ndarray):
    """Minimum push vector moving a disc out of a circle, or None."""
    dx = center[0] - circle[0]
    dz = center[1] - circle[1]
    dist = math.hypot(dx, dz)
    overlap = radius + circle[2] - dist
    if overlap <= 0:
        return None
    if dist < _EPS:
        return np.array([overlap, 0.0])
    return np.array([dx, dz]) / dist * overlap


def disc_obbs_pushes(center, radius: float,
                     obbs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized disc_obb_push over many boxes.

    Returns (pushes (K, 2), depths (K,)); depth 0 marks boxes the disc does
    not overlap. Matches the scalar function's semantics, including the
    cheapest-face exit for a center inside a box.
    """
    cx, cz = obbs[:, 0], obbs[:, 1]
    ux, uz = obbs[:, 2], obbs[:, 3]
    hl, hw = obbs[:, 4], obbs[:, 5]
    dx = center[0] - cx
    dz = center[1] - cz
    lx = dx * ux + dz * uz
    lz = -dx * uz + dz * ux

    inside = (np.abs(lx) <= hl) & (np.abs(lz) <= hw)
    qx = np.clip(lx, -hl, hl)
    qz = np.clip(lz, -hw, hw)
    ex = lx - qx
    ez = lz - qz
    dist = np.hypot(ex, ez)

    with np.errstate(invalid="ignore", divide="ignore"):
        nx = np.where(dist > _EPS, ex / dist, 0.0)
        nz = np.where(dist > _EPS, ez / dist, 1.0)
    depth_out = np.maximum(radius - dist, 0.0)

    exit_x = hl - np.abs(lx)
    exit_z = hw - np.abs(lz)
    use_x = exit_x < exit_z
    sx = np.where(lx >= 0, 1.0, -1.0)
    sz = np.where(lz >= 0, 1.0, -1.0)
    in_nx = np.where(use_x, sx, 0.0)
    in_nz = np.where(use_x, 0.0, sz)
    depth_in = np.where(use_x, exit_x, exit_z) + radius

    px_l = np.where(inside, in_nx * depth_in, nx * depth_out)
    pz_l = np.where(inside, in_nz * depth_in, nz * depth_out)
    depths = np.where(inside, depth_in, depth_out)

    pushes = np.empty((len(obbs), 2))
    pushes[:, 0] = px_l * ux - pz_l * uz
    pushes[:, 1] = px_l * uz + pz_l * ux
    return pushes, depths


def disc_circles_pushes(center, radius: float,
                        circles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized disc_circle_push; depth 0 where there is no overlap."""
    dx = center[0] - circles[:, 0]
    dz = center[1] - circles[:, 1]
    dist = np.hypot(dx, dz)
    depths = np.maximum(radius + circles[:, 2] - dist, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        nx = np.where(dist > _EPS, dx / dist, 1.0)
        nz = np.where(dist > _EPS, dz / dist, 0.0)
    pushes = np.empty((len(circles), 2))
    pushes[:, 0] = nx * depths
    pushes[:, 1] = nz * depths
    return pushes, depths


def disc_hits_obbs(center, radius: float, obbs: np.ndarray) -> bool:
    """True when the disc overlaps any oriented box."""
    if obbs.size == 0:
        return False
    _, depths = disc_obbs_pushes(center, radius, obbs)
    return bool(np.any(depths > 0.0))


def disc_hits_circles(center, radius: float, circles: np.ndarray) -> bool:
    if circles.size == 0:
        return False
    dx = circles[:, 0] - center[0]
    dz = circles[:, 1] - center[1]
    return bool(np.any(dx * dx + dz * dz < (circles[:, 2] + radius) ** 2))


def disc_overlaps_aarect(center, radius: float, lo, hi) -> bool:
    """Touch test between a disc and an axis-aligned rectangle."""
    qx = min(max(center[0], lo[0]), hi[0])
    qz = min(max(center[1], lo[1]), hi[1])
    dx = center[0] - qx
    dz = center[1] - qz
    return dx * dx + dz * dz <= radius * radius

"""Seeded synthetic scenes for verification and tests.

Cameras sit on a sphere looking at the origin with jitter; depth maps are
random positive fields so z-buffer ties have probability ~0. Everything is
deterministic in the seed.
"""

from __future__ import annotations

import numpy as np

from .camera_geometry import Camera, Intrinsics, RigidTransform


def look_at(center, target, world_up=(0.0, 0.0, 1.0)) -> RigidTransform:
    """World-to-camera extrinsics for a camera at `center` facing `target`
    (+z forward, +y down)."""
    center = np.asarray(center, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - center
    forward = forward / np.linalg.norm(forward)
    right = np.cross(forward, np.asarray(world_up, dtype=np.float64))
    n = np.linalg.norm(right)
    if n < 1e-12:  # looking straight along world_up
        right = np.cross(forward, np.array([1.0, 0.0, 0.0]))
        n = np.linalg.norm(right)
    right = right / n
    down = np.cross(forward, right)
    r = np.stack([right, down, forward])
    # Re-orthonormalize so the strict rotation invariant holds exactly.
    u, _, vt = np.linalg.svd(r)
    r = u @ vt
    return RigidTransform(r, -(r @ center))


def random_camera(rng: np.random.Generator, width=64, height=64, distance=(2.5, 3.5)) -> Camera:
    """Camera on a random sphere shell, aimed near the origin."""
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    center = direction * rng.uniform(*distance)
    target = rng.normal(size=3) * 0.2
    focal = rng.uniform(0.8, 1.3) * width
    intr = Intrinsics(
        fx=focal,
        fy=focal * rng.uniform(0.95, 1.05),
        cx=width / 2 + rng.uniform(-1, 1),
        cy=height / 2 + rng.uniform(-1, 1),
        width=width,
        height=height,
    )
    return Camera(intr, look_at(center, target))


def random_depth(
    rng: np.random.Generator, height=64, width=64, near=2.0, far=5.0, invalid_fraction=0.0
) -> np.ndarray:
    depth = rng.uniform(near, far, size=(height, width))
    if invalid_fraction > 0:
        depth[rng.random((height, width)) < invalid_fraction] = 0.0
    return depth


def random_color(rng: np.random.Generator, height=64, width=64) -> np.ndarray:
    return rng.random((height, width, 3)).astype(np.float32)


def random_scene(seed: int, n_contexts=2, size=64, invalid_fraction=0.0):
    """(contexts, target) with contexts = [(color, depth, camera), ...]."""
    rng = np.random.default_rng(seed)
    contexts = []
    for _ in range(n_contexts):
        cam = random_camera(rng, width=size, height=size)
        depth = random_depth(rng, size, size, invalid_fraction=invalid_fraction)
        color = random_color(rng, size, size)
        contexts.append((color, depth, cam))
    target = random_camera(rng, width=size, height=size)
    return contexts, target

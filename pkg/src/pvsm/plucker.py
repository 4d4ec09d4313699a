"""Plücker line coordinates for camera rays and their SE(3) action.

A ray with origin o and unit direction d is stored as L = (m, d) with
moment m = o x d. Valid coordinates satisfy the Klein quadric constraint
m . d = 0. The rigid-motion action on lines is

    (m', d') = (R m + [t]x R d,  R d)

which is what makes a uniform world transform act *non-uniformly* across a
per-pixel ray map: each pixel's 6-vector moves by a different amount.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera_geometry import Camera, RigidTransform, pixel_ray
from .errors import DimensionMismatch, NonUnitDirection

UNIT_TOL = 1e-9


def _cross_matrix(t: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -t[2], t[1]], [t[2], 0.0, -t[0]], [-t[1], t[0], 0.0]]
    )


@dataclass(frozen=True)
class PluckerRay:
    """6D line coordinates (moment, direction).

    Construction does not validate; use plucker_from_ray for checked
    construction and klein_residual to measure constraint violation.
    """

    moment: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "moment", np.asarray(self.moment, dtype=np.float64).reshape(3)
        )
        object.__setattr__(
            self, "direction", np.asarray(self.direction, dtype=np.float64).reshape(3)
        )

    def as_vector(self) -> np.ndarray:
        """Concatenated 6-vector (m, d)."""
        return np.concatenate([self.moment, self.direction])


@dataclass(frozen=True)
class PluckerMap:
    """Per-pixel ray grid: moments and directions as (H, W, 3) arrays."""

    moments: np.ndarray
    directions: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.moments, dtype=np.float64)
        d = np.asarray(self.directions, dtype=np.float64)
        if m.shape != d.shape or m.ndim != 3 or m.shape[2] != 3:
            raise DimensionMismatch(
                f"moment/direction grids must both be (H, W, 3), got {m.shape} and {d.shape}"
            )
        object.__setattr__(self, "moments", m)
        object.__setattr__(self, "directions", d)

    @property
    def height(self) -> int:
        return self.moments.shape[0]

    @property
    def width(self) -> int:
        return self.moments.shape[1]

    def ray_at(self, row: int, col: int) -> PluckerRay:
        return PluckerRay(self.moments[row, col], self.directions[row, col])

    def as_tensor(self) -> np.ndarray:
        """(H, W, 6) array with channels (m, d), the serialization layout."""
        return np.concatenate([self.moments, self.directions], axis=2)

    @staticmethod
    def from_tensor(tensor: np.ndarray) -> "PluckerMap":
        t = np.asarray(tensor, dtype=np.float64)
        if t.ndim != 3 or t.shape[2] != 6:
            raise DimensionMismatch(f"expected (H, W, 6) tensor, got {t.shape}")
        return PluckerMap(t[:, :, :3], t[:, :, 3:])


def plucker_from_ray(origin, direction) -> PluckerRay:
    """Line coordinates of the ray through `origin` along unit `direction`."""
    o = np.asarray(origin, dtype=np.float64).reshape(3)
    d = np.asarray(direction, dtype=np.float64).reshape(3)
    if abs(np.linalg.norm(d) - 1.0) > UNIT_TOL:
        raise NonUnitDirection(f"|direction| = {np.linalg.norm(d)}")
    return PluckerRay(np.cross(o, d), d)


def plucker_map(camera: Camera) -> PluckerMap:
    """Per-pixel ray map for a camera, one ray through each pixel center.

    Entry (row, col) is the ray through continuous point (col + 0.5,
    row + 0.5). Evaluation is vectorized row-parallel-safe: output is a pure
    function of the camera.
    """
    k = camera.intrinsics
    cols = np.arange(k.width, dtype=np.float64) + 0.5
    rows = np.arange(k.height, dtype=np.float64) + 0.5
    u, v = np.meshgrid(cols, rows)  # (H, W)
    d_cam = np.stack(
        [(u - k.cx) / k.fx, (v - k.cy) / k.fy, np.ones_like(u)], axis=2
    )
    d_world = d_cam @ camera.extrinsics.rotation  # row-vectors times R^T^T = R^T d
    d_world /= np.linalg.norm(d_world, axis=2, keepdims=True)
    origin = camera.center
    moments = np.cross(np.broadcast_to(origin, d_world.shape), d_world)
    return PluckerMap(moments, d_world)


def act_se3(g: RigidTransform, ray: PluckerRay) -> PluckerRay:
    """Rigid-motion action on line coordinates."""
    r, t = g.rotation, g.translation
    d_new = r @ ray.direction
    m_new = r @ ray.moment + np.cross(t, d_new)
    return PluckerRay(m_new, d_new)


def act_se3_map(g: RigidTransform, pmap: PluckerMap) -> PluckerMap:
    """act_se3 applied entrywise to a full map (vectorized)."""
    r, t = g.rotation, g.translation
    d_new = pmap.directions @ r.T
    m_new = pmap.moments @ r.T + np.cross(np.broadcast_to(t, d_new.shape), d_new)
    return PluckerMap(m_new, d_new)


def klein_residual(ray: PluckerRay) -> tuple[float, float]:
    """(m . d, |d| - 1): both are 0 for valid unit-direction coordinates."""
    orthogonality = float(np.dot(ray.moment, ray.direction))
    norm_error = float(np.linalg.norm(ray.direction) - 1.0)
    return orthogonality, norm_error


def klein_residual_map(pmap: PluckerMap) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise Klein residuals as (H, W) arrays."""
    orthogonality = np.einsum("hwc,hwc->hw", pmap.moments, pmap.directions)
    norm_error = np.linalg.norm(pmap.directions, axis=2) - 1.0
    return orthogonality, norm_error


def perturbation_field(g: RigidTransform, pmap: PluckerMap) -> np.ndarray:
    """Per-pixel 6D displacement ||L'(i,j) - L(i,j)||_2 under the action of g.

    Measures how unevenly a single world transform moves a ray map: for a
    generic camera the field is far from constant.
    """
    moved = act_se3_map(g, pmap)
    dm = moved.moments - pmap.moments
    dd = moved.directions - pmap.directions
    return np.sqrt(
        np.einsum("hwc,hwc->hw", dm, dm) + np.einsum("hwc,hwc->hw", dd, dd)
    )

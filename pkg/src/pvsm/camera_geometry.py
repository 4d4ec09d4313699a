"""Pinhole camera model and rigid/similarity transforms.

Conventions (fixed for the whole toolkit):

    - World-to-camera extrinsics: X_cam = R @ X_world + t.
    - OpenCV camera axes: +z forward, +x right, +y down.
    - Pixel (row r, col c) has continuous center (c + 0.5, r + 0.5);
      all projection math runs on continuous (u, v) coordinates.
    - Scalars are float64 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NonPositiveScale, PointBehindCamera

# Orthonormality tolerance for stored rotations, per entry.
ROTATION_TOL = 1e-9
# Camera-frame z below this counts as behind the camera.
EPSILON_DEPTH = 1e-8


def _as_matrix(value) -> np.ndarray:
    m = np.asarray(value, dtype=np.float64)
    if m.shape != (3, 3):
        raise ValueError(f"expected 3x3 matrix, got shape {m.shape}")
    m = m.copy()
    m.flags.writeable = False
    return m


def _as_vector(value) -> np.ndarray:
    v = np.asarray(value, dtype=np.float64).reshape(-1)
    if v.shape != (3,):
        raise ValueError(f"expected 3-vector, got shape {v.shape}")
    v = v.copy()
    v.flags.writeable = False
    return v


def _check_rotation(rotation: np.ndarray, tol: float = ROTATION_TOL) -> None:
    err = rotation.T @ rotation - np.eye(3)
    if np.max(np.abs(err)) > tol:
        raise ValueError("rotation is not orthonormal within tolerance")
    if abs(np.linalg.det(rotation) - 1.0) > tol:
        raise ValueError("rotation determinant is not +1 within tolerance")


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics plus image size in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (self.width >= 1 and self.height >= 1):
            raise ValueError("image dimensions must be >= 1")

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    def scaled_focals(self, sx: float, sy: float) -> "Intrinsics":
        """New intrinsics with fx, fy multiplied by sx, sy."""
        return replace(self, fx=self.fx * sx, fy=self.fy * sy)


@dataclass(frozen=True)
class RigidTransform:
    """Element of SE(3): x -> rotation @ x + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", _as_matrix(self.rotation))
        object.__setattr__(self, "translation", _as_vector(self.translation))
        _check_rotation(self.rotation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one 3-vector or an (N, 3) array of points."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation


@dataclass(frozen=True)
class SimilarityTransform:
    """Element of Sim(3): x -> scale * rotation @ x + translation."""

    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        if not (self.scale > 0):
            raise NonPositiveScale(f"scale must be > 0, got {self.scale}")
        object.__setattr__(self, "rotation", _as_matrix(self.rotation))
        object.__setattr__(self, "translation", _as_vector(self.translation))
        _check_rotation(self.rotation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return self.scale * (pts @ self.rotation.T) + self.translation


def identity_transform() -> RigidTransform:
    return RigidTransform(np.eye(3), np.zeros(3))


def rotation_z(angle: float) -> np.ndarray:
    """3x3 rotation about the z axis by `angle` radians."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def compose(g2: RigidTransform, g1: RigidTransform) -> RigidTransform:
    """Composite transform applying g1 first, then g2."""
    return RigidTransform(
        g2.rotation @ g1.rotation, g2.rotation @ g1.translation + g2.translation
    )


def inverse(g: RigidTransform) -> RigidTransform:
    return RigidTransform(g.rotation.T, -(g.rotation.T @ g.translation))


@dataclass(frozen=True)
class Camera:
    """Pinhole camera: intrinsics + world-to-camera extrinsics."""

    intrinsics: Intrinsics
    extrinsics: RigidTransform = field(default_factory=identity_transform)

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates, -R^T t."""
        g = self.extrinsics
        return -(g.rotation.T @ g.translation)

    @property
    def forward(self) -> np.ndarray:
        """Unit forward (optical) axis in world coordinates."""
        return self.extrinsics.rotation[2, :].copy()

    @property
    def width(self) -> int:
        return self.intrinsics.width

    @property
    def height(self) -> int:
        return self.intrinsics.height


def pixel_ray(camera: Camera, u: float, v: float) -> tuple[np.ndarray, np.ndarray]:
    """World-space ray through continuous image point (u, v).

    Returns (origin, direction) with origin at the camera center and
    |direction| = 1. (u, v) may lie outside the image; rays extrapolate.
    """
    k = camera.intrinsics
    d_cam = np.array([(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0])
    d_world = camera.extrinsics.rotation.T @ d_cam
    d_world = d_world / np.linalg.norm(d_world)
    return camera.center, d_world


def project(camera: Camera, point) -> tuple[float, float, float]:
    """Project a world point; returns (u, v, depth).

    depth is the camera-frame z coordinate. Raises PointBehindCamera when
    depth <= EPSILON_DEPTH.
    """
    p_cam = camera.extrinsics.apply(np.asarray(point, dtype=np.float64))
    z = p_cam[2]
    if z <= EPSILON_DEPTH:
        raise PointBehindCamera(f"point depth {z} <= {EPSILON_DEPTH}")
    k = camera.intrinsics
    u = k.fx * p_cam[0] / z + k.cx
    v = k.fy * p_cam[1] / z + k.cy
    return u, v, z


def project_points(camera: Camera, points: np.ndarray):
    """Vectorized projection of an (N, 3) array.

    Returns (u, v, depth, in_front) without raising; in_front marks points
    with depth > EPSILON_DEPTH, and (u, v) are valid only where in_front.
    """
    p_cam = camera.extrinsics.apply(points)
    z = p_cam[:, 2]
    in_front = z > EPSILON_DEPTH
    k = camera.intrinsics
    with np.errstate(divide="ignore", invalid="ignore"):
        u = k.fx * p_cam[:, 0] / z + k.cx
        v = k.fy * p_cam[:, 1] / z + k.cy
    return u, v, z, in_front


def apply_gauge(g: RigidTransform, camera: Camera) -> Camera:
    """Re-express a camera after the world frame is transformed by g.

    The new camera sees the transformed world exactly as the old camera saw
    the original one: project(apply_gauge(g, cam), g(X)) == project(cam, X).
    """
    r, t = camera.extrinsics.rotation, camera.extrinsics.translation
    r_new = r @ g.rotation.T
    t_new = t - r_new @ g.translation
    return Camera(camera.intrinsics, RigidTransform(r_new, t_new))


def apply_world_scale(s: float, camera: Camera) -> Camera:
    """Rescale the world by s > 0: camera center moves to s * center."""
    if not (s > 0):
        raise NonPositiveScale(f"world scale must be > 0, got {s}")
    g = camera.extrinsics
    return Camera(camera.intrinsics, RigidTransform(g.rotation, s * g.translation))

"""Projective conditioning: unproject context RGB-D views, splat into a target.

The pipeline is a purely geometric renderer: context pixels with valid depth
lift to a world point cloud, the merged cloud is z-buffer splatted into the
target camera, and the result carries a coverage mask plus the depth buffer.
Because the cloud and the target camera transform together under any world
re-gauging, the rendered conditioning image depends only on the relative
scene-camera configuration.

Rasterization contract: fixed-radius hard disc splats, nearest depth wins,
ties broken by lowest point index. Tiled/threaded execution is bit-identical
to serial execution.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .camera_geometry import (
    Camera,
    RigidTransform,
    SimilarityTransform,
    project_points,
)
from .errors import DimensionMismatch

BACKGROUND = 0.0


def validate_color_image(image) -> np.ndarray:
    """Coerce to float32 (H, W, 3) in [0, 1]; reject anything else."""
    arr = np.ascontiguousarray(image, dtype=np.float32)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DimensionMismatch(f"color image must be (H, W, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("color image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("color image values must lie in [0, 1]")
    return arr


def validate_depth_map(depth) -> np.ndarray:
    """Coerce to float64 (H, W); 0 marks invalid pixels, values must be >= 0."""
    arr = np.ascontiguousarray(depth, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"depth map must be (H, W), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("depth map contains non-finite values")
    if arr.min() < 0.0:
        raise ValueError("depth values must be >= 0")
    return arr


@dataclass(frozen=True)
class PointCloud:
    """World-space points with colors and provenance.

    positions: (N, 3) float64; colors: (N, 3) float32 in [0, 1];
    source_view: (N,) view index; source_pixel: (N, 2) (row, col).
    """

    positions: np.ndarray
    colors: np.ndarray
    source_view: np.ndarray
    source_pixel: np.ndarray

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=np.float64).reshape(-1, 3)
        col = np.ascontiguousarray(self.colors, dtype=np.float32).reshape(-1, 3)
        sv = np.ascontiguousarray(self.source_view, dtype=np.int32).reshape(-1)
        sp = np.ascontiguousarray(self.source_pixel, dtype=np.int32).reshape(-1, 2)
        n = pos.shape[0]
        if not (col.shape[0] == n and sv.shape[0] == n and sp.shape[0] == n):
            raise DimensionMismatch("point cloud field lengths disagree")
        if n and not np.all(np.isfinite(pos)):
            raise ValueError("point positions must be finite")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "colors", col)
        object.__setattr__(self, "source_view", sv)
        object.__setattr__(self, "source_pixel", sp)

    @property
    def size(self) -> int:
        return self.positions.shape[0]


def empty_cloud() -> PointCloud:
    return PointCloud(
        np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0), np.zeros((0, 2))
    )


@dataclass(frozen=True)
class ProjectionImage:
    """Rasterized conditioning image.

    color: (H, W, 3) float32, BACKGROUND where uncovered;
    coverage: (H, W) bool, True where at least one splat landed;
    zbuffer: (H, W) float64, +inf where uncovered.
    """

    color: np.ndarray
    coverage: np.ndarray
    zbuffer: np.ndarray


def unproject_view(color, depth, camera: Camera, view_index: int = 0) -> PointCloud:
    """Lift every valid-depth pixel of one view to a world point.

    Depth is camera-frame z. Pixel (r, c) lifts through its continuous
    center (c + 0.5, r + 0.5). Points are emitted in row-major pixel order.
    """
    color = validate_color_image(color)
    depth = validate_depth_map(depth)
    k = camera.intrinsics
    if color.shape[:2] != (k.height, k.width) or depth.shape != (k.height, k.width):
        raise DimensionMismatch(
            f"view buffers {color.shape[:2]}/{depth.shape} do not match camera "
            f"{(k.height, k.width)}"
        )
    rows, cols = np.nonzero(depth > 0)
    z = depth[rows, cols]
    u = cols + 0.5
    v = rows + 0.5
    p_cam = np.stack([z * ((u - k.cx) / k.fx), z * ((v - k.cy) / k.fy), z], axis=1)
    g = camera.extrinsics
    p_world = (p_cam - g.translation) @ g.rotation  # row-wise R^T (X - t)
    return PointCloud(
        p_world,
        color[rows, cols],
        np.full(rows.shape[0], view_index, dtype=np.int32),
        np.stack([rows, cols], axis=1),
    )


def merge(clouds: Sequence[PointCloud]) -> PointCloud:
    """Concatenate clouds, preserving input order and provenance."""
    if not clouds:
        return empty_cloud()
    if len(clouds) == 1:
        return clouds[0]
    return PointCloud(
        np.concatenate([c.positions for c in clouds]),
        np.concatenate([c.colors for c in clouds]),
        np.concatenate([c.source_view for c in clouds]),
        np.concatenate([c.source_pixel for c in clouds]),
    )


def transform_cloud(g, cloud: PointCloud) -> PointCloud:
    """Map positions by a rigid or similarity transform; colors unchanged."""
    if not isinstance(g, (RigidTransform, SimilarityTransform)):
        raise TypeError(f"expected RigidTransform or SimilarityTransform, got {type(g)}")
    return PointCloud(
        g.apply(cloud.positions), cloud.colors, cloud.source_view, cloud.source_pixel
    )


def _splat_candidates(cloud: PointCloud, camera: Camera, splat_radius: float):
    """(pixel_id, depth, point_index) triples for every pixel each splat covers.

    A pixel is covered when its center lies within splat_radius of the
    projected point (radius 0: the single containing pixel). Points behind
    the camera or outside the radius-padded frame are dropped.
    """
    h, w = camera.height, camera.width
    u, v, z, in_front = project_points(camera, cloud.positions)
    # conservative prefilter only; the exact per-pixel tests below decide
    pad = splat_radius + 1.0
    keep = in_front & (u >= -pad) & (u <= w + pad) & (v >= -pad) & (v <= h + pad)
    point_idx = np.nonzero(keep)[0]
    u, v, z = u[point_idx], v[point_idx], z[point_idx]

    if splat_radius == 0:
        cols = np.floor(u).astype(np.int64)
        rows = np.floor(v).astype(np.int64)
        ok = (cols >= 0) & (cols < w) & (rows >= 0) & (rows < h)
        return rows[ok] * w + cols[ok], z[ok], point_idx[ok]

    # Integer pixel (r, c) is a candidate when its center (c+.5, r+.5) can lie
    # in the closed disc; span bounds the count of integers in a 2r interval.
    span = int(np.floor(2.0 * splat_radius)) + 1
    c_min = np.ceil(u - splat_radius - 0.5).astype(np.int64)
    r_min = np.ceil(v - splat_radius - 0.5).astype(np.int64)
    offsets = np.arange(span, dtype=np.int64)
    cc = c_min[:, None, None] + offsets[None, None, :]
    rr = r_min[:, None, None] + offsets[None, :, None]
    du = (cc + 0.5) - u[:, None, None]
    dv = (rr + 0.5) - v[:, None, None]
    ok = (
        (du * du + dv * dv <= splat_radius * splat_radius)
        & (cc >= 0)
        & (cc < w)
        & (rr >= 0)
        & (rr < h)
    )
    n_off = span * span
    pix = (rr * w + cc).reshape(-1)[ok.reshape(-1)]
    depth = np.repeat(z, n_off)[ok.reshape(-1)]
    pts = np.repeat(point_idx, n_off)[ok.reshape(-1)]
    return pix, depth, pts


def _reduce_tile(pix, depth, pts, lo_pix, hi_pix):
    """Per-pixel winner within [lo_pix, hi_pix): lexicographic (depth, index)."""
    in_tile = (pix >= lo_pix) & (pix < hi_pix)
    pix, depth, pts = pix[in_tile], depth[in_tile], pts[in_tile]
    if pix.size == 0:
        return pix, depth, pts
    order = np.lexsort((pts, depth, pix))
    pix, depth, pts = pix[order], depth[order], pts[order]
    first = np.ones(pix.size, dtype=bool)
    first[1:] = pix[1:] != pix[:-1]
    return pix[first], depth[first], pts[first]


def rasterize(
    cloud: PointCloud,
    camera: Camera,
    splat_radius: float = 1.0,
    num_threads: int = 1,
) -> ProjectionImage:
    """Z-buffer splat a point cloud into a camera.

    Per pixel the candidate with the smallest depth wins; exact depth ties
    go to the smallest point index, so output is independent of evaluation
    order. num_threads > 1 reduces disjoint row bands concurrently with
    bit-identical results.
    """
    if splat_radius < 0:
        raise ValueError(f"splat_radius must be >= 0, got {splat_radius}")
    h, w = camera.height, camera.width
    color = np.full((h, w, 3), BACKGROUND, dtype=np.float32)
    coverage = np.zeros((h, w), dtype=bool)
    zbuffer = np.full((h, w), np.inf, dtype=np.float64)
    out = ProjectionImage(color, coverage, zbuffer)
    if cloud.size == 0:
        return out

    pix, depth, pts = _splat_candidates(cloud, camera, splat_radius)
    if pix.size == 0:
        return out

    n_tiles = max(1, min(int(num_threads) if num_threads else 1, h))
    bounds = [(h * i // n_tiles, h * (i + 1) // n_tiles) for i in range(n_tiles)]

    def run(tile):
        row_lo, row_hi = tile
        return _reduce_tile(pix, depth, pts, row_lo * w, row_hi * w)

    if n_tiles == 1:
        results = [run(bounds[0])]
    else:
        with ThreadPoolExecutor(max_workers=n_tiles) as pool:
            results = list(pool.map(run, bounds))

    for t_pix, t_depth, t_pts in results:
        rows, cols = t_pix // w, t_pix % w
        coverage[rows, cols] = True
        zbuffer[rows, cols] = t_depth
        color[rows, cols] = cloud.colors[t_pts]
    return out


def projective_condition(
    contexts: Iterable[tuple],
    target: Camera,
    splat_radius: float = 1.0,
    num_threads: int = 1,
) -> ProjectionImage:
    """Render the merged unprojection of (color, depth, camera) contexts
    into the target camera. The identity tested throughout: re-gauging the
    whole configuration (all cameras by the same rigid or similarity
    transform, depths along for scale) leaves this image unchanged."""
    clouds = [
        unproject_view(color, depth, cam, view_index=i)
        for i, (color, depth, cam) in enumerate(contexts)
    ]
    return rasterize(merge(clouds), target, splat_radius, num_threads=num_threads)

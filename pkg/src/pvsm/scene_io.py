"""Scene bundles and file formats: scene.json, PNG, PFM depth, raw tensors.

A scene directory holds `scene.json` plus per-view image files:

    {
      "world_unit": "meters",
      "views": [
        {"id": "v0",
         "camera": {"fx": .., "fy": .., "cx": .., "cy": ..,
                    "width": .., "height": ..,
                    "R": [9 numbers, row-major, world-to-camera],
                    "t": [3 numbers]},
         "color_path": "v0_color.png",
         "depth_path": "v0_depth.pfm"},
        ...
      ],
      "context_ids": [0, 1],
      "target_ids": [2]
    }

Context views need color + depth; render-target views may carry null paths.
Depth uses grayscale PFM (float32, little-endian, scale line "-1.0", 0 =
invalid). Raw tensors are float32 little-endian with a 16-byte header.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .camera_geometry import Camera, Intrinsics, RigidTransform
from .errors import (
    ConventionMismatch,
    DimensionMismatch,
    MalformedHeader,
    MalformedJson,
    MissingFile,
)

RAW_TENSOR_MAGIC = b"PVT1"
ORTHONORMAL_LOAD_TOL = 1e-6


# ---------------------------------------------------------------------------
# cameras <-> plain dicts (the wire schema used by scene.json and the CLI)

def camera_to_dict(camera: Camera) -> dict:
    k = camera.intrinsics
    g = camera.extrinsics
    return {
        "fx": k.fx,
        "fy": k.fy,
        "cx": k.cx,
        "cy": k.cy,
        "width": k.width,
        "height": k.height,
        "R": [float(x) for x in g.rotation.reshape(-1)],
        "t": [float(x) for x in g.translation],
    }


def camera_from_dict(data: dict) -> Camera:
    try:
        intr = Intrinsics(
            fx=float(data["fx"]),
            fy=float(data["fy"]),
            cx=float(data["cx"]),
            cy=float(data["cy"]),
            width=int(data["width"]),
            height=int(data["height"]),
        )
        r = np.asarray(data["R"], dtype=np.float64).reshape(3, 3)
        t = np.asarray(data["t"], dtype=np.float64).reshape(3)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedJson(f"bad camera record: {exc}") from exc

    err = np.max(np.abs(r.T @ r - np.eye(3)))
    if err > ORTHONORMAL_LOAD_TOL or np.linalg.det(r) < 0:
        raise ConventionMismatch(
            f"stored R is not a proper world-to-camera rotation "
            f"(orthonormality error {err:.3g}, det {np.linalg.det(r):.6f})"
        )
    if err > 1e-9:
        # Mildly noisy external camera: snap to the nearest rotation so the
        # strict in-memory invariant holds.
        u, _, vt = np.linalg.svd(r)
        r = u @ vt
    return Camera(intr, RigidTransform(r, t))


# ---------------------------------------------------------------------------
# PNG images

def save_image(path, image) -> None:
    """Save a float image in [0, 1] (or a bool mask) as an 8-bit PNG.

    Quantization is round-half-up: byte = floor(v * 255 + 0.5).
    """
    path = Path(path)
    arr = np.asarray(image)
    if arr.dtype == bool:
        data = np.where(arr, np.uint8(255), np.uint8(0))
    else:
        data = np.floor(arr.astype(np.float64) * 255.0 + 0.5).astype(np.uint8)
    if data.ndim == 3 and data.shape[2] == 3:
        Image.fromarray(data, mode="RGB").save(path, format="PNG")
    elif data.ndim == 2:
        Image.fromarray(data, mode="L").save(path, format="PNG")
    else:
        raise DimensionMismatch(f"cannot save image of shape {arr.shape}")


def load_image(path) -> np.ndarray:
    """Load an 8-bit PNG as float32 in [0, 1] ((H, W, 3) or (H, W))."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    with Image.open(path) as img:
        arr = np.asarray(img)
    if arr.dtype != np.uint8:
        raise MalformedHeader(f"{path}: expected 8-bit PNG, got {arr.dtype}")
    return (arr.astype(np.float32)) / np.float32(255.0)


def load_mask(path) -> np.ndarray:
    """Load a mask PNG: nonzero bytes are True."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"))
    return arr != 0


# ---------------------------------------------------------------------------
# PFM depth maps (grayscale, float32, bottom-up rows per PFM convention)

def save_pfm(path, data) -> None:
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim != 2:
        raise DimensionMismatch(f"PFM writer expects (H, W), got {arr.shape}")
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.ascontiguousarray(arr[::-1, :]).astype("<f4").tobytes())


def load_pfm(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    with open(path, "rb") as f:
        blob = f.read()
    try:
        magic_end = blob.index(b"\n")
        dims_end = blob.index(b"\n", magic_end + 1)
        scale_end = blob.index(b"\n", dims_end + 1)
        magic = blob[:magic_end]
        w, h = (int(x) for x in blob[magic_end + 1 : dims_end].split())
        scale = float(blob[dims_end + 1 : scale_end])
    except (ValueError, IndexError) as exc:
        raise MalformedHeader(f"{path}: bad PFM header") from exc
    if magic != b"Pf":
        raise MalformedHeader(f"{path}: expected grayscale PFM magic 'Pf'")
    if scale >= 0:
        raise MalformedHeader(f"{path}: expected little-endian PFM (scale < 0)")
    payload = blob[scale_end + 1 :]
    if len(payload) != w * h * 4:
        raise MalformedHeader(
            f"{path}: payload is {len(payload)} bytes, expected {w * h * 4}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(h, w)
    return np.ascontiguousarray(arr[::-1, :])


# ---------------------------------------------------------------------------
# raw tensors: 16-byte header (magic, H, W, C as uint32 LE) + float32 LE data

def save_raw_tensor(path, buffer) -> None:
    """Write an (H, W, C) or (H, W) float buffer; round trip is bit-exact.

    NaN is rejected; +/-inf is allowed (z-buffers use +inf for background).
    """
    arr = np.asarray(buffer, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise DimensionMismatch(f"raw tensor must be (H, W, C), got {arr.shape}")
    if np.any(np.isnan(arr)):
        raise ValueError("raw tensor contains NaN")
    h, w, c = arr.shape
    header = RAW_TENSOR_MAGIC + np.array([h, w, c], dtype="<u4").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(arr).astype("<f4").tobytes())


def load_raw_tensor(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 16 or blob[:4] != RAW_TENSOR_MAGIC:
        raise MalformedHeader(f"{path}: bad raw-tensor magic/header")
    h, w, c = np.frombuffer(blob[4:16], dtype="<u4")
    expected = 16 + int(h) * int(w) * int(c) * 4
    if len(blob) != expected:
        raise MalformedHeader(
            f"{path}: file is {len(blob)} bytes, header implies {expected}"
        )
    return np.frombuffer(blob[16:], dtype="<f4").reshape(int(h), int(w), int(c)).copy()


# ---------------------------------------------------------------------------
# scene bundles

@dataclass(frozen=True)
class SceneView:
    id: str
    camera: Camera
    color_path: str | None
    depth_path: str | None
    color: np.ndarray | None  # float32 (H, W, 3)
    depth: np.ndarray | None  # float32 (H, W), 0 = invalid


@dataclass(frozen=True)
class SceneBundle:
    root: Path
    views: tuple
    context_ids: tuple  # indices into views
    target_ids: tuple
    world_unit: str

    def view_by_id(self, view_id: str) -> SceneView:
        for v in self.views:
            if v.id == view_id:
                return v
        raise KeyError(view_id)

    def contexts(self):
        """(color, depth, camera) triples for the context views."""
        out = []
        for i in self.context_ids:
            v = self.views[i]
            out.append((v.color, v.depth, v.camera))
        return out


def load_scene(path) -> SceneBundle:
    root = Path(path)
    scene_json = root / "scene.json"
    if not root.is_dir() or not scene_json.exists():
        raise MissingFile(f"{root}: no scene.json found")
    try:
        data = json.loads(scene_json.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedJson(f"{scene_json}: {exc}") from exc

    try:
        raw_views = data["views"]
        context_ids = [int(i) for i in data["context_ids"]]
        target_ids = [int(i) for i in data["target_ids"]]
        world_unit = str(data.get("world_unit", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedJson(f"{scene_json}: {exc}") from exc

    views = []
    seen_ids = set()
    for raw in raw_views:
        try:
            view_id = str(raw["id"])
            camera = camera_from_dict(raw["camera"])
            color_path = raw.get("color_path")
            depth_path = raw.get("depth_path")
        except (KeyError, TypeError) as exc:
            raise MalformedJson(f"{scene_json}: bad view record: {exc}") from exc
        if view_id in seen_ids:
            raise MalformedJson(f"{scene_json}: duplicate view id {view_id!r}")
        seen_ids.add(view_id)

        color = depth = None
        shape = (camera.height, camera.width)
        if color_path is not None:
            color = load_image(root / color_path)
            if color.ndim != 3 or color.shape[:2] != shape:
                raise DimensionMismatch(
                    f"{color_path}: color shape {color.shape} does not match "
                    f"camera {shape}"
                )
        if depth_path is not None:
            depth = load_pfm(root / depth_path)
            if depth.shape != shape:
                raise DimensionMismatch(
                    f"{depth_path}: depth shape {depth.shape} does not match "
                    f"camera {shape}"
                )
        views.append(SceneView(view_id, camera, color_path, depth_path, color, depth))

    n = len(views)
    for idx in context_ids + target_ids:
        if not (0 <= idx < n):
            raise MalformedJson(f"{scene_json}: view index {idx} out of range")
    for idx in context_ids:
        if views[idx].color is None or views[idx].depth is None:
            raise MalformedJson(
                f"{scene_json}: context view {views[idx].id!r} needs color and depth"
            )
    return SceneBundle(root, tuple(views), tuple(context_ids), tuple(target_ids), world_unit)


def save_scene(
    root,
    views,
    context_ids,
    target_ids,
    world_unit: str = "",
) -> None:
    """Write a scene bundle.

    `views` is a list of (id, camera, color_or_None, depth_or_None). Float
    camera parameters serialize via repr so a reload is bit-exact.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    records = []
    for view_id, camera, color, depth in views:
        color_path = depth_path = None
        if color is not None:
            color_path = f"{view_id}_color.png"
            save_image(root / color_path, color)
        if depth is not None:
            depth_path = f"{view_id}_depth.pfm"
            save_pfm(root / depth_path, np.asarray(depth, dtype=np.float32))
        records.append(
            {
                "id": view_id,
                "camera": camera_to_dict(camera),
                "color_path": color_path,
                "depth_path": depth_path,
            }
        )
    payload = {
        "world_unit": world_unit,
        "views": records,
        "context_ids": list(context_ids),
        "target_ids": list(target_ids),
    }
    (root / "scene.json").write_text(json.dumps(payload, indent=2) + "\n")


def save_projection(out_dir, projection) -> None:
    """ProjectionImage artifacts: color.png, coverage.png, zbuffer.rt, color.rt.

    color.rt carries the unquantized float32 colors so consumers that need
    exact values are not limited by PNG's 8 bits.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_image(out_dir / "color.png", projection.color)
    save_image(out_dir / "coverage.png", projection.coverage)
    save_raw_tensor(out_dir / "zbuffer.rt", projection.zbuffer.astype(np.float32))
    save_raw_tensor(out_dir / "color.rt", projection.color)

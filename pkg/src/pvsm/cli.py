"""Command-line surface.

Exit codes are stable: 0 success, 1 invariant/verification failure,
2 usage error, 3 I/O error. All randomized commands take an explicit seed
and re-running any command reproduces its outputs byte for byte.
Structured results go to stdout as line-oriented JSON; diagnostics to
stderr. PVSM_THREADS caps internal parallelism (0 = auto).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .camera_geometry import Camera, RigidTransform
from .conditioning import projective_condition
from .consistency_bench import (
    AnisotropicPixel,
    DollyZoomParams,
    FovZoom,
    RandomGauge,
    Roll,
    WorldScale,
    apply_transform,
    dolly_zoom_trajectory,
    gauge_contexts,
    scale_contexts,
    spec_to_dict,
)
from .errors import SceneIoError, ToolkitError
from .mae_corruption import corrupt, spec_from_dict as corruption_spec_from_dict
from .metrics import evaluate_pair
from .plucker import act_se3_map, plucker_map
from .scene_io import (
    camera_from_dict,
    camera_to_dict,
    load_image,
    load_mask,
    load_raw_tensor,
    load_scene,
    save_image,
    save_projection,
    save_raw_tensor,
)
from .verify import run_all

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(Exception):
    """Bad arguments or argument/scene combinations (exit 2)."""


def resolve_threads(requested: int | None) -> int:
    """Requested thread count clamped by PVSM_THREADS (0 = auto)."""
    n = 1 if requested is None else requested
    if n == 0:
        n = os.cpu_count() or 1
    cap_env = os.environ.get("PVSM_THREADS")
    if cap_env:
        cap = int(cap_env)
        if cap == 0:
            cap = os.cpu_count() or 1
        n = min(n, cap)
    return max(1, n)


def _emit(record: dict) -> None:
    sys.stdout.write(json.dumps(record) + "\n")


class output_dir:
    """Atomically created output directory: work in a temp sibling, rename
    into place on success. An existing destination needs --force."""

    def __init__(self, path, force: bool):
        self.final = Path(path)
        self.force = force
        self.tmp = None

    def __enter__(self) -> Path:
        if self.final.exists() and not self.force:
            raise UsageError(f"{self.final} exists; pass --force to overwrite")
        self.final.parent.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(
            tempfile.mkdtemp(prefix=self.final.name + ".tmp-", dir=self.final.parent)
        )
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            shutil.rmtree(self.tmp, ignore_errors=True)
            return False
        if self.final.exists():
            shutil.rmtree(self.final)
        os.replace(self.tmp, self.final)
        return False


def _view_with_buffers(bundle, view_id: str):
    try:
        view = bundle.view_by_id(view_id)
    except KeyError:
        raise UsageError(f"unknown view id {view_id!r}") from None
    return view


def _context_triples(bundle, ids: list[str]):
    triples = []
    for vid in ids:
        view = _view_with_buffers(bundle, vid)
        if view.color is None or view.depth is None:
            raise UsageError(f"view {vid!r} has no color/depth and cannot be a context")
        triples.append((view.color, view.depth, view.camera))
    return triples


# ---------------------------------------------------------------------------
# commands

def cmd_project(args) -> int:
    bundle = load_scene(args.scene)
    contexts = _context_triples(bundle, args.context.split(","))
    target = _view_with_buffers(bundle, args.target).camera
    threads = resolve_threads(args.threads)
    proj = projective_condition(contexts, target, args.radius, num_threads=threads)
    with output_dir(args.out, args.force) as out:
        save_projection(out, proj)
    _emit(
        {
            "out": str(Path(args.out)),
            "covered_fraction": float(proj.coverage.mean()),
            "threads": threads,
        }
    )
    return EXIT_OK


def _build_bench_spec(args):
    kind, p = args.transform, args.param
    if kind == "random-gauge":
        if args.seed is None:
            raise UsageError("random-gauge requires --seed")
        return RandomGauge(
            seed=args.seed,
            max_translation=10.0 if p is None else p,
        )
    if p is None:
        raise UsageError(f"transform {kind!r} requires --param")
    if kind == "anisotropic":
        return AnisotropicPixel(p)
    if kind == "world-scale":
        return WorldScale(p)
    if kind == "fov":
        return FovZoom(p)
    if kind == "roll":
        return Roll(math.radians(p))
    raise UsageError(f"unknown transform kind {kind!r}")


def cmd_bench(args) -> int:
    spec = _build_bench_spec(args)
    bundle = load_scene(args.scene)
    if args.target is not None:
        target_id = args.target
    elif bundle.target_ids:
        target_id = bundle.views[bundle.target_ids[0]].id
    else:
        raise UsageError("scene has no target view; pass --target")
    target_view = _view_with_buffers(bundle, target_id)
    if target_view.color is None:
        raise UsageError(f"target view {target_id!r} has no ground-truth color")
    contexts = bundle.contexts()

    case = apply_transform(spec, target_view.camera, target_view.color, contexts)
    if case.world_scale_factor != 1.0:
        contexts = scale_contexts(contexts, case.world_scale_factor)
    if case.gauge is not None:
        contexts = gauge_contexts(contexts, case.gauge)
    proj = projective_condition(
        contexts,
        case.transformed_target,
        args.radius,
        num_threads=resolve_threads(args.threads),
    )
    with output_dir(args.out, args.force) as out:
        case_record = {
            "spec": spec_to_dict(spec),
            "target_view": target_id,
            "transformed_camera": camera_to_dict(case.transformed_target),
            "world_scale_factor": case.world_scale_factor,
        }
        if case.gauge is not None:
            case_record["gauge"] = {
                "R": [float(x) for x in case.gauge.rotation.reshape(-1)],
                "t": [float(x) for x in case.gauge.translation],
            }
        (out / "case.json").write_text(json.dumps(case_record, indent=2) + "\n")
        save_image(out / "gt.png", case.warped_gt)
        save_image(out / "valid.png", case.valid_mask)
        save_projection(out / "projection", proj)
    _emit(
        {
            "out": str(Path(args.out)),
            "transform": spec_to_dict(spec),
            "valid_fraction": float(case.valid_mask.mean()),
            "covered_fraction": float(proj.coverage.mean()),
        }
    )
    return EXIT_OK


def cmd_dolly(args) -> int:
    bundle = load_scene(args.scene)
    if args.view is not None:
        view_id = args.view
    elif bundle.target_ids:
        view_id = bundle.views[bundle.target_ids[0]].id
    else:
        view_id = bundle.views[0].id
    camera = _view_with_buffers(bundle, view_id).camera

    n = args.frames
    if n < 1:
        raise UsageError("--frames must be >= 1")
    if args.delta_end is not None:
        if args.fov_start is not None or args.fov_end is not None:
            raise UsageError("give either --delta-end or --fov-start/--fov-end")
        deltas = [args.delta_end * i / max(1, n - 1) for i in range(n)]
        params = DollyZoomParams(args.anchor_depth, deltas=deltas)
    elif args.fov_start is not None and args.fov_end is not None:
        fovs = [
            math.radians(args.fov_start + (args.fov_end - args.fov_start) * i / max(1, n - 1))
            for i in range(n)
        ]
        params = DollyZoomParams(args.anchor_depth, fovs=fovs)
    else:
        raise UsageError("give either --delta-end or both --fov-start and --fov-end")

    frames = dolly_zoom_trajectory(camera, params)
    for i, frame in enumerate(frames):
        _emit({"frame": i, "view": view_id, "camera": camera_to_dict(frame)})
    return EXIT_OK


def cmd_corrupt(args) -> int:
    try:
        spec_data = json.loads(args.spec)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--spec is not valid JSON: {exc}") from exc
    if "seed" not in spec_data:
        raise UsageError("--spec must include an explicit seed")
    spec = corruption_spec_from_dict(spec_data)
    image = load_image(args.image)
    if image.ndim != 3:
        raise UsageError(f"{args.image}: expected an RGB image")
    result = corrupt(image, spec)
    with output_dir(args.out, args.force) as out:
        save_image(out / "corrupted.png", result.image)
        save_raw_tensor(out / "corrupted.rt", result.image)
        save_image(out / "patch_mask.png", result.patch_mask)
        save_image(out / "pixel_mask.png", result.pixel_mask)
    _emit(
        {
            "out": str(Path(args.out)),
            "removed_patches": int(result.patch_mask.sum()),
            "retained_pixel_fraction": float(result.pixel_mask.mean()),
        }
    )
    return EXIT_OK


def _load_metric_image(path: str) -> np.ndarray:
    if path.endswith(".rt"):
        arr = load_raw_tensor(path)
        return arr[:, :, 0] if arr.shape[2] == 1 else arr
    return load_image(path)


def cmd_metrics(args) -> int:
    pred = _load_metric_image(args.pred)
    gt = _load_metric_image(args.gt)
    mask = load_mask(args.mask) if args.mask else None
    coverage = load_mask(args.coverage) if args.coverage else None
    report = evaluate_pair(pred, gt, mask=mask, coverage=coverage)
    sys.stdout.write(report.to_json() + "\n")
    return EXIT_OK


def _parse_camera_arg(text: str) -> Camera:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--camera is not valid JSON: {exc}") from exc
    return camera_from_dict(data)


def cmd_plucker(args) -> int:
    camera = _parse_camera_arg(args.camera)
    pmap = plucker_map(camera)
    if args.gauge:
        try:
            g = json.loads(args.gauge)
            gauge = RigidTransform(
                np.asarray(g["R"], dtype=np.float64).reshape(3, 3),
                np.asarray(g["t"], dtype=np.float64).reshape(3),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"bad --gauge: {exc}") from exc
        pmap = act_se3_map(gauge, pmap)
    out = Path(args.out)
    if out.exists() and not args.force:
        raise UsageError(f"{out} exists; pass --force to overwrite")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_raw_tensor(out, pmap.as_tensor().astype(np.float32))
    _emit({"out": str(out), "height": pmap.height, "width": pmap.width, "channels": 6})
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_all(seed=args.seed)
    all_ok = True
    for name, ok, detail, seconds in results:
        all_ok &= ok
        _emit({"check": name, "pass": bool(ok), "detail": detail})
        print(f"{name}: {seconds:.3f}s", file=sys.stderr)
    _emit({"summary": "pass" if all_ok else "fail", "checks": len(results)})
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pvsm",
        description="Projective view-synthesis geometry toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="rasterize context views into a target camera")
    p.add_argument("--scene", required=True)
    p.add_argument("--context", required=True, help="comma-separated context view ids")
    p.add_argument("--target", required=True, help="target view id")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(fn=cmd_project)

    p = sub.add_parser("bench", help="build one consistency-benchmark case")
    p.add_argument("--scene", required=True)
    p.add_argument(
        "--transform",
        required=True,
        choices=["anisotropic", "world-scale", "fov", "roll", "random-gauge"],
    )
    p.add_argument("--param", type=float, default=None, help="roll takes degrees")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("dolly", help="emit a dolly-zoom camera trajectory")
    p.add_argument("--scene", required=True)
    p.add_argument("--view", default=None)
    p.add_argument("--anchor-depth", type=float, required=True)
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--fov-start", type=float, default=None, help="degrees")
    p.add_argument("--fov-end", type=float, default=None, help="degrees")
    p.add_argument("--delta-end", type=float, default=None, help="world units")
    p.set_defaults(fn=cmd_dolly)

    p = sub.add_parser("corrupt", help="masked-image corruption of one image")
    p.add_argument("--image", required=True)
    p.add_argument("--spec", required=True, help="inline JSON corruption spec")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(fn=cmd_corrupt)

    p = sub.add_parser("metrics", help="PSNR/SSIM report for a prediction/GT pair")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--mask", default=None)
    p.add_argument("--coverage", default=None)
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("plucker", help="write a camera's 6-channel ray map")
    p.add_argument("--camera", required=True, help="inline JSON camera dict")
    p.add_argument("--gauge", default=None, help='inline JSON {"R": [9], "t": [3]}')
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(fn=cmd_plucker)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SceneIoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

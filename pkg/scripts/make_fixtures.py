#!/usr/bin/env python3
"""Regenerate the shared fixture scene and CLI golden outputs under fixtures/.

The goldens pin CLI behavior for the binding parity suite (frontend/): every
binding result must be bit-identical to what the CLI wrote here.
"""

import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def make_scene(scene_dir: Path) -> None:
    from pvsm.scene_io import save_scene
    from pvsm.synthetic import random_camera, random_color, random_depth

    rng = np.random.default_rng(20240531)
    views = []
    for vid in ("ctx0", "ctx1"):
        cam = random_camera(rng, width=32, height=32)
        color = random_color(rng, 32, 32)
        depth = random_depth(rng, 32, 32, invalid_fraction=0.04)
        views.append((vid, cam, color, depth))
    target = random_camera(rng, width=32, height=32)
    target_color = random_color(rng, 32, 32)
    views.append(("tgt", target, target_color, None))
    save_scene(scene_dir, views, context_ids=[0, 1], target_ids=[2], world_unit="meters")


def run_cli(*args) -> str:
    proc = subprocess.run(
        [sys.executable, "-m", "pvsm", *map(str, args)],
        capture_output=True,
        text=True,
        cwd=ROOT,
    )
    if proc.returncode != 0:
        raise SystemExit(f"cli {' '.join(map(str, args))} failed: {proc.stderr}")
    return proc.stdout


def main() -> None:
    if FIXTURES.exists():
        shutil.rmtree(FIXTURES)
    scene = FIXTURES / "scene"
    golden = FIXTURES / "golden"
    golden.mkdir(parents=True)
    make_scene(scene)

    run_cli(
        "project", "--scene", scene, "--context", "ctx0,ctx1", "--target", "tgt",
        "--radius", "1.0", "--out", golden / "project",
    )

    spec = {"patch_size": 8, "patch_mask_ratio": 0.6, "sparsify_fraction": 0.5,
            "pixel_drop_prob": 0.5, "seed": 17}
    (golden / "corrupt_spec.json").write_text(json.dumps(spec) + "\n")
    run_cli(
        "corrupt", "--image", scene / "ctx0_color.png", "--spec", json.dumps(spec),
        "--out", golden / "corrupt",
    )

    dolly_out = run_cli(
        "dolly", "--scene", scene, "--view", "tgt", "--anchor-depth", "4",
        "--frames", "6", "--delta-end", "2",
    )
    (golden / "dolly.jsonl").write_text(dolly_out)

    scene_json = json.loads((scene / "scene.json").read_text())
    target_camera = scene_json["views"][2]["camera"]
    run_cli(
        "plucker", "--camera", json.dumps(target_camera),
        "--out", golden / "raymap_tgt.rt",
    )
    gauge = {
        "R": [0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        "t": [0.5, -1.5, 2.0],
    }
    (golden / "gauge.json").write_text(json.dumps(gauge) + "\n")
    run_cli(
        "plucker", "--camera", json.dumps(target_camera), "--gauge", json.dumps(gauge),
        "--out", golden / "raymap_tgt_gauged.rt",
    )

    metrics_out = run_cli(
        "metrics",
        "--pred", golden / "project" / "color.png",
        "--gt", scene / "tgt_color.png",
        "--coverage", golden / "project" / "coverage.png",
    )
    (golden / "metrics.json").write_text(metrics_out)
    print(f"fixtures regenerated under {FIXTURES}")


if __name__ == "__main__":
    main()

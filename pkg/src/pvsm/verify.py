"""Self-contained invariant suite behind the `verify` CLI command.

Each check runs a scaled-down version of a library property with seeded
inputs and returns (name, passed, detail). The full-scale equivalents live
in the test suite; this module is the fast in-the-field smoke check.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import (
    camera_geometry as cg,
    conditioning as cond,
    consistency_bench as bench,
    mae_corruption as mae,
    metrics,
    plucker,
)
from .synthetic import random_camera, random_scene


def _compare_projections(a: cond.ProjectionImage, b: cond.ProjectionImage):
    """(differing-pixel fraction, min PSNR-style agreement) between two runs."""
    diff = (a.color != b.color).any(axis=2) | (a.coverage != b.coverage)
    frac = float(diff.mean())
    if not diff.any():
        return frac, math.inf
    return frac, metrics.masked_psnr(a.color, b.color, metrics.full_mask(a.color))


def check_camera_round_trip(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        cam = random_camera(rng)
        r = rng.integers(0, cam.height)
        c = rng.integers(0, cam.width)
        u, v = c + 0.5, r + 0.5
        depth = rng.uniform(1.0, 5.0)
        k = cam.intrinsics
        p_cam = depth * np.array([(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0])
        p_world = cam.extrinsics.rotation.T @ (p_cam - cam.extrinsics.translation)
        u2, v2, _ = cg.project(cam, p_world)
        worst = max(worst, abs(u2 - u), abs(v2 - v))
    return worst <= 1e-6, f"max round-trip error {worst:.3g} px"


def check_gauge_projection(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        cam = random_camera(rng)
        g = bench.random_gauge(int(rng.integers(1 << 31)), math.pi, 10.0)
        x = rng.normal(size=3)
        try:
            u, v, _ = cg.project(cam, x)
        except cg.PointBehindCamera:
            continue
        u2, v2, _ = cg.project(cg.apply_gauge(g, cam), g.apply(x))
        worst = max(worst, abs(u2 - u), abs(v2 - v))
    return worst <= 1e-6, f"max gauge projection error {worst:.3g} px"


def check_group_laws(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        g1 = bench.random_gauge(int(rng.integers(1 << 31)), math.pi, 2.0)
        g2 = bench.random_gauge(int(rng.integers(1 << 31)), math.pi, 2.0)
        g3 = bench.random_gauge(int(rng.integers(1 << 31)), math.pi, 2.0)
        a = cg.compose(cg.compose(g3, g2), g1)
        b = cg.compose(g3, cg.compose(g2, g1))
        worst = max(
            worst,
            np.max(np.abs(a.rotation - b.rotation)),
            np.max(np.abs(a.translation - b.translation)),
        )
        ident = cg.compose(g1, cg.inverse(g1))
        worst = max(
            worst,
            np.max(np.abs(ident.rotation - np.eye(3))),
            np.max(np.abs(ident.translation)),
        )
    return worst <= 1e-9, f"max group-law residual {worst:.3g}"


def check_plucker_commutation(seed):
    rng = np.random.default_rng(seed)
    cam = random_camera(rng, width=32, height=32)
    g = bench.random_gauge(seed + 1, math.pi, 10.0)
    a = plucker.plucker_map(cg.apply_gauge(g, cam)).as_tensor()
    b = plucker.act_se3_map(g, plucker.plucker_map(cam)).as_tensor()
    err = float(np.max(np.abs(a - b)))
    return err <= 1e-9, f"max commutation residual {err:.3g}"


def check_plucker_klein_chain(seed):
    rng = np.random.default_rng(seed)
    ray = plucker.plucker_from_ray([1.0, -2.0, 0.5], [0.0, 0.0, 1.0])
    for _ in range(100):
        g = bench.random_gauge(int(rng.integers(1 << 31)), math.pi, 1.0)
        ray = plucker.act_se3(g, ray)
    orth, norm_err = plucker.klein_residual(ray)
    ok = abs(orth) <= 1e-9 and abs(norm_err) <= 1e-9
    return ok, f"orthogonality {orth:.3g}, norm error {norm_err:.3g}"


def check_plucker_two_point(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        o = rng.normal(size=3)
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        ray = plucker.plucker_from_ray(o, d)
        g = bench.random_gauge(int(rng.integers(1 << 31)), math.pi, 3.0)
        moved = plucker.act_se3(g, ray)
        p1, p2 = g.apply(o), g.apply(o + 2.5 * d)
        d2 = (p2 - p1) / np.linalg.norm(p2 - p1)
        oracle = plucker.plucker_from_ray(p1, d2)
        worst = max(worst, float(np.max(np.abs(moved.as_vector() - oracle.as_vector()))))
    return worst <= 1e-9, f"max two-point oracle residual {worst:.3g}"


def check_plucker_nonuniformity(seed):
    rng = np.random.default_rng(seed)
    cam = random_camera(rng)
    pmap = plucker.plucker_map(cam)
    best = 0.0
    for _ in range(100):
        g = bench.random_gauge(int(rng.integers(1 << 31)), math.pi, 1.0)
        field = plucker.perturbation_field(g, pmap)
        mean = field.mean()
        if mean > 0:
            best = max(best, float(field.max() / mean))
    return best > 1.5, f"best max/mean pixel delta ratio {best:.3f}"


def check_conditioning_gauge(seed):
    worst_frac, worst_psnr = 0.0, math.inf
    for i in range(10):
        contexts, target = random_scene(seed + i, size=48)
        base = cond.projective_condition(contexts, target, 1.0)
        g = bench.random_gauge(seed + 1000 + i, math.pi, 10.0)
        moved = cond.projective_condition(
            bench.gauge_contexts(contexts, g), cg.apply_gauge(g, target), 1.0
        )
        frac, psnr = _compare_projections(base, moved)
        worst_frac = max(worst_frac, frac)
        worst_psnr = min(worst_psnr, psnr)
    ok = worst_frac <= 0.001 and worst_psnr >= 45.0
    return ok, f"worst diff fraction {worst_frac:.2e}, worst psnr {worst_psnr:.1f}"


def check_conditioning_world_scale(seed):
    worst_frac, worst_psnr = 0.0, math.inf
    for i, s in enumerate([0.1, 0.5, 2.0, 10.0]):
        contexts, target = random_scene(seed + i, size=48)
        base = cond.projective_condition(contexts, target, 1.0)
        scaled = cond.projective_condition(
            bench.scale_contexts(contexts, s), cg.apply_world_scale(s, target), 1.0
        )
        frac, psnr = _compare_projections(base, scaled)
        worst_frac = max(worst_frac, frac)
        worst_psnr = min(worst_psnr, psnr)
    ok = worst_frac <= 0.001 and worst_psnr >= 45.0
    return ok, f"worst diff fraction {worst_frac:.2e}, worst psnr {worst_psnr:.1f}"


def check_reprojection_identity(seed):
    contexts, _ = random_scene(seed, n_contexts=1, size=48, invalid_fraction=0.05)
    color, depth, cam = contexts[0]
    proj = cond.projective_condition([(color, depth, cam)], cam, 0.0)
    valid = depth > 0
    color_ok = np.array_equal(proj.color[valid], color[valid])
    coverage_ok = np.array_equal(proj.coverage, valid)
    n_bad = int((~(proj.color == color).all(axis=2) & valid).sum())
    return color_ok and coverage_ok, f"{n_bad} mismatched valid pixels"


def check_rasterizer_oracle(seed):
    from .conditioning import rasterize

    rng = np.random.default_rng(seed)
    for i in range(10):
        n = int(rng.integers(1, 2000))
        cloud = cond.PointCloud(
            rng.normal(size=(n, 3)) * 1.5,
            rng.random((n, 3)).astype(np.float32),
            np.zeros(n, dtype=np.int32),
            np.zeros((n, 2), dtype=np.int32),
        )
        cam = random_camera(rng, width=32, height=32)
        radius = float(rng.choice([0.0, 1.0, 2.0]))
        fast = rasterize(cloud, cam, radius)
        slow = brute_force_rasterize(cloud, cam, radius)
        if not (
            np.array_equal(fast.color, slow.color)
            and np.array_equal(fast.coverage, slow.coverage)
            and np.array_equal(fast.zbuffer, slow.zbuffer)
        ):
            return False, f"mismatch on cloud {i} (n={n}, radius={radius})"
    return True, "10 clouds bit-identical to the brute-force oracle"


def check_rasterizer_parallel(seed):
    contexts, target = random_scene(seed, size=48)
    clouds = [
        cond.unproject_view(c, d, cam, view_index=i)
        for i, (c, d, cam) in enumerate(contexts)
    ]
    merged = cond.merge(clouds)
    serial = cond.rasterize(merged, target, 1.0, num_threads=1)
    threaded = cond.rasterize(merged, target, 1.0, num_threads=4)
    ok = (
        np.array_equal(serial.color, threaded.color)
        and np.array_equal(serial.coverage, threaded.coverage)
        and np.array_equal(serial.zbuffer, threaded.zbuffer)
    )
    return ok, "serial == 4-thread tiled output" if ok else "serial != threaded"


def check_conditioning_locality(seed):
    contexts, target = random_scene(seed, size=48)
    base = cond.projective_condition(contexts, target, 1.0)
    depths = np.concatenate([d[d > 0].ravel() for _, d, _ in contexts])
    med = float(np.median(depths))
    step = med / target.intrinsics.fx  # world size of one pixel at median depth
    fracs = []
    for eps in (1.0, 0.5, 0.25):
        right = target.extrinsics.rotation[0, :]
        center = target.center + eps * step * right
        moved_extr = cg.RigidTransform(
            target.extrinsics.rotation, -(target.extrinsics.rotation @ center)
        )
        moved = cond.projective_condition(
            contexts, cg.Camera(target.intrinsics, moved_extr), 1.0
        )
        diff = (base.color != moved.color).any(axis=2) | (base.coverage != moved.coverage)
        fracs.append(float(diff.mean()))
    ok = fracs[0] >= fracs[1] >= fracs[2]
    return ok, f"changed fractions at eps 1/.5/.25: {fracs[0]:.3f}/{fracs[1]:.3f}/{fracs[2]:.3f}"


def check_metrics_psnr(seed):
    rng = np.random.default_rng(seed)
    gt = rng.random((24, 24, 3))
    pred = np.clip(gt + 0.1, None, 1.0)
    pred[gt + 0.1 > 1.0] = gt[gt + 0.1 > 1.0] - 0.1
    mask = metrics.full_mask(gt)
    got = metrics.masked_psnr(pred, gt, mask)
    expected = 10.0 * math.log10(1.0 / np.mean((pred - gt) ** 2))
    ok = abs(got - expected) <= 1e-10 and metrics.masked_psnr(gt, gt, mask) == math.inf
    return ok, f"psnr {got:.6f} vs direct {expected:.6f}"


def check_metrics_ssim(seed):
    rng = np.random.default_rng(seed)
    x = rng.random((20, 20, 3))
    ok1 = abs(metrics.ssim(x, x) - 1.0) <= 1e-9
    y = rng.random((20, 20, 3))
    ok2 = abs(metrics.ssim(x, y) - metrics.ssim(y, x)) <= 1e-9
    return ok1 and ok2, "ssim(x,x)=1 and symmetry hold"


def check_corruption(seed):
    rng = np.random.default_rng(seed)
    img = rng.random((32, 32, 3)).astype(np.float32)
    spec = mae.CorruptionSpec(patch_size=8, patch_mask_ratio=0.5, seed=seed)
    a = mae.corrupt(img, spec)
    b = mae.corrupt(img, spec)
    deterministic = (
        np.array_equal(a.image, b.image)
        and np.array_equal(a.patch_mask, b.patch_mask)
        and np.array_equal(a.pixel_mask, b.pixel_mask)
    )
    count_ok = int(a.patch_mask.sum()) == 8
    return deterministic and count_ok, (
        f"deterministic={deterministic}, removed patches {int(a.patch_mask.sum())}/16"
    )


def check_bench_masks(seed):
    cam = cg.Camera(cg.Intrinsics(120.0, 120.0, 50.0, 50.0, 100, 100))
    fov_mask = bench.validity_mask(bench.FovZoom(0.5), cam)
    frac = float(fov_mask.mean())
    ok_fov = frac == 0.25

    roll_mask = bench.validity_mask(bench.Roll(math.pi / 4), cam)
    rng = np.random.default_rng(seed)
    n = 100_000
    rc = rng.integers(0, 100, size=(n, 2))
    u = rc[:, 1] + 0.5 - 50.0
    v = rc[:, 0] + 0.5 - 50.0
    c, s = math.cos(-math.pi / 4), math.sin(-math.pi / 4)
    us, vs = c * u - s * v + 50.0, s * u + c * v + 50.0
    inside = (us >= 0.5) & (us <= 99.5) & (vs >= 0.5) & (vs <= 99.5)
    mc = float(inside.mean())
    ok_roll = abs(float(roll_mask.mean()) - mc) <= 0.005
    return ok_fov and ok_roll, (
        f"fov mask fraction {frac}, roll mask {float(roll_mask.mean()):.4f} vs MC {mc:.4f}"
    )


def check_dolly(seed):
    rng = np.random.default_rng(seed)
    cam = random_camera(rng, width=64, height=64)
    z0 = 4.0
    deltas = [2.0 * t / 29 for t in range(30)]
    frames = bench.dolly_zoom_trajectory(cam, bench.DollyZoomParams(z0, deltas=deltas))
    anchor = cam.center + z0 * cam.forward
    lateral = anchor + 0.3 * cam.extrinsics.rotation[0, :]
    k = cam.intrinsics
    u0, v0, _ = cg.project(cam, lateral)
    r0 = math.hypot(u0 - k.cx, v0 - k.cy)
    worst = 0.0
    for f in frames:
        u, v, _ = cg.project(f, lateral)
        r = math.hypot(u - f.intrinsics.cx, v - f.intrinsics.cy)
        worst = max(worst, abs(r - r0) / r0)

    theta0 = bench.fov_from_fy(k.fy, k.height)
    fovs = bench.deltas_to_fov_schedule(z0, theta0, deltas)
    back = bench.fov_schedule_to_deltas(z0, theta0, fovs)
    rt = max(abs(a - b) for a, b in zip(deltas, back))

    fy_ok = abs(100.0 * (4.0 - 2.0) / 4.0 - 50.0) == 0.0
    tan_ok = abs(0.5 * 4.0 / (4.0 - 2.0) - 1.0) == 0.0
    ok = worst <= 1e-6 and rt <= 1e-9 and fy_ok and tan_ok
    return ok, f"anchor drift {worst:.2e}, schedule round trip {rt:.2e}"


def check_homography_identity(seed):
    rng = np.random.default_rng(seed)
    img = rng.random((40, 40, 3)).astype(np.float32)
    k = cg.Intrinsics(64.0, 64.0, 20.0, 20.0, 40, 40)
    warped, mask = bench.homography_warp(img, k, k, np.eye(3))
    ok = np.array_equal(warped, img) and bool(mask.all())
    return ok, "identity warp is a bit-exact copy" if ok else "identity warp differs"


def brute_force_rasterize(cloud, camera, splat_radius):
    """Independent per-pixel argmin over all points (reference oracle)."""
    h, w = camera.height, camera.width
    color = np.zeros((h, w, 3), dtype=np.float32)
    coverage = np.zeros((h, w), dtype=bool)
    zbuffer = np.full((h, w), np.inf, dtype=np.float64)
    if cloud.size == 0:
        return cond.ProjectionImage(color, coverage, zbuffer)
    u, v, z, in_front = cg.project_points(camera, cloud.positions)
    centers_x = np.arange(w) + 0.5
    centers_y = np.arange(h) + 0.5
    for r in range(h):
        for c in range(w):
            if splat_radius == 0:
                hit = (
                    in_front
                    & (np.floor(u) == c)
                    & (np.floor(v) == r)
                )
            else:
                du = centers_x[c] - u
                dv = centers_y[r] - v
                hit = in_front & (du * du + dv * dv <= splat_radius * splat_radius)
            if not hit.any():
                continue
            depths = np.where(hit, z, np.inf)
            best = int(np.argmin(depths))  # ties resolve to the lowest index
            coverage[r, c] = True
            zbuffer[r, c] = z[best]
            color[r, c] = cloud.colors[best]
    return cond.ProjectionImage(color, coverage, zbuffer)


ALL_CHECKS = [
    ("camera_round_trip", check_camera_round_trip),
    ("gauge_projection_consistency", check_gauge_projection),
    ("transform_group_laws", check_group_laws),
    ("plucker_action_commutation", check_plucker_commutation),
    ("plucker_klein_chain", check_plucker_klein_chain),
    ("plucker_two_point_oracle", check_plucker_two_point),
    ("plucker_nonuniformity_witness", check_plucker_nonuniformity),
    ("conditioning_gauge_invariance", check_conditioning_gauge),
    ("conditioning_world_scale_invariance", check_conditioning_world_scale),
    ("reprojection_identity", check_reprojection_identity),
    ("rasterizer_oracle_equivalence", check_rasterizer_oracle),
    ("rasterizer_parallel_determinism", check_rasterizer_parallel),
    ("conditioning_locality", check_conditioning_locality),
    ("metrics_psnr_direct_formula", check_metrics_psnr),
    ("metrics_ssim_identity_symmetry", check_metrics_ssim),
    ("corruption_determinism_counting", check_corruption),
    ("bench_validity_masks", check_bench_masks),
    ("dolly_zoom_constraints", check_dolly),
    ("homography_identity", check_homography_identity),
]


def run_all(seed: int = 0):
    """Run every check; returns a list of (name, passed, detail, seconds)."""
    results = []
    for name, fn in ALL_CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn(seed)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, ok, detail, time.perf_counter() - t0))
    return results

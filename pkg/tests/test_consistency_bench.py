import math

import numpy as np
import pytest

from pvsm.camera_geometry import Camera, Intrinsics, RigidTransform, project
from pvsm.conditioning import projective_condition
from pvsm.consistency_bench import (
    AnisotropicPixel,
    DollyZoom,
    DollyZoomParams,
    FovZoom,
    RandomGauge,
    Roll,
    WorldScale,
    apply_transform,
    deltas_to_fov_schedule,
    dolly_zoom_trajectory,
    fov_from_fy,
    fov_schedule_to_deltas,
    gauge_contexts,
    homography_warp,
    random_gauge,
    scale_contexts,
    spec_from_dict,
    spec_to_dict,
    validity_mask,
)
from pvsm.errors import DegenerateDolly, InvalidSpec
from pvsm.synthetic import random_camera, random_scene


def centered_camera(size=100, focal=120.0):
    return Camera(Intrinsics(focal, focal, size / 2, size / 2, size, size))


def smooth_image(h, w, phase=0.0):
    """Natural-image stand-in: smooth multi-frequency field in [0, 1]."""
    y, x = np.mgrid[0:h, 0:w]
    chans = []
    for i in range(3):
        v = (
            0.5
            + 0.25 * np.sin(2 * np.pi * (x / w * (i + 1) + phase))
            + 0.25 * np.cos(2 * np.pi * (y / h * (i + 2) - phase))
        )
        chans.append(v)
    return np.clip(np.stack(chans, axis=2), 0, 1).astype(np.float32)


class TestHomographyWarp:
    def test_identity_is_bit_exact_copy(self, rng):
        img = rng.random((40, 40, 3)).astype(np.float32)
        k = Intrinsics(77.3, 91.1, 19.7, 20.2, 40, 40)
        warped, mask = homography_warp(img, k, k, np.eye(3))
        assert np.array_equal(warped, img)
        assert mask.all()

    def test_half_turn_reverses_both_axes(self, rng):
        # power-of-two focal and centered principal point make the sampling
        # grid land exactly on integer taps
        img = rng.random((40, 40, 3)).astype(np.float32)
        k = Intrinsics(64.0, 64.0, 20.0, 20.0, 40, 40)
        r_half_turn = np.diag([-1.0, -1.0, 1.0])
        warped, mask = homography_warp(img, k, k, r_half_turn)
        assert mask.all()
        assert np.array_equal(warped, img[::-1, ::-1])

    def test_double_focal_is_valid_central_upsample(self, rng):
        img = rng.random((100, 100, 3)).astype(np.float32)
        k1 = Intrinsics(100.0, 100.0, 50.0, 50.0, 100, 100)
        k2 = Intrinsics(200.0, 200.0, 50.0, 50.0, 100, 100)
        warped, mask = homography_warp(img, k1, k2, np.eye(3))
        assert mask.all()  # preimage u = (u'-50)/2 + 50 stays in frame
        # spot-check the preimage relation: dest center (50.5, 50.5) samples
        # the source at (50.25, 50.25), i.e. grid point (49.75, 49.75)
        expected = (
            0.25 * 0.25 * img[49, 49].astype(np.float64)
            + 0.25 * 0.75 * img[49, 50]
            + 0.75 * 0.25 * img[50, 49]
            + 0.75 * 0.75 * img[50, 50]
        )
        np.testing.assert_allclose(warped[50, 50], expected, atol=1e-6)

    def test_warp_inverts_within_bilinear_tolerance(self):
        img = smooth_image(64, 64)
        k1 = Intrinsics(80.0, 80.0, 32.0, 32.0, 64, 64)
        k2 = Intrinsics(96.0, 88.0, 32.0, 32.0, 64, 64)
        angle = 0.3
        c, s = math.cos(angle), math.sin(angle)
        r = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
        fwd, m1 = homography_warp(img, k1, k2, r)
        back, m2 = homography_warp(fwd, k2, k1, r.T)
        both = m1 & m2
        err = np.abs(back.astype(np.float64) - img.astype(np.float64))[both]
        assert err.mean() <= 2.0 / 255.0


class TestApplyTransform:
    def test_anisotropic_identity_case(self, rng):
        cam = random_camera(rng, width=32, height=32)
        gt = rng.random((32, 32, 3)).astype(np.float32)
        case = apply_transform(AnisotropicPixel(1.0), cam, gt)
        assert np.array_equal(case.warped_gt, gt)
        assert case.valid_mask.all()
        assert case.world_scale_factor == 1.0

    def test_anisotropic_scales_fx_only(self, rng):
        cam = centered_camera()
        gt = rng.random((100, 100, 3)).astype(np.float32)
        case = apply_transform(AnisotropicPixel(2.0), cam, gt)
        assert case.transformed_target.intrinsics.fx == 240.0
        assert case.transformed_target.intrinsics.fy == 120.0

    def test_fov_half_zoom_mask_is_central_block(self, rng):
        cam = centered_camera()
        gt = rng.random((100, 100, 3)).astype(np.float32)
        case = apply_transform(FovZoom(0.5), cam, gt)
        # derived bound: preimage u = (u'-cx)/zoom + cx must stay in frame
        expected = np.zeros((100, 100), dtype=bool)
        expected[25:75, 25:75] = True
        np.testing.assert_array_equal(case.valid_mask, expected)

    def test_world_scale(self, rng):
        contexts, target = random_scene(1, size=32)
        gt = rng.random((32, 32, 3)).astype(np.float32)
        case = apply_transform(WorldScale(2.0), target, gt, contexts)
        np.testing.assert_allclose(
            case.transformed_target.center, 2.0 * target.center, atol=1e-12
        )
        assert np.array_equal(case.warped_gt, gt)
        assert case.valid_mask.all()
        assert case.world_scale_factor == 2.0
        scaled = scale_contexts(contexts, case.world_scale_factor)
        np.testing.assert_allclose(scaled[0][1], 2.0 * contexts[0][1], rtol=1e-15)

    def test_roll_keeps_center_fixed(self, rng):
        cam = random_camera(rng)
        gt = rng.random((64, 64, 3)).astype(np.float32)
        case = apply_transform(Roll(math.radians(30)), cam, gt)
        np.testing.assert_allclose(case.transformed_target.center, cam.center, atol=1e-12)

    def test_random_gauge_case_carries_gauge(self, rng):
        contexts, target = random_scene(5, size=32)
        gt = rng.random((32, 32, 3)).astype(np.float32)
        case = apply_transform(RandomGauge(seed=3), target, gt, contexts)
        assert case.gauge is not None
        assert case.valid_mask.all()
        moved = gauge_contexts(contexts, case.gauge)
        assert len(moved) == len(contexts)

    def test_dolly_zoom_is_trajectory_valued(self, rng):
        cam = random_camera(rng)
        gt = rng.random((64, 64, 3)).astype(np.float32)
        with pytest.raises(InvalidSpec):
            apply_transform(
                DollyZoom(DollyZoomParams(4.0, deltas=[0.0, 1.0])), cam, gt
            )


class TestValidityMask:
    def test_identity_specs_all_true(self, rng):
        cam = centered_camera()
        for spec in (AnisotropicPixel(1.0), FovZoom(1.0), Roll(0.0), WorldScale(3.0)):
            assert validity_mask(spec, cam).all()

    def test_fov_half_zoom_fraction_exact(self):
        mask = validity_mask(FovZoom(0.5), centered_camera())
        assert float(mask.mean()) == 0.25

    def test_roll_45_matches_monte_carlo_pixel_center_oracle(self):
        size = 256
        cam = centered_camera(size)
        mask = validity_mask(Roll(math.pi / 4), cam)
        # independent oracle: sample random pixels, rotate their centers by
        # -45 deg about the principal point with direct trig, test in-frame
        rng = np.random.default_rng(0)
        n = 1_000_000
        rc = rng.integers(0, size, size=(n, 2))
        u = rc[:, 1] + 0.5 - size / 2
        v = rc[:, 0] + 0.5 - size / 2
        c, s = math.cos(-math.pi / 4), math.sin(-math.pi / 4)
        us = c * u - s * v + size / 2
        vs = s * u + c * v + size / 2
        inside = (us >= 0.5) & (us <= size - 0.5) & (vs >= 0.5) & (vs <= size - 0.5)
        mc = float(inside.mean())
        assert abs(float(mask.mean()) - mc) <= 0.005
        # the octagon-overlap area for a 45 degree roll
        assert abs(float(mask.mean()) - 2 * (math.sqrt(2) - 1)) < 0.02


class TestRandomGauge:
    def test_zero_bounds_give_identity(self):
        g = random_gauge(9, 0.0, 0.0)
        np.testing.assert_array_equal(g.rotation, np.eye(3))
        np.testing.assert_array_equal(g.translation, np.zeros(3))

    def test_deterministic_per_seed(self):
        a = random_gauge(123, math.pi, 5.0)
        b = random_gauge(123, math.pi, 5.0)
        assert np.array_equal(a.rotation, b.rotation)
        assert np.array_equal(a.translation, b.translation)

    def test_sample_statistics(self):
        max_rot = 0.8
        max_t = 2.5
        worst_orth = 0.0
        for seed in range(10_000):
            g = random_gauge(seed, max_rot, max_t)
            angle = math.acos(np.clip((np.trace(g.rotation) - 1) / 2, -1, 1))
            assert angle <= max_rot + 1e-12
            assert np.linalg.norm(g.translation) <= max_t + 1e-12
            worst_orth = max(
                worst_orth, np.max(np.abs(g.rotation.T @ g.rotation - np.eye(3)))
            )
        assert worst_orth <= 1e-12

    def test_invalid_bounds(self):
        with pytest.raises(InvalidSpec):
            random_gauge(0, -0.1, 1.0)
        with pytest.raises(InvalidSpec):
            RandomGauge(seed=0, max_rotation=4.0)


class TestDollyZoom:
    def test_worked_focal_substitution(self):
        # z0 = 4, delta = 2, fy0 = 100 -> fy = 50
        cam = Camera(Intrinsics(100.0, 100.0, 32.0, 32.0, 64, 64))
        frames = dolly_zoom_trajectory(cam, DollyZoomParams(4.0, deltas=[2.0]))
        assert frames[0].intrinsics.fy == 50.0
        assert frames[0].intrinsics.fx == 50.0

    def test_worked_fov_substitution(self):
        # tan(theta0/2) = 0.5, z0 = 4, delta = 2 -> tan(theta/2) = 1
        theta0 = 2 * math.atan(0.5)
        [theta] = deltas_to_fov_schedule(4.0, theta0, [2.0])
        assert abs(math.tan(theta / 2) - 1.0) < 1e-12
        assert abs(theta - math.pi / 2) < 1e-12

    def test_zero_delta_is_identity_frame(self, rng):
        cam = random_camera(rng)
        [frame] = dolly_zoom_trajectory(cam, DollyZoomParams(4.0, deltas=[0.0]))
        assert frame.intrinsics == cam.intrinsics
        np.testing.assert_allclose(
            frame.extrinsics.translation, cam.extrinsics.translation, atol=1e-12
        )

    def test_degenerate_delta_rejected(self):
        with pytest.raises(DegenerateDolly):
            DollyZoomParams(4.0, deltas=[4.0])

    def test_anchor_plane_size_constant(self, rng):
        cam = random_camera(rng)
        z0 = 4.0
        deltas = [2.0 * i / 29 for i in range(30)]
        frames = dolly_zoom_trajectory(cam, DollyZoomParams(z0, deltas=deltas))
        anchor = cam.center + z0 * cam.forward
        offset = anchor + 0.4 * cam.extrinsics.rotation[0, :]
        u0, v0, _ = project(cam, offset)
        r0 = math.hypot(u0 - cam.intrinsics.cx, v0 - cam.intrinsics.cy)
        for f in frames:
            u, v, _ = project(f, offset)
            r = math.hypot(u - f.intrinsics.cx, v - f.intrinsics.cy)
            assert abs(r - r0) / r0 <= 1e-6

    def test_background_magnification_analytic(self, rng):
        # a point at twice the anchor depth grows by the analytic factor
        # (fy(t)/fy0) * (2 z0) / (2 z0 - delta(t))
        cam = random_camera(rng)
        z0 = 3.0
        deltas = [1.5 * i / 9 for i in range(10)]
        frames = dolly_zoom_trajectory(cam, DollyZoomParams(z0, deltas=deltas))
        point = cam.center + 2 * z0 * cam.forward + 0.3 * cam.extrinsics.rotation[0, :]
        u0, v0, _ = project(cam, point)
        r0 = math.hypot(u0 - cam.intrinsics.cx, v0 - cam.intrinsics.cy)
        for f, d in zip(frames, deltas):
            u, v, _ = project(f, point)
            r = math.hypot(u - f.intrinsics.cx, v - f.intrinsics.cy)
            factor = (f.intrinsics.fy / cam.intrinsics.fy) * (2 * z0) / (2 * z0 - d)
            assert abs(r / r0 - factor) <= 1e-6 * factor

    def test_schedule_round_trip(self):
        z0 = 5.0
        theta0 = fov_from_fy(120.0, 100)
        deltas = [0.0, 1.0, 2.5, 4.0, -3.0]
        fovs = deltas_to_fov_schedule(z0, theta0, deltas)
        back = fov_schedule_to_deltas(z0, theta0, fovs)
        assert max(abs(a - b) for a, b in zip(deltas, back)) <= 1e-9

    def test_fov_schedule_drives_trajectory(self):
        cam = Camera(Intrinsics(100.0, 100.0, 32.0, 32.0, 64, 64))
        theta0 = fov_from_fy(100.0, 64)
        fovs = deltas_to_fov_schedule(4.0, theta0, [0.0, 2.0])
        frames = dolly_zoom_trajectory(cam, DollyZoomParams(4.0, fovs=fovs))
        assert abs(frames[0].intrinsics.fy - 100.0) < 1e-9
        assert abs(frames[1].intrinsics.fy - 50.0) < 1e-9


class TestEndToEnd:
    def test_world_scale_conditioning_invariance(self):
        contexts, target = random_scene(77, size=48)
        gt = contexts[0][0]
        case = apply_transform(WorldScale(2.0), target, gt, contexts)
        base = projective_condition(contexts, target, 1.0)
        scaled = projective_condition(
            scale_contexts(contexts, case.world_scale_factor),
            case.transformed_target,
            1.0,
        )
        diff = (base.color != scaled.color).any(axis=2) | (
            base.coverage != scaled.coverage
        )
        assert diff.mean() <= 0.001


class TestSpecSerialization:
    def test_round_trips(self):
        specs = [
            AnisotropicPixel(0.5),
            WorldScale(2.0),
            FovZoom(1.5),
            Roll(0.3),
            RandomGauge(seed=4, max_rotation=1.0, max_translation=2.0),
            DollyZoom(DollyZoomParams(4.0, deltas=[0.0, 1.0])),
        ]
        for spec in specs:
            assert spec_from_dict(spec_to_dict(spec)) == spec

    def test_invariant_violations_rejected(self):
        with pytest.raises(InvalidSpec):
            AnisotropicPixel(0.01)
        with pytest.raises(InvalidSpec):
            WorldScale(0.0)
        with pytest.raises(InvalidSpec):
            FovZoom(-1.0)
        with pytest.raises(InvalidSpec):
            DollyZoomParams(0.0, deltas=[0.0])
        with pytest.raises(InvalidSpec):
            DollyZoomParams(4.0, deltas=[1.0], fovs=[0.5])

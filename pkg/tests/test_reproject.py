import math
import warnings

import numpy as np
import pytest

from roadworld.geometry import CameraIntrinsics, Pose, pose_relative
from roadworld.reproject import (
    WarpRangeError,
    WarpResult,
    artifact_score,
    forward_warp,
    inpaint,
    perturb_depth,
    reprojective_sim_step,
)
from roadworld.synthworld import RoadGeometry, generate_road, render_frame, straight_road

INTR = CameraIntrinsics.default()


def homography_warp(image, rot):
    """Backward-sampling oracle for rotation-only view synthesis (nearest
    neighbor, matching the splat's one-pixel footprint)."""
    h, w = image.shape
    K = np.array([[INTR.focal_px, 0, INTR.cx], [0, INTR.focal_px, INTR.cy], [0, 0, 1.0]])
    Hm = K @ np.linalg.inv(rot) @ np.linalg.inv(K)
    uu, vv = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    pts = np.stack([uu.ravel(), vv.ravel(), np.ones(h * w)])
    src = Hm @ pts
    su = np.rint(src[0] / src[2]).astype(int)
    sv = np.rint(src[1] / src[2]).astype(int)
    valid = (src[2] > 0) & (su >= 0) & (su <= w - 1) & (sv >= 0) & (sv <= h - 1)
    out = image[np.clip(sv, 0, h - 1), np.clip(su, 0, w - 1)]
    return out.reshape(h, w), valid.reshape(h, w)


@pytest.fixture(scope="module")
def road_frame():
    geom = RoadGeometry(generate_road(11, lane_count=2))
    pose = Pose(x=80.0, y=-1.7)
    image, depth = render_frame(geom, pose, INTR)
    return geom, pose, image, depth


class TestForwardWarp:
    def test_identity_warp_is_identity(self, road_frame):
        _, _, image, depth = road_frame
        out = forward_warp(image, depth, Pose.identity(), INTR)
        assert out.coverage == 1.0
        assert np.array_equal(out.image, image)

    def test_pure_rotation_matches_homography(self, road_frame):
        _, _, image, depth = road_frame
        yaw = 0.06
        rel = Pose(yaw=yaw)
        out = forward_warp(image, depth, rel, INTR)
        # camera rotation for a vehicle yaw: conjugate through the rig
        from roadworld.geometry import CAM_FROM_VEHICLE

        rot_cam = CAM_FROM_VEHICLE.T @ Pose(yaw=-yaw).rotation() @ CAM_FROM_VEHICLE
        ref, ref_valid = homography_warp(image, rot_cam)
        both = ~out.hole_mask & ref_valid
        err = np.abs(out.image - ref)[both].mean()
        assert err < 0.02

    def test_planar_translation_disparity(self):
        rng = np.random.default_rng(0)
        image = rng.random((32, 64)).astype(np.float32)
        depth = np.full((32, 64), 10.0, dtype=np.float32)
        out = forward_warp(image, depth, Pose(y=0.5), INTR)
        # disparity f*t/Z = 40*0.5/10 = 2 px to the right
        shifted = out.image[:, 2:]
        assert np.allclose(shifted[~out.hole_mask[:, 2:]], image[:, :-2][~out.hole_mask[:, 2:]])
        assert out.hole_mask[:, :2].all()
        assert not out.hole_mask[:, 2:].any()

    def test_z_buffer_nearest_wins(self):
        # two columns collide at one target pixel after a 0.5 m lateral move
        image = np.zeros((4, 32), dtype=np.float32)
        depth = np.full((4, 32), 10.0, dtype=np.float32)
        intr = CameraIntrinsics(40.0, 16.0, 2.0, 32, 4)
        image[:, 10] = 0.25  # far surface: disparity 2 -> lands at 12
        image[:, 8] = 0.75  # near surface: disparity 4 -> lands at 12
        depth[:, 8] = 5.0
        out = forward_warp(image, depth, Pose(y=0.5), intr)
        assert np.all(out.image[:, 12] == 0.75)

    def test_soft_range_warns(self, road_frame):
        _, _, image, depth = road_frame
        with pytest.warns(UserWarning):
            forward_warp(image, depth, Pose(x=5.0), INTR)

    def test_hard_range_raises(self, road_frame):
        _, _, image, depth = road_frame
        with pytest.raises(WarpRangeError):
            forward_warp(image, depth, Pose(x=9.0), INTR)

    def test_exact_depth_consistency_with_renderer(self, road_frame):
        geom, pose, image, depth = road_frame
        rng = np.random.default_rng(1)
        errs = []
        for _ in range(10):
            target = Pose(
                x=pose.x + rng.uniform(0, 2.0),
                y=pose.y + rng.uniform(-1.0, 1.0),
                yaw=rng.uniform(-0.05, 0.05),
            )
            out = forward_warp(image, depth, pose_relative(pose, target), INTR)
            ref, _ = render_frame(geom, target, INTR)
            errs.append(np.abs(out.image - ref)[~out.hole_mask].mean())
        assert max(errs) < 0.02


class TestInpaint:
    def test_no_holes_identity(self):
        img = np.random.default_rng(0).random((8, 8)).astype(np.float32)
        res = WarpResult(image=img.copy(), hole_mask=np.zeros((8, 8), bool))
        assert np.array_equal(inpaint(res), img)

    def test_single_pixel_hole_constant_neighborhood(self):
        img = np.full((5, 5), 0.6, dtype=np.float32)
        holes = np.zeros((5, 5), bool)
        holes[2, 2] = True
        img[2, 2] = 0.0
        out = inpaint(WarpResult(image=img, hole_mask=holes))
        assert out[2, 2] == pytest.approx(0.6, abs=1e-4)

    def test_half_image_hole(self):
        rng = np.random.default_rng(1)
        img = rng.random((16, 16)).astype(np.float32)
        holes = np.zeros((16, 16), bool)
        holes[:, 8:] = True
        ref = img.copy()
        out = inpaint(WarpResult(image=img, hole_mask=holes))
        assert np.all(np.isfinite(out))
        assert np.array_equal(out[:, :8], ref[:, :8])

    def test_all_holes_rejected(self):
        res = WarpResult(image=np.zeros((4, 4), np.float32), hole_mask=np.ones((4, 4), bool))
        with pytest.raises(ValueError):
            inpaint(res)


class TestArtifactScore:
    def test_identity_scores_zero(self, road_frame):
        _, _, image, depth = road_frame
        out = forward_warp(image, depth, Pose.identity(), INTR)
        assert artifact_score(image, out) == 0.0

    def test_monotone_in_translation(self):
        rng = np.random.default_rng(2)
        bins = [0.0, 0.5, 1.0, 2.0, 4.0]
        sums = np.zeros(len(bins))
        for k in range(30):
            geom = RoadGeometry(generate_road(100 + k, lane_count=2))
            pose = Pose(x=float(rng.uniform(60, 120)), y=float(rng.uniform(-2, 2)))
            image, depth = render_frame(geom, pose, INTR)
            for i, t in enumerate(bins):
                out = forward_warp(image, depth, Pose(x=t * 0.4, y=t * 0.6), INTR)
                sums[i] += artifact_score(image, out)
        means = sums / 30
        assert all(means[i + 1] >= means[i] - 1e-9 for i in range(len(bins) - 1)), means

    def test_dimension_mismatch(self):
        res = WarpResult(image=np.zeros((4, 4), np.float32), hole_mask=np.zeros((4, 4), bool))
        with pytest.raises(ValueError):
            artifact_score(np.zeros((5, 5)), res)


class TestSimStep:
    def test_commanded_newest_pose_returns_newest_image(self, road_frame):
        geom, pose, image, depth = road_frame
        older = Pose(x=pose.x - 4.0, y=pose.y)
        oimg, odep = render_frame(geom, older, INTR)
        out = reprojective_sim_step(
            [(oimg, odep, older), (image, depth, pose)], pose, INTR
        )
        assert np.array_equal(out, image)

    def test_occluded_region_sourced_from_older_frame(self):
        # frame 2 has a near occluder; frame 1 sits exactly at the commanded
        # pose and sees everything, so its pixels fill the disocclusion
        intr = CameraIntrinsics(40.0, 16.0, 8.0, 32, 16)
        rng = np.random.default_rng(3)
        background = rng.random((16, 32)).astype(np.float32)
        img2 = background.copy()
        dep2 = np.full((16, 32), 20.0, dtype=np.float32)
        img2[:, 14:18] = 0.95  # occluder block
        dep2[:, 14:18] = 5.0
        img1 = background
        dep1 = np.full((16, 32), 20.0, dtype=np.float32)
        pose1 = Pose(y=-1.0)
        pose2 = Pose()
        commanded = pose1
        warped2 = forward_warp(img2, dep2, pose_relative(pose2, commanded), intr)
        single_holes = warped2.hole_mask.mean()
        out = reprojective_sim_step(
            [(img1, dep1, pose1), (img2, dep2, pose2)], commanded, intr
        )
        assert single_holes > 0
        assert np.all(np.isfinite(out))
        # disoccluded pixels match the older frame exactly
        assert np.allclose(out[warped2.hole_mask], img1[warped2.hole_mask])

    def test_lateral_weave_coverage(self):
        from roadworld.reproject import composite_history

        geom = RoadGeometry(straight_road(texture_seed=5))
        history = []
        coverages = []
        x = 60.0
        for k in range(29):
            x += 3.0
            pose = Pose(x=x, y=-1.75)
            image, depth = render_frame(geom, pose, INTR)
            history.append((image, depth, pose))
            if k >= 4:
                weave = 0.5 * math.sin((k - 4) / 4.0)
                commanded = Pose(x=x, y=-1.75 + weave)
                out = composite_history(history[-4:], commanded, INTR)
                coverages.append(out.coverage)
        assert len(coverages) == 25
        assert min(coverages) >= 0.85

    def test_empty_history_rejected(self):
        with pytest.raises(ValueError):
            reprojective_sim_step([], Pose(), INTR)


class TestDepthNoise:
    def test_zero_sigma_identity(self):
        d = np.full((4, 4), 7.0)
        assert np.array_equal(perturb_depth(d, 0.0, np.random.default_rng(0)), d)

    def test_lognormal_multiplicative(self):
        rng = np.random.default_rng(1)
        d = np.full((1000,), 10.0)
        out = perturb_depth(d, 0.1, rng)
        ratios = np.log(out / d)
        assert abs(ratios.mean()) < 0.02
        assert abs(ratios.std() - 0.1) < 0.02

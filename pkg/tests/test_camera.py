"""Camera model: rotation composition, projection, and pose validation."""

import math

import numpy as np
import pytest

from posefit.camera import (BehindCameraError, Intrinsics, InvalidPoseError,
                            PoseParams, project_point, project_points,
                            projection_matrix, pose_rotation,
                            rotation_from_angles, world_to_camera)

from conftest import identity_pose

# Independently derived with a symbolic-math tool for (azimuth, elevation,
# in-plane) = (90, 30, 45): Rz(45) @ Rx(30) @ Ry(90), entries are
# (+-sqrt(2)/4, +-sqrt(6)/4, sqrt(2)/2, -sqrt(3)/2, 1/2) evaluated in float64.
ROT_90_30_45 = np.array([
    [-0.3535533905932738, -0.6123724356957945, 0.7071067811865476],
    [0.3535533905932738, 0.6123724356957945, 0.7071067811865476],
    [-0.8660254037844386, 0.5, 0.0],
])


class TestRotation:
    def test_zero_angles_identity_exact(self):
        assert np.array_equal(rotation_from_angles(0.0, 0.0, 0.0), np.eye(3))

    def test_full_turn_identity(self):
        r = rotation_from_angles(360.0, 0.0, 0.0)
        assert np.allclose(r, np.eye(3), atol=1e-9)

    def test_frozen_composition(self):
        r = rotation_from_angles(90.0, 30.0, 45.0)
        assert np.allclose(r, ROT_90_30_45, atol=1e-14)

    def test_orthonormal_and_proper(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            a, e, t = rng.uniform(-720, 720, 3)
            r = rotation_from_angles(a, e, t)
            assert np.allclose(r.T @ r, np.eye(3), atol=1e-9)
            assert abs(np.linalg.det(r) - 1.0) < 1e-9

    def test_azimuth_group_addition(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            a, b = rng.uniform(0, 360, 2)
            left = rotation_from_angles(a, 0, 0) @ rotation_from_angles(b, 0, 0)
            right = rotation_from_angles((a + b) % 360.0, 0, 0)
            assert np.allclose(left, right, atol=1e-9)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidPoseError):
            rotation_from_angles(float("nan"), 0, 0)
        with pytest.raises(InvalidPoseError):
            rotation_from_angles(0, float("inf"), 0)


class TestProjection:
    def test_origin_projects_to_principal_point(self):
        pose = identity_pose()
        assert project_point(pose, (0.0, 0.0, 0.0)) == (320.0, 240.0)

    def test_pinhole_offset(self):
        pose = identity_pose()
        assert project_point(pose, (1.0, 0.0, 0.0)) == (420.0, 240.0)

    def test_rotated_projection_frozen(self):
        # azimuth 90 carries world +z onto camera +x while leaving it at the
        # model-origin depth: pixel (f * 1 / 5 + 320, 240) = (420, 240)
        pose = PoseParams(90.0, 0.0, 0.0, 5.0, 500.0, 320.0, 240.0)
        px, py = project_point(pose, (0.0, 0.0, 1.0))
        assert abs(px - 420.0) < 1e-9
        assert abs(py - 240.0) < 1e-9

    def test_origin_invariance_random_poses(self):
        rng = np.random.default_rng(13)
        for _ in range(300):
            pose = PoseParams(rng.uniform(0, 360), rng.uniform(-90, 90),
                              rng.uniform(-180, 180), rng.uniform(0.1, 50),
                              rng.uniform(10, 2000), rng.uniform(-100, 700),
                              rng.uniform(-100, 700))
            px, py = project_point(pose, (0.0, 0.0, 0.0))
            assert abs(px - pose.principal_u) < 1e-9
            assert abs(py - pose.principal_v) < 1e-9

    def test_focal_doubling_doubles_offset_exactly(self):
        # principal point at the origin so the pixel offset IS the pixel
        # coordinate; doubling f is then an exact power-of-two scaling
        pose = identity_pose(focal=256.0, u=0.0, v=0.0)
        doubled = pose.replace(focal=512.0)
        for pt in [(0.75, -1.25, 0.5), (0.3, 0.7, -0.9), (-1.1, 0.2, 2.3)]:
            px1, py1 = project_point(pose, pt)
            px2, py2 = project_point(doubled, pt)
            assert px2 == 2.0 * px1
            assert py2 == 2.0 * py1

    def test_projective_scale_invariance(self):
        rng = np.random.default_rng(14)
        pose = PoseParams(33.0, 12.0, -7.0, 2.5, 400.0, 320.0, 240.0)
        for _ in range(50):
            pt = rng.uniform(-0.5, 0.5, 3)
            k = rng.uniform(0.2, 8.0)
            scaled = pose.replace(depth=pose.depth * k)
            p1 = project_point(pose, pt)
            p2 = project_point(scaled, pt * k)
            assert abs(p1[0] - p2[0]) < 1e-9
            assert abs(p1[1] - p2[1]) < 1e-9

    def test_behind_camera_raises(self):
        pose = identity_pose(depth=1.0)
        with pytest.raises(BehindCameraError):
            project_point(pose, (0.0, 0.0, -1.0))
        with pytest.raises(BehindCameraError):
            project_point(pose, (0.0, 0.0, -2.0))

    def test_project_points_empty(self):
        assert project_points(identity_pose(), np.zeros((0, 3))) == []

    def test_project_points_origin(self):
        pairs = project_points(identity_pose(), [(0.0, 0.0, 0.0)])
        assert pairs == [((320.0, 240.0), 5.0)]

    def test_project_points_flags_behind(self):
        pose = identity_pose(depth=1.0)
        pairs = project_points(pose, [(0.0, 0.0, 0.0), (0.0, 0.0, -2.0)])
        assert pairs[0][0] == (320.0, 240.0)
        assert math.isnan(pairs[1][0][0]) and math.isnan(pairs[1][0][1])
        assert pairs[1][1] == -1.0

    def test_project_points_matches_project_point(self):
        rng = np.random.default_rng(15)
        pose = PoseParams(120.0, -25.0, 40.0, 4.0, 600.0, 300.0, 200.0)
        pts = rng.uniform(-1, 1, (20, 3))
        pairs = project_points(pose, pts)
        for pt, ((px, py), z) in zip(pts, pairs):
            ex, ey = project_point(pose, pt)
            # batched and single-point matmuls may differ in the last ulp
            assert abs(px - ex) < 1e-9 and abs(py - ey) < 1e-9
            assert z > 0


class TestProjectionMatrix:
    def test_structure(self):
        pose = PoseParams(10.0, 20.0, 30.0, 2.0, 100.0, 50.0, 60.0)
        mat = projection_matrix(pose)
        k = Intrinsics(100.0, 50.0, 60.0).matrix()
        r = pose_rotation(pose)
        expected = k @ np.hstack([r, [[0.0], [0.0], [2.0]]])
        assert np.allclose(mat, expected, atol=1e-12)
        assert mat.shape == (3, 4)

    def test_homogeneous_projection_matches(self):
        rng = np.random.default_rng(16)
        pose = PoseParams(75.0, 15.0, -30.0, 3.0, 500.0, 320.0, 240.0)
        mat = projection_matrix(pose)
        for _ in range(25):
            pt = rng.uniform(-0.6, 0.6, 3)
            h = mat @ np.append(pt, 1.0)
            px, py = project_point(pose, pt)
            assert abs(h[0] / h[2] - px) < 1e-9
            assert abs(h[1] / h[2] - py) < 1e-9

    def test_world_to_camera_depth_offset(self):
        pose = identity_pose(depth=7.0)
        cam = world_to_camera(pose, np.array([[1.0, 2.0, 3.0]]))
        assert np.array_equal(cam, [[1.0, 2.0, 10.0]])


class TestPoseParams:
    def test_wrapping(self):
        pose = PoseParams(370.0, 0.0, 190.0, 1.0, 1.0, 0.0, 0.0)
        assert pose.azimuth_deg == 10.0
        assert pose.inplane_deg == -170.0
        assert PoseParams(-90.0, 0, 0, 1, 1, 0, 0).azimuth_deg == 270.0
        assert PoseParams(0, 0, 180.0, 1, 1, 0, 0).inplane_deg == -180.0

    def test_elevation_clamped_not_wrapped(self):
        assert PoseParams(0, 95.0, 0, 1, 1, 0, 0).elevation_deg == 90.0
        assert PoseParams(0, -123.0, 0, 1, 1, 0, 0).elevation_deg == -90.0
        assert PoseParams(0, 45.0, 0, 1, 1, 0, 0).elevation_deg == 45.0

    def test_invalid_depth_and_focal(self):
        with pytest.raises(InvalidPoseError):
            PoseParams(0, 0, 0, 0.0, 1.0, 0, 0)
        with pytest.raises(InvalidPoseError):
            PoseParams(0, 0, 0, -1.0, 1.0, 0, 0)
        with pytest.raises(InvalidPoseError):
            PoseParams(0, 0, 0, 1.0, 0.0, 0, 0)
        with pytest.raises(InvalidPoseError):
            PoseParams(0, 0, 0, 1.0, -5.0, 0, 0)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidPoseError):
            PoseParams(float("nan"), 0, 0, 1, 1, 0, 0)
        with pytest.raises(InvalidPoseError):
            PoseParams(0, 0, 0, 1, float("inf"), 0, 0)

    def test_vector_round_trip(self):
        pose = PoseParams(123.25, -45.5, 17.125, 3.375, 512.0, 321.5, 239.5)
        again = PoseParams.from_vector(pose.as_vector())
        assert again == pose

    def test_replace(self):
        pose = identity_pose()
        moved = pose.replace(azimuth_deg=90.0)
        assert moved.azimuth_deg == 90.0
        assert moved.depth == pose.depth

    def test_intrinsics_validation(self):
        with pytest.raises(InvalidPoseError):
            Intrinsics(0.0, 0.0, 0.0)
        k = Intrinsics(2.0, 3.0, 4.0).matrix()
        assert np.array_equal(k, [[2.0, 0.0, 3.0], [0.0, 2.0, 4.0], [0.0, 0.0, 1.0]])

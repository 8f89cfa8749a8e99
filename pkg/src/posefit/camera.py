"""Full-perspective 7-parameter camera model.

Coordinate conventions used throughout this package:

- World frame: the model's own frame (meshes are centered on the world origin).
- Camera frame: x right, y down, z forward; the camera looks along +z and sits
  on the world -z side at distance ``depth``, so a world point maps to camera
  space as ``X_c = R @ X + (0, 0, depth)``.
- Rotation: ``R = Rz(inplane) @ Rx(elevation) @ Ry(azimuth)`` with right-handed
  positive rotations about each axis; ``R`` is the identity when all three
  angles are zero.
- Image frame: pixel (0, 0) is the top-left corner, u grows right, v grows
  down.  A camera-space point projects to ``(focal * x / z + u, focal * y / z + v)``;
  the world origin therefore always lands on the principal point ``(u, v)``.

Angles are degrees at the API surface and radians internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InvalidPoseError(ValueError):
    """A pose or camera parameter violates its domain (non-finite, d <= 0, ...)."""


class BehindCameraError(ValueError):
    """A point has camera-space z <= 0 and cannot be projected."""


def _wrap_360(deg: float) -> float:
    w = math.fmod(deg, 360.0)
    return w + 360.0 if w < 0.0 else w


def _wrap_180(deg: float) -> float:
    # half-open [-180, 180)
    w = math.fmod(deg + 180.0, 360.0)
    if w < 0.0:
        w += 360.0
    return w - 180.0


@dataclass(frozen=True)
class PoseParams:
    """The 7 continuous pose/camera parameters of one annotation.

    azimuth/elevation/inplane are degrees, depth is world units, focal and the
    principal point are pixels.  Azimuth is stored wrapped to [0, 360),
    in-plane rotation to [-180, 180), and elevation clamped (not wrapped) to
    [-90, 90]; depth and focal must be positive, otherwise construction
    raises InvalidPoseError.
    """

    azimuth_deg: float
    elevation_deg: float
    inplane_deg: float
    depth: float
    focal: float
    principal_u: float
    principal_v: float

    def __post_init__(self):
        vals = (self.azimuth_deg, self.elevation_deg, self.inplane_deg,
                self.depth, self.focal, self.principal_u, self.principal_v)
        if not all(math.isfinite(float(x)) for x in vals):
            raise InvalidPoseError(f"pose parameters must be finite, got {vals}")
        if self.depth <= 0.0:
            raise InvalidPoseError(f"depth must be > 0, got {self.depth}")
        if self.focal <= 0.0:
            raise InvalidPoseError(f"focal must be > 0, got {self.focal}")
        object.__setattr__(self, "azimuth_deg", _wrap_360(float(self.azimuth_deg)))
        object.__setattr__(self, "inplane_deg", _wrap_180(float(self.inplane_deg)))
        object.__setattr__(self, "elevation_deg",
                           min(90.0, max(-90.0, float(self.elevation_deg))))
        object.__setattr__(self, "depth", float(self.depth))
        object.__setattr__(self, "focal", float(self.focal))
        object.__setattr__(self, "principal_u", float(self.principal_u))
        object.__setattr__(self, "principal_v", float(self.principal_v))

    def as_vector(self) -> np.ndarray:
        """(a, e, theta, d, f, u, v) as a float64 array, in this fixed order."""
        return np.array([self.azimuth_deg, self.elevation_deg, self.inplane_deg,
                         self.depth, self.focal, self.principal_u, self.principal_v])

    @classmethod
    def from_vector(cls, vec) -> "PoseParams":
        a, e, t, d, f, u, v = (float(x) for x in vec)
        return cls(a, e, t, d, f, u, v)

    def replace(self, **kwargs) -> "PoseParams":
        import dataclasses
        return dataclasses.replace(self, **kwargs)


PARAM_NAMES = ("azimuth_deg", "elevation_deg", "inplane_deg",
               "depth", "focal", "principal_u", "principal_v")


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics: square pixels, no skew."""

    focal: float
    principal_u: float
    principal_v: float

    def __post_init__(self):
        if not (math.isfinite(self.focal) and self.focal > 0.0):
            raise InvalidPoseError(f"focal must be finite and > 0, got {self.focal}")

    def matrix(self) -> np.ndarray:
        return np.array([[self.focal, 0.0, self.principal_u],
                         [0.0, self.focal, self.principal_v],
                         [0.0, 0.0, 1.0]])


def rotation_from_angles(azimuth_deg: float, elevation_deg: float,
                         inplane_deg: float) -> np.ndarray:
    """World-to-camera rotation for the given angles, as a 3x3 array.

    Composition is roll about the camera z-axis, applied after pitch about x,
    applied after yaw about y: ``Rz(inplane) @ Rx(elevation) @ Ry(azimuth)``.
    """
    for name, val in (("azimuth", azimuth_deg), ("elevation", elevation_deg),
                      ("inplane", inplane_deg)):
        if not math.isfinite(float(val)):
            raise InvalidPoseError(f"{name} angle must be finite, got {val}")
    a = math.radians(azimuth_deg)
    e = math.radians(elevation_deg)
    t = math.radians(inplane_deg)
    ca, sa = math.cos(a), math.sin(a)
    ce, se = math.cos(e), math.sin(e)
    ct, st = math.cos(t), math.sin(t)
    ry = np.array([[ca, 0.0, sa], [0.0, 1.0, 0.0], [-sa, 0.0, ca]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, ce, -se], [0.0, se, ce]])
    rz = np.array([[ct, -st, 0.0], [st, ct, 0.0], [0.0, 0.0, 1.0]])
    return rz @ rx @ ry


def pose_rotation(pose: PoseParams) -> np.ndarray:
    return rotation_from_angles(pose.azimuth_deg, pose.elevation_deg, pose.inplane_deg)


def projection_matrix(pose: PoseParams) -> np.ndarray:
    """The 3x4 matrix K @ [R | T] with T = (0, 0, depth)."""
    k = Intrinsics(pose.focal, pose.principal_u, pose.principal_v).matrix()
    rt = np.hstack([pose_rotation(pose), np.array([[0.0], [0.0], [pose.depth]])])
    return k @ rt


def world_to_camera(pose: PoseParams, points: np.ndarray) -> np.ndarray:
    """Map world points (N, 3) to camera space: R @ X + (0, 0, depth)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    cam = pts @ pose_rotation(pose).T
    cam[:, 2] += pose.depth
    return cam


def project_point(pose: PoseParams, world_point) -> tuple[float, float]:
    """Project one world point to pixel coordinates.

    Raises BehindCameraError when the camera-space z of the point is <= 0;
    clipping policy is the caller's concern.
    """
    cam = world_to_camera(pose, np.asarray(world_point, dtype=np.float64))[0]
    x, y, z = cam
    if z <= 0.0:
        raise BehindCameraError(f"point has camera-space z={z}, cannot project")
    return (pose.focal * x / z + pose.principal_u,
            pose.focal * y / z + pose.principal_v)


def project_points(pose: PoseParams, points) -> list[tuple[tuple[float, float], float]]:
    """Project many world points, keeping behind-camera points flagged.

    Returns one ``((px, py), z_cam)`` pair per input point.  Points with
    z_cam <= 0 get NaN pixel coordinates instead of being dropped, so callers
    can clip on z themselves.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if pts.shape[0] == 0:
        return []
    cam = world_to_camera(pose, pts)
    z = cam[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        px = pose.focal * cam[:, 0] / z + pose.principal_u
        py = pose.focal * cam[:, 1] / z + pose.principal_v
    behind = z <= 0.0
    px = np.where(behind, np.nan, px)
    py = np.where(behind, np.nan, py)
    return [((float(px[i]), float(py[i])), float(z[i])) for i in range(pts.shape[0])]

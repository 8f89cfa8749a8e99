"""Shared fixtures: bundled meshes and the brute-force rasterization oracle."""

import importlib.resources as resources

import numpy as np
import pytest

from posefit import PoseParams, load_obj, normalize
from posefit.mesh import TriangleMesh


def bundled_car_mesh() -> TriangleMesh:
    ref = resources.files("posefit").joinpath("data/test_car.obj")
    with resources.as_file(ref) as path:
        return normalize(load_obj(path))


@pytest.fixture(scope="session")
def car_mesh() -> TriangleMesh:
    """The bundled ~1k-triangle car-like mesh, normalized to unit extent."""
    return bundled_car_mesh()


def _append_box(verts, tris, x0, x1, y0, y1, z0, z1):
    base = len(verts)
    verts.extend([(x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
                  (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1)])
    for a, b, c, d in [(0, 1, 2, 3), (4, 7, 6, 5), (0, 4, 5, 1),
                       (3, 2, 6, 7), (0, 3, 7, 4), (1, 5, 6, 2)]:
        tris.append((base + a, base + b, base + c))
        tris.append((base + a, base + c, base + d))


def small_blob_mesh() -> TriangleMesh:
    """Asymmetric 36-triangle mesh (three boxes) for fast refiner tests."""
    verts: list = []
    tris: list = []
    _append_box(verts, tris, -0.5, 0.3, -0.25, 0.25, -0.2, 0.2)
    _append_box(verts, tris, 0.3, 0.55, -0.15, 0.1, -0.12, 0.12)
    _append_box(verts, tris, -0.45, -0.15, 0.25, 0.5, -0.15, 0.15)
    return TriangleMesh(np.array(verts, dtype=np.float64),
                        np.array(tris, dtype=np.int64))


@pytest.fixture(scope="session")
def blob_mesh() -> TriangleMesh:
    return small_blob_mesh()


def identity_pose(depth=5.0, focal=500.0, u=320.0, v=240.0) -> PoseParams:
    return PoseParams(0.0, 0.0, 0.0, depth, focal, u, v)


def oracle_silhouette(vertices, triangles, pose: PoseParams,
                      width: int, height: int) -> np.ndarray:
    """Brute-force per-pixel point-in-triangle silhouette, scalar Python.

    Implements the documented fill-rule contract independently of the
    vectorized renderer: pixel centers at (ix+0.5, iy+0.5), positive winding
    (vertices B and C swapped when the doubled signed area is negative),
    boundary samples owned by edges with dy < 0 or (dy == 0 and dx > 0).

    Restricted to identity-rotation poses (azimuth = elevation = inplane = 0)
    with all vertices strictly in front of the camera, so the world-to-camera
    transform stays exact in floating point and results are comparable
    bit-for-bit with the production renderer.
    """
    assert pose.azimuth_deg == pose.elevation_deg == pose.inplane_deg == 0.0
    f, u, v, d = pose.focal, pose.principal_u, pose.principal_v, pose.depth
    pts = []
    for x, y, z in vertices:
        zc = z + d
        assert zc > 0.0
        pts.append((f * x / zc + u, f * y / zc + v))

    bits = np.zeros((height, width), dtype=bool)
    prepared = []
    for t in triangles:
        a, b, c = pts[t[0]], pts[t[1]], pts[t[2]]
        area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if area2 == 0.0:
            continue
        if area2 < 0.0:
            b, c = c, b
        prepared.append((a, b, c))

    for iy in range(height):
        cy = iy + 0.5
        for ix in range(width):
            cx = ix + 0.5
            for a, b, c in prepared:
                covered = True
                for (px, py), (qx, qy) in ((a, b), (b, c), (c, a)):
                    w = (qx - px) * (cy - py) - (qy - py) * (cx - px)
                    if w > 0.0:
                        continue
                    dx, dy = qx - px, qy - py
                    if w == 0.0 and (dy < 0.0 or (dy == 0.0 and dx > 0.0)):
                        continue
                    covered = False
                    break
                if covered:
                    bits[iy, ix] = True
                    break
    return bits


@pytest.fixture(scope="session")
def oracle():
    return oracle_silhouette

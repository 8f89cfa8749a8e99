"""Deterministic binary silhouette rendering of triangle meshes.

The silhouette is the union of all projected triangles (both windings filled,
no depth buffer).  Coverage uses pixel-center sampling with a top-left
boundary rule, which makes results exactly reproducible:

- Pixel (ix, iy) samples at center ``(ix + 0.5, iy + 0.5)``.
- A triangle is wound positively by swapping two vertices if the doubled
  signed area ``orient2d(A, B, C)`` is negative (image coordinates, y down);
  zero-area triangles are skipped.
- For each directed edge P->Q of a positively wound triangle the pixel center
  ``c`` passes when ``w = (Qx-Px)*(cy-Py) - (Qy-Py)*(cx-Px)`` is > 0, or is
  exactly 0 on a top edge (dy == 0 and dx > 0) or a left edge (dy < 0).
  A pixel is covered when all three edges pass.

Triangles crossing the near plane ``z = NEAR_PLANE`` are polygon-clipped
(Sutherland-Hodgman) before projection so that exploratory poses with tiny
depth never blow up the projection.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .camera import PoseParams, pose_rotation

NEAR_PLANE = 1e-4

# Cap on the number of candidate pixel slots materialized at once by the
# vectorized fill; keeps peak memory bounded for screen-filling meshes.
_FILL_BUDGET = 2_000_000


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Fixed-size binary image: bits is a bool array of shape (height, width)."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError(f"mask must be a non-empty 2D grid, got shape {bits.shape}")
        if bits.dtype != np.bool_:
            bits = bits.astype(bool)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def area(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.array_equal(self.bits, other.bits))

    @classmethod
    def zeros(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))


def mask_area(mask: BinaryMask) -> int:
    """Number of set pixels."""
    return mask.area()


def mask_to_png_bytes(mask: BinaryMask) -> bytes:
    """8-bit grayscale PNG, 0 = background, 255 = object."""
    img = Image.fromarray(np.where(mask.bits, 255, 0).astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def save_mask_png(mask: BinaryMask, path) -> None:
    with open(path, "wb") as fh:
        fh.write(mask_to_png_bytes(mask))


def _clip_triangle_near(tri_cam: np.ndarray, near: float) -> list[np.ndarray]:
    """Sutherland-Hodgman clip of one camera-space triangle against z >= near.

    Returns the clipped polygon fan-triangulated into 0..2 triangles, each a
    (3, 3) array.
    """
    poly = [tri_cam[i] for i in range(3)]
    out: list[np.ndarray] = []
    for i in range(len(poly)):
        cur = poly[i]
        prev = poly[i - 1]
        cur_in = cur[2] >= near
        prev_in = prev[2] >= near
        if cur_in != prev_in:
            t = (near - prev[2]) / (cur[2] - prev[2])
            hit = prev + t * (cur - prev)
            hit[2] = near  # pin exactly onto the plane
            out.append(hit)
        if cur_in:
            out.append(cur)
    tris = []
    for k in range(1, len(out) - 1):
        tris.append(np.stack([out[0], out[k], out[k + 1]]))
    return tris


def _project_xy(pts: np.ndarray, pose: PoseParams) -> np.ndarray:
    px = pose.focal * pts[..., 0] / pts[..., 2] + pose.principal_u
    py = pose.focal * pts[..., 1] / pts[..., 2] + pose.principal_v
    return np.stack([px, py], axis=-1)


def _fill_triangles(bits: np.ndarray, tris: np.ndarray) -> None:
    """OR the coverage of 2D triangles (T, 3, 2) into a bool grid, in place."""
    height, width = bits.shape
    ax, ay = tris[:, 0, 0], tris[:, 0, 1]
    bx, by = tris[:, 1, 0].copy(), tris[:, 1, 1].copy()
    cx, cy = tris[:, 2, 0].copy(), tris[:, 2, 1].copy()

    area2 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    flip = area2 < 0.0
    bx[flip], cx[flip] = cx[flip], bx[flip]
    by[flip], cy[flip] = cy[flip], by[flip]
    keep = area2 != 0.0  # degenerate triangles contribute nothing

    minx = np.minimum(np.minimum(ax, bx), cx)
    maxx = np.maximum(np.maximum(ax, bx), cx)
    miny = np.minimum(np.minimum(ay, by), cy)
    maxy = np.maximum(np.maximum(ay, by), cy)
    # candidate pixel index ranges (inclusive), one pixel of slack is harmless
    ix0 = np.clip(np.floor(minx - 0.5), 0, width - 1).astype(np.int64)
    ix1 = np.clip(np.ceil(maxx - 0.5), -1, width - 1).astype(np.int64)
    iy0 = np.clip(np.floor(miny - 0.5), 0, height - 1).astype(np.int64)
    iy1 = np.clip(np.ceil(maxy - 0.5), -1, height - 1).astype(np.int64)
    keep &= (maxx >= 0.5) & (minx <= width - 0.5) & (maxy >= 0.5) & (miny <= height - 0.5)
    keep &= (ix1 >= ix0) & (iy1 >= iy0)
    if not keep.any():
        return

    ax, ay, bx, by, cx, cy, ix0, ix1, iy0, iy1 = (
        arr[keep] for arr in (ax, ay, bx, by, cx, cy, ix0, ix1, iy0, iy1))

    # top-left acceptance of exactly-on-edge samples, per directed edge
    def topleft(px0, py0, px1, py1):
        dx, dy = px1 - px0, py1 - py0
        return (dy < 0.0) | ((dy == 0.0) & (dx > 0.0))

    tl_ab = topleft(ax, ay, bx, by)
    tl_bc = topleft(bx, by, cx, cy)
    tl_ca = topleft(cx, cy, ax, ay)

    nx = ix1 - ix0 + 1
    ny = iy1 - iy0 + 1
    counts = nx * ny
    offsets = np.concatenate([[0], np.cumsum(counts)])

    # chunk triangles so the flattened candidate arrays stay within budget
    start = 0
    n_tris = counts.shape[0]
    while start < n_tris:
        end = start + 1
        base = offsets[start]
        while end < n_tris and offsets[end + 1] - base <= _FILL_BUDGET:
            end += 1
        sl = slice(start, end)
        local_counts = counts[sl]
        total = int(local_counts.sum())
        tid = np.repeat(np.arange(start, end), local_counts)
        local_off = np.repeat(offsets[start:end] - base, local_counts)
        li = np.arange(total, dtype=np.int64) - local_off
        gx = ix0[tid] + li % nx[tid]
        gy = iy0[tid] + li // nx[tid]
        px = gx + 0.5
        py = gy + 0.5

        def edge_pass(px0, py0, px1, py1, tl):
            w = (px1 - px0) * (py - py0) - (py1 - py0) * (px - px0)
            return (w > 0.0) | ((w == 0.0) & tl)

        inside = (edge_pass(ax[tid], ay[tid], bx[tid], by[tid], tl_ab[tid])
                  & edge_pass(bx[tid], by[tid], cx[tid], cy[tid], tl_bc[tid])
                  & edge_pass(cx[tid], cy[tid], ax[tid], ay[tid], tl_ca[tid]))
        bits[gy[inside], gx[inside]] = True
        start = end


def render_silhouette(mesh, pose: PoseParams, width: int, height: int) -> BinaryMask:
    """Render the binary silhouette S(pose, mesh) at the given resolution.

    Fully behind-camera or out-of-frame geometry yields the empty mask.  The
    result is bit-identical across runs for identical inputs.
    """
    if width < 1 or height < 1:
        raise ValueError(f"mask dimensions must be positive, got {width}x{height}")
    bits = np.zeros((height, width), dtype=bool)
    if mesh.triangle_count == 0 or mesh.vertex_count == 0:
        return BinaryMask(bits)

    cam = mesh.vertices @ pose_rotation(pose).T
    cam = cam + np.array([0.0, 0.0, pose.depth])
    tri_cam = cam[mesh.triangles]  # (T, 3, 3)
    z = tri_cam[:, :, 2]
    front = z >= NEAR_PLANE
    all_front = front.all(axis=1)
    some_front = front.any(axis=1)

    tri2d_parts = []
    if all_front.any():
        tri2d_parts.append(_project_xy(tri_cam[all_front], pose))
    crossing = some_front & ~all_front
    if crossing.any():
        clipped = []
        for tri in tri_cam[crossing]:
            clipped.extend(_clip_triangle_near(tri, NEAR_PLANE))
        if clipped:
            tri2d_parts.append(_project_xy(np.stack(clipped), pose))
    if not tri2d_parts:
        return BinaryMask(bits)

    _fill_triangles(bits, np.concatenate(tri2d_parts, axis=0))
    return BinaryMask(bits)

#!/usr/bin/env python3
"""Generate the bundled car-like test mesh (src/posefit/data/test_car.obj).

Purely procedural and deterministic: two body boxes, a sloped cabin, and four
cylinder wheels, about 1k triangles total.  The shape is left-right symmetric
like a real car but has distinct front/rear/top profiles so that every pose
parameter visibly changes the silhouette.
"""

import math
from pathlib import Path

VERTS = []
FACES = []


def add_box(x0, x1, y0, y1, z0, z1):
    base = len(VERTS)
    corners = [(x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
               (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1)]
    VERTS.extend(corners)
    quads = [(0, 1, 2, 3), (4, 7, 6, 5), (0, 4, 5, 1),
             (3, 2, 6, 7), (0, 3, 7, 4), (1, 5, 6, 2)]
    for a, b, c, d in quads:
        FACES.append((base + a, base + b, base + c))
        FACES.append((base + a, base + c, base + d))


def add_frustum(x0, x1, y0, y1, z_half_bottom, z_half_top, x0_top, x1_top):
    """Cabin: trapezoidal side profile, slightly narrower roof."""
    base = len(VERTS)
    bottom = [(x0, y0, -z_half_bottom), (x1, y0, -z_half_bottom),
              (x1, y0, z_half_bottom), (x0, y0, z_half_bottom)]
    top = [(x0_top, y1, -z_half_top), (x1_top, y1, -z_half_top),
           (x1_top, y1, z_half_top), (x0_top, y1, z_half_top)]
    VERTS.extend(bottom + top)
    quads = [(0, 1, 2, 3), (7, 6, 5, 4), (0, 4, 5, 1),
             (1, 5, 6, 2), (2, 6, 7, 3), (3, 7, 4, 0)]
    for a, b, c, d in quads:
        FACES.append((base + a, base + b, base + c))
        FACES.append((base + a, base + c, base + d))


def add_wheel(cx, cy, cz, radius, half_width, segments):
    base = len(VERTS)
    for side in (-1, 1):
        z = cz + side * half_width
        for k in range(segments):
            ang = 2.0 * math.pi * k / segments
            VERTS.append((cx + radius * math.cos(ang), cy + radius * math.sin(ang), z))
    near_c = len(VERTS)
    VERTS.append((cx, cy, cz - half_width))
    far_c = len(VERTS)
    VERTS.append((cx, cy, cz + half_width))
    for k in range(segments):
        k2 = (k + 1) % segments
        a, b = base + k, base + k2
        c, d = base + segments + k, base + segments + k2
        FACES.append((a, b, c))
        FACES.append((b, d, c))
        FACES.append((near_c, b, a))
        FACES.append((far_c, c, d))


def main():
    # length along x, up along y, width along z; normalized on load
    add_box(-2.0, 1.1, 0.0, 0.78, -0.82, 0.82)       # main body
    add_box(1.1, 2.0, 0.0, 0.48, -0.78, 0.78)        # hood, lower than the body
    add_box(-2.0, -1.72, 0.48, 0.95, -0.7, 0.7)      # rear spoiler lip
    add_frustum(-1.45, 0.45, 0.78, 1.38, 0.72, 0.62, -1.2, -0.05)  # cabin
    for cx in (-1.25, 1.25):
        for cz in (-0.85, 0.85):
            add_wheel(cx, 0.0, cz, 0.45, 0.13, 60)

    out = Path(__file__).resolve().parents[1] / "src" / "posefit" / "data" / "test_car.obj"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        fh.write("# procedural car-like test mesh\n")
        for x, y, z in VERTS:
            fh.write(f"v {x:.6f} {y:.6f} {z:.6f}\n")
        for a, b, c in FACES:
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")
    print(f"wrote {out}: {len(VERTS)} vertices, {len(FACES)} triangles")


if __name__ == "__main__":
    main()

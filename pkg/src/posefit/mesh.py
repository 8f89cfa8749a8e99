"""Triangle mesh loading (Wavefront OBJ subset: v and f records only)."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ObjParseError(ValueError):
    """Malformed OBJ content; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class EmptyMeshError(ValueError):
    pass


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle set: vertices (N, 3) float64, triangles (T, 3) int64.

    Triangle indices are 0-based and must reference existing vertices.  The
    triangle list may be empty; degenerate (zero-area) triangles are allowed
    here and skipped at rasterization time.
    """

    vertices: np.ndarray
    triangles: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int64))

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        tris = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if tris.size and (tris.min() < 0 or tris.max() >= verts.shape[0]):
            raise ValueError("triangle index out of range")
        verts.setflags(write=False)
        tris.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def triangle_count(self) -> int:
        return self.triangles.shape[0]


def _parse_face_index(token: str, line_no: int) -> int:
    # "7/2/3" and "7//3" reference vertex 7; only the vertex index matters here
    head = token.split("/", 1)[0]
    try:
        idx = int(head)
    except ValueError:
        raise ObjParseError(line_no, f"non-integer face index {token!r}") from None
    if idx == 0:
        raise ObjParseError(line_no, "face index 0 is invalid (OBJ indices are 1-based)")
    return idx


def load_obj(source) -> TriangleMesh:
    """Parse an OBJ file, path, string, or byte/text stream into a TriangleMesh.

    Only ``v`` and ``f`` records are interpreted; everything else is skipped.
    Faces with more than 3 vertices are fan-triangulated from their first
    vertex.  Negative (relative) indices resolve against the vertices seen so
    far, as usual for OBJ.
    """
    if isinstance(source, Path):
        text = source.read_bytes().decode("utf-8", errors="replace")
    elif isinstance(source, str):
        # a one-line string is OBJ content if it starts like an OBJ record,
        # otherwise it is a filename
        is_content = ("\n" in source or source == ""
                      or source.lstrip().startswith(("v ", "f ", "#")))
        if is_content:
            text = source
        else:
            with open(source, "rb") as fh:
                text = fh.read().decode("utf-8", errors="replace")
    elif isinstance(source, bytes):
        text = source.decode("utf-8", errors="replace")
    elif isinstance(source, io.TextIOBase):
        text = source.read()
    else:
        data = source.read()
        text = data.decode("utf-8", errors="replace") if isinstance(data, bytes) else data

    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    face_lines: list[int] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ObjParseError(line_no, f"vertex needs 3 coordinates, got {len(parts) - 1}")
            try:
                x, y, z = float(parts[1]), float(parts[2]), float(parts[3])
            except ValueError:
                raise ObjParseError(line_no, f"non-numeric vertex coordinate in {line!r}") from None
            vertices.append((x, y, z))
        elif tag == "f":
            idxs = [_parse_face_index(tok, line_no) for tok in parts[1:]]
            if len(idxs) < 3:
                raise ObjParseError(line_no, f"face needs at least 3 vertices, got {len(idxs)}")
            resolved = []
            for idx in idxs:
                if idx < 0:
                    r = len(vertices) + idx  # relative to vertices defined so far
                    if r < 0:
                        raise ObjParseError(line_no, f"relative index {idx} precedes any vertex")
                    resolved.append(r)
                else:
                    resolved.append(idx - 1)
            for k in range(1, len(resolved) - 1):
                faces.append((resolved[0], resolved[k], resolved[k + 1]))
                face_lines.append(line_no)
        # vt/vn/o/g/s/mtllib/usemtl and anything else: skipped

    n = len(vertices)
    for face, line_no in zip(faces, face_lines):
        for idx in face:
            if idx >= n:
                raise ObjParseError(line_no, f"face references vertex {idx + 1} of {n}")

    return TriangleMesh(
        np.array(vertices, dtype=np.float64).reshape(-1, 3),
        np.array(faces, dtype=np.int64).reshape(-1, 3),
    )


def save_obj(mesh: TriangleMesh) -> str:
    """OBJ text for a mesh (v/f records, full float precision)."""
    out = []
    for x, y, z in mesh.vertices:
        out.append(f"v {float(x)!r} {float(y)!r} {float(z)!r}")
    for a, b, c in mesh.triangles:
        out.append(f"f {a + 1} {b + 1} {c + 1}")
    return "\n".join(out) + ("\n" if out else "")


def bounding_box(mesh: TriangleMesh) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise (min, max) corners over all vertices."""
    if mesh.vertex_count == 0:
        raise EmptyMeshError("bounding box of an empty mesh is undefined")
    return mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)


def normalize(mesh: TriangleMesh) -> TriangleMesh:
    """Center the bounding box on the origin and scale its longest edge to 1."""
    lo, hi = bounding_box(mesh)
    center = (lo + hi) / 2.0
    extent = float((hi - lo).max())
    scale = 1.0 / extent if extent > 0.0 else 1.0
    return TriangleMesh((mesh.vertices - center) * scale, mesh.triangles)

"""HTTP session service for interactive pose annotation.

Each session pairs one image with one mesh and tracks the current pose.
The browser UI drives it through a small JSON API:

    POST /sessions                  create a session (image + mesh paths)
    GET  /sessions/{id}             session state
    GET  /sessions/{id}/overlay     PNG of the image with the silhouette
                                    blended on top (side-effect free)
    PUT  /sessions/{id}/pose        validate and store a new pose
    POST /sessions/{id}/refine      run the silhouette-IoU search (blocking)
    POST /sessions/{id}/save        persist an annotation record to disk

Sessions live in memory; only saved records touch the filesystem.
Requests against the same session are serialized by a per-session lock, so
a refine snapshot cannot interleave with a concurrent pose update.
"""

import io
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from PIL import Image
from pydantic import BaseModel

from .camera import InvalidPoseError, PoseParams
from .mesh import TriangleMesh, bounding_box, load_obj
from .rasterizer import BinaryMask, mask_to_png_bytes, render_silhouette
from .records import (AnnotationRecord, pose_from_dict, pose_to_dict,
                      record_to_dict, write_record_file)
from .refiner import DegenerateInitializationError, RefinerConfig, refine
from .segmentation import (NoReferenceError, ReferenceSet, iou, load_mask_png,
                           select_reference)

DEFAULT_PORT = 8750


class PoseModel(BaseModel):
    azimuth_deg: float
    elevation_deg: float
    inplane_deg: float
    depth: float
    focal: float
    principal_u: float
    principal_v: float


class InstanceMaskModel(BaseModel):
    path: str
    confidence: float = 1.0


class CreateSessionModel(BaseModel):
    image_path: str
    mesh_path: str
    initial_pose: Optional[PoseModel] = None
    semantic_mask_path: Optional[str] = None
    instance_masks: Optional[list[InstanceMaskModel]] = None


class PoseUpdateModel(BaseModel):
    pose: PoseModel


class RefineRequestModel(BaseModel):
    config: Optional[dict] = None


class SaveRequestModel(BaseModel):
    category: Optional[str] = None
    stage: Optional[str] = None


@dataclass
class Session:
    session_id: str
    image_path: str
    mesh_path: str
    image: Image.Image
    mesh: TriangleMesh
    pose: PoseParams
    reference: Optional[ReferenceSet] = None
    stage: str = "human"
    dirty: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def width(self) -> int:
        return self.image.width

    @property
    def height(self) -> int:
        return self.image.height


def default_pose(mesh: TriangleMesh, width: int, height: int) -> PoseParams:
    """Centered starting pose: frame the whole mesh, no rotation."""
    lo, hi = bounding_box(mesh)
    extent = float(np.max(hi - lo))
    return PoseParams(
        azimuth_deg=0.0,
        elevation_deg=0.0,
        inplane_deg=0.0,
        depth=3.0 * extent if extent > 0.0 else 1.0,
        focal=float(max(width, height)),
        principal_u=width / 2.0,
        principal_v=height / 2.0,
    )


def _pose_from_model(model: PoseModel) -> PoseParams:
    try:
        return pose_from_dict(model.model_dump())
    except (InvalidPoseError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _overlay_png(image: Image.Image, mask: BinaryMask) -> bytes:
    """Blend the silhouette in 50% green over the image."""
    arr = np.asarray(image.convert("RGB"), dtype=np.uint16).copy()
    green = np.array([0, 255, 0], dtype=np.uint16)
    arr[mask.bits] = (arr[mask.bits] + green) // 2
    buf = io.BytesIO()
    Image.fromarray(arr.astype(np.uint8), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def create_app(records_dir="records") -> FastAPI:
    records_path = Path(records_dir)
    app = FastAPI(title="posefit annotation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, Session] = {}
    store_lock = threading.Lock()

    def get_session(session_id: str) -> Session:
        with store_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404,
                                detail=f"no such session: {session_id}")
        return session

    def session_state(session: Session) -> dict:
        return {
            "session_id": session.session_id,
            "image_path": session.image_path,
            "mesh_path": session.mesh_path,
            "width": session.width,
            "height": session.height,
            "pose": pose_to_dict(session.pose),
            "has_reference": session.reference is not None
                             and not session.reference.is_empty(),
            "stage": session.stage,
            "dirty": session.dirty,
        }

    @app.post("/sessions")
    def create_session(body: CreateSessionModel):
        try:
            image = Image.open(body.image_path)
            image.load()
        except OSError as exc:
            raise HTTPException(status_code=400,
                                detail=f"cannot load image: {exc}") from exc
        try:
            mesh = load_obj(body.mesh_path)
        except (OSError, ValueError) as exc:
            raise HTTPException(status_code=400,
                                detail=f"cannot load mesh: {exc}") from exc

        reference = None
        if body.semantic_mask_path or body.instance_masks:
            try:
                semantic = (load_mask_png(body.semantic_mask_path)
                            if body.semantic_mask_path else None)
                instances = tuple(
                    (load_mask_png(m.path), m.confidence)
                    for m in (body.instance_masks or []))
                reference = ReferenceSet(semantic_mask=semantic,
                                         instance_masks=instances)
            except (OSError, ValueError) as exc:
                raise HTTPException(status_code=400,
                                    detail=f"cannot load reference: {exc}") from exc

        if body.initial_pose is not None:
            pose = _pose_from_model(body.initial_pose)
        else:
            pose = default_pose(mesh, image.width, image.height)

        session = Session(
            session_id=uuid.uuid4().hex,
            image_path=body.image_path,
            mesh_path=body.mesh_path,
            image=image,
            mesh=mesh,
            pose=pose,
        )
        session.reference = reference
        with store_lock:
            sessions[session.session_id] = session
        return session_state(session)

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return session_state(session)

    @app.get("/sessions/{session_id}/overlay")
    def get_overlay(session_id: str, pose: Optional[str] = Query(default=None)):
        session = get_session(session_id)
        if pose is not None:
            try:
                query_pose = pose_from_dict(json.loads(pose))
            except (json.JSONDecodeError, ValueError) as exc:
                raise HTTPException(status_code=422,
                                    detail=f"bad pose: {exc}") from exc
        else:
            with session.lock:
                query_pose = session.pose
        mask = render_silhouette(session.mesh, query_pose,
                                 session.width, session.height)
        return Response(content=_overlay_png(session.image, mask),
                        media_type="image/png")

    @app.get("/sessions/{session_id}/silhouette")
    def get_silhouette(session_id: str, pose: Optional[str] = Query(default=None)):
        session = get_session(session_id)
        if pose is not None:
            try:
                query_pose = pose_from_dict(json.loads(pose))
            except (json.JSONDecodeError, ValueError) as exc:
                raise HTTPException(status_code=422,
                                    detail=f"bad pose: {exc}") from exc
        else:
            with session.lock:
                query_pose = session.pose
        mask = render_silhouette(session.mesh, query_pose,
                                 session.width, session.height)
        return Response(content=mask_to_png_bytes(mask), media_type="image/png")

    @app.put("/sessions/{session_id}/pose")
    def put_pose(session_id: str, body: PoseUpdateModel):
        session = get_session(session_id)
        pose = _pose_from_model(body.pose)
        with session.lock:
            session.pose = pose
            session.stage = "human"
            session.dirty = True
            return {"pose": pose_to_dict(session.pose)}

    @app.post("/sessions/{session_id}/refine")
    def post_refine(session_id: str, body: Optional[RefineRequestModel] = None):
        session = get_session(session_id)
        with session.lock:
            if session.reference is None or session.reference.is_empty():
                raise HTTPException(status_code=409,
                                    detail="session has no reference masks")
            snapshot = session.pose
            initial_render = render_silhouette(session.mesh, snapshot,
                                               session.width, session.height)
            try:
                reference = select_reference(session.reference, initial_render)
            except NoReferenceError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            overrides = (body.config or {}) if body is not None else {}
            if "epsilon" in overrides:
                overrides["epsilon"] = tuple(overrides["epsilon"])
            try:
                config = RefinerConfig.for_initial_pose(snapshot, **overrides)
            except (TypeError, ValueError) as exc:
                raise HTTPException(status_code=422,
                                    detail=f"bad refiner config: {exc}") from exc
            try:
                result = refine(session.mesh, snapshot, reference, config)
            except DegenerateInitializationError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            session.pose = result.pose
            session.stage = "refined"
            session.dirty = True
            return {
                "pose": pose_to_dict(result.pose),
                "iou_initial": result.iou_initial,
                "iou_final": result.iou_final,
                "sweeps": result.sweeps,
                "evaluations": result.evaluations,
                "converged": result.converged,
                "trajectory": [[s, v] for s, v in result.trajectory],
            }

    @app.post("/sessions/{session_id}/save")
    def post_save(session_id: str, body: Optional[SaveRequestModel] = None):
        session = get_session(session_id)
        with session.lock:
            stage = (body.stage if body is not None and body.stage
                     else session.stage)
            category = (body.category if body is not None and body.category
                        else Path(session.mesh_path).stem)
            iou_vs_reference = None
            if session.reference is not None and not session.reference.is_empty():
                current = render_silhouette(session.mesh, session.pose,
                                            session.width, session.height)
                try:
                    reference = select_reference(session.reference, current)
                    iou_vs_reference = iou(current, reference)
                except NoReferenceError:
                    iou_vs_reference = None
            try:
                record = AnnotationRecord(
                    image_id=Path(session.image_path).stem,
                    image_width=session.width,
                    image_height=session.height,
                    category=category,
                    model_path=session.mesh_path,
                    pose=session.pose,
                    stage=stage,
                    iou_vs_reference=iou_vs_reference,
                )
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            records_path.mkdir(parents=True, exist_ok=True)
            out_path = records_path / f"{record.image_id}.json"
            write_record_file(record, out_path)
            session.dirty = False
            return {"record": record_to_dict(record), "path": str(out_path)}

    return app

"""posefit: annotate and refine full-perspective 3D object poses against
monocular images by maximizing silhouette IoU."""

from .camera import (
    BehindCameraError,
    Intrinsics,
    InvalidPoseError,
    PARAM_NAMES,
    PoseParams,
    project_point,
    project_points,
    projection_matrix,
    rotation_from_angles,
)
from .mesh import EmptyMeshError, ObjParseError, TriangleMesh, bounding_box, load_obj, normalize
from .rasterizer import BinaryMask, mask_area, render_silhouette, save_mask_png
from .refiner import DegenerateInitializationError, RefineResult, RefinerConfig, objective, refine
from .records import AnnotationRecord, RecordError, SplitManifest, load_record, random_split, save_record
from .segmentation import NoReferenceError, ReferenceSet, iou, load_mask_png, select_reference

__version__ = "0.1.0"

__all__ = [
    "AnnotationRecord",
    "BehindCameraError",
    "BinaryMask",
    "DegenerateInitializationError",
    "EmptyMeshError",
    "Intrinsics",
    "InvalidPoseError",
    "NoReferenceError",
    "ObjParseError",
    "PARAM_NAMES",
    "PoseParams",
    "RecordError",
    "RefineResult",
    "RefinerConfig",
    "ReferenceSet",
    "SplitManifest",
    "TriangleMesh",
    "bounding_box",
    "iou",
    "load_mask_png",
    "load_obj",
    "load_record",
    "mask_area",
    "normalize",
    "objective",
    "project_point",
    "project_points",
    "projection_matrix",
    "random_split",
    "refine",
    "render_silhouette",
    "rotation_from_angles",
    "save_mask_png",
    "save_record",
    "select_reference",
]

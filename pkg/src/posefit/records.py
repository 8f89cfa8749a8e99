"""Annotation records, JSON (de)serialization, and train/test split manifests."""

from __future__ import annotations

import json
import os
import random
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .camera import InvalidPoseError, PoseParams

SCHEMA_VERSION = 1
STAGES = ("human", "refined")


class RecordError(ValueError):
    pass


@dataclass(frozen=True)
class AnnotationRecord:
    image_id: str
    image_width: int
    image_height: int
    category: str
    model_path: str
    pose: PoseParams
    stage: str  # "human" or "refined"
    iou_vs_reference: float | None = None
    timestamp: datetime | None = None

    def __post_init__(self):
        if self.stage not in STAGES:
            raise RecordError(f"stage must be one of {STAGES}, got {self.stage!r}")
        if self.iou_vs_reference is not None and not 0.0 <= self.iou_vs_reference <= 1.0:
            raise RecordError(f"iou_vs_reference must lie in [0, 1], got {self.iou_vs_reference}")
        if self.timestamp is None:
            object.__setattr__(self, "timestamp", datetime.now(timezone.utc))
        elif self.timestamp.tzinfo is None:
            object.__setattr__(self, "timestamp", self.timestamp.replace(tzinfo=timezone.utc))


def record_to_dict(record: AnnotationRecord) -> dict:
    return {
        "image_id": record.image_id,
        "image_width": record.image_width,
        "image_height": record.image_height,
        "category": record.category,
        "model_path": record.model_path,
        "pose": pose_to_dict(record.pose),
        "stage": record.stage,
        "iou_vs_reference": record.iou_vs_reference,
        "timestamp": record.timestamp.isoformat(),
        "schema_version": SCHEMA_VERSION,
    }


def pose_to_dict(pose: PoseParams) -> dict:
    return {
        "azimuth_deg": pose.azimuth_deg,
        "elevation_deg": pose.elevation_deg,
        "inplane_deg": pose.inplane_deg,
        "depth": pose.depth,
        "focal": pose.focal,
        "principal_u": pose.principal_u,
        "principal_v": pose.principal_v,
    }


def pose_from_dict(data: dict) -> PoseParams:
    try:
        return PoseParams(
            azimuth_deg=float(data["azimuth_deg"]),
            elevation_deg=float(data["elevation_deg"]),
            inplane_deg=float(data["inplane_deg"]),
            depth=float(data["depth"]),
            focal=float(data["focal"]),
            principal_u=float(data["principal_u"]),
            principal_v=float(data["principal_v"]),
        )
    except KeyError as exc:
        raise RecordError(f"pose is missing field {exc}") from None


def record_from_dict(data: dict) -> AnnotationRecord:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise RecordError(f"unknown schema_version {version!r} (expected {SCHEMA_VERSION})")
    try:
        ts_raw = data["timestamp"]
        record = AnnotationRecord(
            image_id=str(data["image_id"]),
            image_width=int(data["image_width"]),
            image_height=int(data["image_height"]),
            category=str(data["category"]),
            model_path=str(data["model_path"]),
            pose=pose_from_dict(data["pose"]),
            stage=str(data["stage"]),
            iou_vs_reference=(None if data.get("iou_vs_reference") is None
                              else float(data["iou_vs_reference"])),
            timestamp=datetime.fromisoformat(ts_raw.replace("Z", "+00:00")),
        )
    except KeyError as exc:
        raise RecordError(f"record is missing field {exc}") from None
    except InvalidPoseError as exc:
        raise RecordError(f"record violates pose invariants: {exc}") from None
    return record


def save_record(record: AnnotationRecord) -> bytes:
    """Single-record JSON document as UTF-8 bytes."""
    return (json.dumps(record_to_dict(record), indent=2) + "\n").encode("utf-8")


def load_record(source) -> AnnotationRecord:
    """Parse a record from bytes, text, or a readable stream."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise RecordError(f"invalid record JSON: {exc}") from None
    return record_from_dict(data)


def write_record_file(record: AnnotationRecord, path) -> None:
    """Atomic single-record write (temp file then rename)."""
    _atomic_write(Path(path), save_record(record))


def read_record_file(path) -> AnnotationRecord:
    return load_record(Path(path).read_bytes())


def write_records_jsonl(records, path) -> None:
    """Atomic JSON-lines corpus write, one record per line."""
    lines = "".join(json.dumps(record_to_dict(r)) + "\n" for r in records)
    _atomic_write(Path(path), lines.encode("utf-8"))


def read_records_jsonl(path) -> list[AnnotationRecord]:
    out = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(record_from_dict(json.loads(line)))
        except (json.JSONDecodeError, RecordError) as exc:
            raise RecordError(f"{path}, line {line_no}: {exc}") from None
    return out


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


@dataclass(frozen=True)
class SplitManifest:
    dataset_name: str
    train: tuple[str, ...]
    test: tuple[str, ...]

    def __post_init__(self):
        train = tuple(str(x) for x in self.train)
        test = tuple(str(x) for x in self.test)
        if len(set(train)) != len(train) or len(set(test)) != len(test):
            raise ValueError("duplicate image ids within a split")
        if set(train) & set(test):
            raise ValueError("train and test overlap")
        object.__setattr__(self, "train", train)
        object.__setattr__(self, "test", test)

    def to_dict(self) -> dict:
        return {"dataset_name": self.dataset_name,
                "train": list(self.train), "test": list(self.test)}

    @classmethod
    def from_dict(cls, data: dict) -> "SplitManifest":
        return cls(dataset_name=str(data["dataset_name"]),
                   train=tuple(data["train"]), test=tuple(data["test"]))


def random_split(image_ids, train_fraction: float, seed: int,
                 train_count: int | None = None,
                 dataset_name: str = "dataset") -> SplitManifest:
    """Deterministic random train/test partition of the given ids.

    The train size defaults to round(train_fraction * N); pass train_count to
    pin an exact published size instead (no one rounding rule reproduces every
    reported split).
    """
    ids = [str(x) for x in image_ids]
    if len(set(ids)) != len(ids):
        raise ValueError("image ids contain duplicates")
    n = len(ids)
    if train_count is None:
        if not 0.0 <= train_fraction <= 1.0:
            raise ValueError(f"train_fraction must lie in [0, 1], got {train_fraction}")
        train_count = round(train_fraction * n)
    if not 0 <= train_count <= n:
        raise ValueError(f"train_count {train_count} out of range for {n} ids")
    shuffled = list(ids)
    random.Random(seed).shuffle(shuffled)
    return SplitManifest(dataset_name=dataset_name,
                         train=tuple(shuffled[:train_count]),
                         test=tuple(shuffled[train_count:]))

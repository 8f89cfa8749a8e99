"""Reference segmentation masks and the IoU overlap criterion.

Reference masks come from external segmenters (semantic and/or instance
models) as PNG files; running the segmenters themselves is out of scope.
When an image has several candidate masks, `select_reference` picks the one
the refinement objective should chase.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .rasterizer import BinaryMask

# An instance mask overlapping the initial render by less than this is
# presumed to belong to a different object in the image.
INSTANCE_IOU_THRESHOLD = 0.25


class MaskShapeError(ValueError):
    pass


class NoReferenceError(ValueError):
    """No usable (nonempty) reference mask is available."""


def iou(mask_a: BinaryMask, mask_b: BinaryMask) -> float:
    """Intersection over union of two same-sized binary masks, in [0, 1].

    Two empty masks have IoU 0 by convention.
    """
    if mask_a.bits.shape != mask_b.bits.shape:
        raise MaskShapeError(
            f"mask dimensions differ: {mask_a.width}x{mask_a.height} "
            f"vs {mask_b.width}x{mask_b.height}")
    inter = int(np.logical_and(mask_a.bits, mask_b.bits).sum())
    union = int(np.logical_or(mask_a.bits, mask_b.bits).sum())
    if union == 0:
        return 0.0
    return inter / union


@dataclass(frozen=True)
class ReferenceSet:
    """Candidate reference masks for one image.

    instance_masks pairs each mask with the segmenter's confidence in [0, 1];
    the confidence is carried for provenance but selection is driven by
    overlap with the initial render.
    """

    semantic_mask: BinaryMask | None = None
    instance_masks: tuple[tuple[BinaryMask, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "instance_masks", tuple(
            (m, float(c)) for m, c in self.instance_masks))
        shapes = {m.bits.shape for m, _ in self.instance_masks}
        if self.semantic_mask is not None:
            shapes.add(self.semantic_mask.bits.shape)
        if len(shapes) > 1:
            raise MaskShapeError(f"reference masks disagree on dimensions: {sorted(shapes)}")
        for _, c in self.instance_masks:
            if not 0.0 <= c <= 1.0:
                raise ValueError(f"instance confidence must lie in [0, 1], got {c}")

    def is_empty(self) -> bool:
        return self.semantic_mask is None and not self.instance_masks


def select_reference(refs: ReferenceSet, initial_render: BinaryMask,
                     instance_iou_threshold: float = INSTANCE_IOU_THRESHOLD) -> BinaryMask:
    """Pick the most appropriate reference mask for refinement.

    The instance mask overlapping the initial render best wins if its IoU
    reaches the threshold; otherwise the semantic mask is used when present
    and nonempty; otherwise the best nonempty instance mask.  Instance ties
    break toward the larger mask, then first occurrence.  Never returns an
    all-zero mask; raises NoReferenceError when nothing usable exists.
    """
    if refs.is_empty():
        raise NoReferenceError("reference set contains no masks")

    best = None  # (iou, area, index, mask)
    for idx, (mask, _conf) in enumerate(refs.instance_masks):
        if mask.bits.shape != initial_render.bits.shape:
            raise MaskShapeError("instance mask and initial render dimensions differ")
        area = mask.area()
        if area == 0:
            continue
        score = iou(mask, initial_render)
        if best is None or (score, area) > (best[0], best[1]):
            best = (score, area, idx, mask)

    if best is not None and best[0] >= instance_iou_threshold:
        return best[3]
    if refs.semantic_mask is not None and refs.semantic_mask.area() > 0:
        return refs.semantic_mask
    if best is not None:
        return best[3]
    raise NoReferenceError("every candidate reference mask is empty")


def load_mask_png(source) -> BinaryMask:
    """Read a PNG (any bit depth or mode) as a mask: any nonzero pixel is foreground."""
    img = Image.open(source)
    arr = np.asarray(img)
    if arr.ndim == 3:
        fg = (arr != 0).any(axis=2)
    else:
        fg = arr != 0
    return BinaryMask(fg)


def load_reference_set(semantic_path=None, instances_json_path=None) -> ReferenceSet:
    """Build a ReferenceSet from a semantic PNG and/or an instance sidecar.

    The sidecar is JSON: ``[{"file": "mask.png", "confidence": 0.9}, ...]``
    with file names resolved relative to the sidecar's directory.
    """
    semantic = load_mask_png(semantic_path) if semantic_path else None
    instances = []
    if instances_json_path:
        sidecar = Path(instances_json_path)
        entries = json.loads(sidecar.read_text())
        for entry in entries:
            path = Path(entry["file"])
            if not path.is_absolute():
                path = sidecar.parent / path
            instances.append((load_mask_png(path), float(entry.get("confidence", 1.0))))
    return ReferenceSet(semantic_mask=semantic, instance_masks=tuple(instances))

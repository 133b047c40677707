"""Cause modification: erase saliency-anchored boxes and reclassify.

The pipeline per image: predict, build the gradient saliency map for the
predicted class, take the top-p pixels, center a box of the requested
size on each anchor (anchors inside the spare mask are skipped), zero the
covered raw pixels outside the spare mask, renormalize with the original
training stats, predict again.
"""

import csv
import json
from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np

from .classifier import predict
from .dataset import LabeledImage, normalize_image
from .records import ClassificationRecord
from .saliency import PixelSet, gradient_saliency, top_fraction


@dataclass(frozen=True)
class BoundingBox:
    center: tuple  # (row, col)
    width: int     # columns covered before clipping
    height: int    # rows covered before clipping
    row0: int
    row1: int      # exclusive
    col0: int
    col1: int      # exclusive


@dataclass(frozen=True)
class InterventionSpec:
    top_p: float = 0.05
    box_width: int = 7
    box_height: int = 7
    spare_mask: Optional[np.ndarray] = None  # bool (32, 32), True = never erase
    erase_normalized: bool = False  # zero after normalization instead of raw 0

    def __post_init__(self):
        if not (0.0 < self.top_p <= 1.0):
            raise ValueError(f"top_p must be in (0, 1], got {self.top_p}")
        if self.box_width < 1 or self.box_height < 1:
            raise ValueError("box dimensions must be >= 1")


@dataclass(frozen=True)
class InterventionResult:
    before: ClassificationRecord
    after: ClassificationRecord
    erased_pixel_count: int
    flipped_to_true: bool
    boxes: tuple


def anchor_boxes(anchors: PixelSet, width: int, height: int,
                 spare_mask: Optional[np.ndarray] = None, size: int = 32):
    """One box centered on each anchor, clipped to the image; anchors lying
    inside the spare mask produce no box. Even dims extend one extra pixel
    right/down."""
    if width < 1 or height < 1:
        raise ValueError("box dimensions must be >= 1")
    boxes = []
    for r, c in anchors.coordinates:
        if spare_mask is not None and spare_mask[r, c]:
            continue
        r0 = max(0, r - (height - 1) // 2)
        r1 = min(size, r + height // 2 + 1)
        c0 = max(0, c - (width - 1) // 2)
        c1 = min(size, c + width // 2 + 1)
        boxes.append(BoundingBox((r, c), width, height, r0, r1, c0, c1))
    return boxes


def erasure_mask(boxes, spare_mask: Optional[np.ndarray] = None, size: int = 32) -> np.ndarray:
    """Boolean grid of pixels the boxes erase: union of extents minus the
    spare mask."""
    mask = np.zeros((size, size), dtype=bool)
    for b in boxes:
        mask[b.row0:b.row1, b.col0:b.col1] = True
    if spare_mask is not None:
        mask &= ~spare_mask
    return mask


def apply_erasure(image: np.ndarray, boxes, spare_mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Zero every covered, non-spared pixel on all 3 channels (raw space)."""
    mask = erasure_mask(boxes, spare_mask)
    out = image.copy()
    out[:, mask] = 0
    return out


def do_intervention(params, stats, image: LabeledImage, spec: InterventionSpec,
                    model_id: str = "builtin") -> InterventionResult:
    normalized = normalize_image(image.image, stats)
    pred, scores = predict(params, normalized)
    before = ClassificationRecord(image.id, image.label, pred,
                                  tuple(float(s) for s in scores), model_id)
    smap = gradient_saliency(params, normalized, target_class=pred)
    anchors = top_fraction(smap, spec.top_p)
    boxes = anchor_boxes(anchors, spec.box_width, spec.box_height, spec.spare_mask)
    erased = erasure_mask(boxes, spec.spare_mask)
    if spec.erase_normalized:
        modified_norm = normalized.copy()
        modified_norm[:, erased] = 0.0
    else:
        modified = image.image.copy()
        modified[:, erased] = 0
        modified_norm = normalize_image(modified, stats)
    pred2, scores2 = predict(params, modified_norm)
    after = ClassificationRecord(image.id, image.label, pred2,
                                 tuple(float(s) for s in scores2), model_id)
    return InterventionResult(
        before=before,
        after=after,
        erased_pixel_count=int(erased.sum()),
        flipped_to_true=(pred2 == image.label),
        boxes=tuple(boxes),
    )


def sweep(params, stats, misclassified, controls, p_values, widths, heights,
          spare_masks=None, model_id: str = "builtin"):
    """Grid sweep over (p, width, height). For each cell, interventions run
    on the misclassified subset (flip_rate = fraction flipped to true) and
    on correctly-classified controls (collateral_rate = fraction newly
    misclassified). spare_masks maps image id -> mask (or None)."""
    if not p_values or not widths or not heights:
        raise ValueError("sweep grid must be non-empty")
    spare_masks = spare_masks or {}
    rows = []
    for p, w, h in product(p_values, widths, heights):
        flips = 0
        erased_total = 0
        for img in misclassified:
            spec = InterventionSpec(p, w, h, spare_masks.get(img.id))
            res = do_intervention(params, stats, img, spec, model_id)
            flips += int(res.flipped_to_true)
            erased_total += res.erased_pixel_count
        collateral = 0
        for img in controls:
            spec = InterventionSpec(p, w, h, spare_masks.get(img.id))
            res = do_intervention(params, stats, img, spec, model_id)
            collateral += int(res.after.predicted_label != img.label)
            erased_total += res.erased_pixel_count
        total = len(misclassified) + len(controls)
        rows.append({
            "p": p, "box_width": w, "box_height": h,
            "flip_rate": flips / len(misclassified) if misclassified else 0.0,
            "collateral_rate": collateral / len(controls) if controls else 0.0,
            "mean_erased_pixels": erased_total / total if total else 0.0,
        })
    return rows


def result_to_dict(result: InterventionResult):
    def record(r):
        return {"image_id": r.image_id, "true_label": r.true_label,
                "predicted_label": r.predicted_label,
                "scores": list(r.scores), "model_id": r.model_id}
    return {
        "before": record(result.before),
        "after": record(result.after),
        "erased_pixel_count": result.erased_pixel_count,
        "flipped_to_true": result.flipped_to_true,
        "boxes": [{"center": list(b.center), "width": b.width, "height": b.height,
                   "extent": [b.row0, b.row1, b.col0, b.col1]}
                  for b in result.boxes],
    }


def result_to_json(result: InterventionResult) -> str:
    """Canonical serialization shared by the CLI and the HTTP service."""
    return json.dumps(result_to_dict(result), sort_keys=True, indent=2) + "\n"


def export_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "box_width", "box_height", "flip_rate",
                    "collateral_rate", "mean_erased_pixels"])
        for row in rows:
            w.writerow([repr(float(row["p"])), row["box_width"], row["box_height"],
                        repr(float(row["flip_rate"])),
                        repr(float(row["collateral_rate"])),
                        repr(float(row["mean_erased_pixels"]))])

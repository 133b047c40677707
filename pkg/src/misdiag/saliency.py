"""Saliency maps and top-fraction pixel selection.

Primary method: absolute input gradient of the predicted-class score,
reduced to one value per pixel by taking the max over channels.
Cross-check method: occlusion, which only needs a forward scorer and so
also works for models the toolkit did not train.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .classifier import forward, input_gradient, predict
from .dataset import normalize_image


@dataclass(frozen=True)
class SaliencyMap:
    values: np.ndarray  # (32, 32) nonnegative float64
    source: str         # "gradient" | "occlusion"
    target_class: int


@dataclass(frozen=True)
class PixelSet:
    coordinates: tuple  # ((row, col), ...) sorted by descending saliency
    fraction: float


@dataclass(frozen=True)
class OcclusionConfig:
    patch_size: int = 3
    stride: int = 1
    fill: int = 0  # raw intensity used to blank the patch

    def __post_init__(self):
        if self.patch_size < 1 or self.patch_size % 2 == 0 or self.patch_size > 32:
            raise ValueError("patch_size must be odd, in [1, 32]")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


def gradient_saliency(params, image: np.ndarray, target_class=None) -> SaliencyMap:
    """image is a normalized (3, 32, 32) grid; target defaults to the
    predicted class."""
    if target_class is None:
        target_class, _ = predict(params, image)
    grad = input_gradient(params, image, target_class)
    values = np.abs(grad).max(axis=0)
    return SaliencyMap(values=values, source="gradient", target_class=target_class)


def occlusion_saliency(scorer, image: np.ndarray, stats, cfg: OcclusionConfig = OcclusionConfig()) -> SaliencyMap:
    """scorer maps a normalized image to a score vector; image is raw uint8.

    Each stride-grid patch is blanked to cfg.fill in raw space, the image
    renormalized and rescored; a pixel's saliency is the largest drop of
    the predicted-class score over the patches covering it, floored at 0.
    """
    base_scores = scorer(normalize_image(image, stats))
    target = int(np.argmax(base_scores))
    base = float(base_scores[target])
    values = np.zeros((32, 32))
    s = cfg.patch_size
    positions = range(0, 32 - s + 1, cfg.stride)
    for r in positions:
        for c in positions:
            occluded = image.copy()
            occluded[:, r:r + s, c:c + s] = cfg.fill
            drop = base - float(scorer(normalize_image(occluded, stats))[target])
            region = values[r:r + s, c:c + s]
            np.maximum(region, drop, out=region)
    np.maximum(values, 0.0, out=values)
    return SaliencyMap(values=values, source="occlusion", target_class=target)


def model_scorer(params):
    """Adapt a trained model to the scorer interface occlusion expects."""
    return lambda normalized: forward(params, normalized)


def top_fraction(smap: SaliencyMap, p: float) -> PixelSet:
    """The ceil(p * 1024) most salient pixels; ties broken by row-major order."""
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must be in (0, 1], got {p}")
    flat = smap.values.ravel()
    count = math.ceil(p * flat.size)
    # stable sort on -value keeps row-major order within ties
    order = np.argsort(-flat, kind="stable")[:count]
    coords = tuple((int(i) // 32, int(i) % 32) for i in order)
    return PixelSet(coordinates=coords, fraction=p)


def export_saliency_csv(smap: SaliencyMap, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in smap.values:
            w.writerow([repr(float(x)) for x in row])


def export_saliency_png(smap: SaliencyMap, path):
    from PIL import Image
    v = smap.values
    lo, hi = float(v.min()), float(v.max())
    gray = np.zeros((32, 32), dtype=np.uint8)
    if hi > lo:
        gray = np.rint((v - lo) / (hi - lo) * 255.0).astype(np.uint8)
    Image.fromarray(gray, mode="L").save(path, format="PNG")

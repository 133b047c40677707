"""Synthetic planted-interference dataset.

The label of each image is decided by an 8x8 glyph drawn at the center
(filled square / plus sign / main diagonal). A bright 6x6 corner patch
acts as a planted confound: during training its identity (which color
channel lights up) can be correlated with the label, and the test set
carries a flagged "interference" subset whose patch contradicts the
glyph. Ground truth records which pixels belong to the glyph and which
to the patch, so intervention efficacy is verifiable by construction.
"""

import json
from dataclasses import dataclass, asdict, field
from pathlib import Path

import numpy as np

from .dataset import IMAGE_SHAPE, LabeledImage, save_cifar10, load_cifar10

GLYPH_SIZE = 8
GLYPH_ROW0 = (32 - GLYPH_SIZE) // 2  # 12
CORNERS = ("tl", "tr", "bl", "br")


def _glyph_masks():
    square = np.ones((GLYPH_SIZE, GLYPH_SIZE), dtype=bool)
    plus = np.zeros((GLYPH_SIZE, GLYPH_SIZE), dtype=bool)
    plus[3:5, :] = True
    plus[:, 3:5] = True
    diag = np.zeros((GLYPH_SIZE, GLYPH_SIZE), dtype=bool)
    np.fill_diagonal(diag, True)
    np.fill_diagonal(diag[1:, :], True)  # 2 px wide so it survives pooling
    return (square, plus, diag)


GLYPHS = _glyph_masks()


@dataclass(frozen=True)
class PlantedConfig:
    num_classes: int = 3
    train_size: int = 600
    test_size: int = 300
    glyph_intensity: int = 160
    patch_size: int = 6
    patch_corner: str = "tl"
    patch_intensity: int = 255
    correlation: float = 1.0          # P(train patch channel == label)
    patched_fraction: float = 1.0     # fraction of train images carrying a patch
    test_interference_fraction: float = 0.5
    noise_amplitude: int = 20

    def __post_init__(self):
        if not (2 <= self.num_classes <= len(GLYPHS)):
            raise ValueError(
                f"num_classes must be in [2, {len(GLYPHS)}], got {self.num_classes}")
        if not (0.0 <= self.correlation <= 1.0):
            raise ValueError(f"correlation must be in [0, 1], got {self.correlation}")
        if self.patch_corner not in CORNERS:
            raise ValueError(f"patch_corner must be one of {CORNERS}")
        if not (1 <= self.patch_size <= 32):
            raise ValueError("patch must fit inside the 32x32 image")
        r0, r1, c0, c1 = self.patch_rect()
        g0, g1 = GLYPH_ROW0, GLYPH_ROW0 + GLYPH_SIZE
        if r1 > g0 and r0 < g1 and c1 > g0 and c0 < g1:
            raise ValueError("interference patch overlaps the glyph region")

    def patch_rect(self):
        s = self.patch_size
        r0 = 0 if self.patch_corner in ("tl", "tr") else 32 - s
        c0 = 0 if self.patch_corner in ("tl", "bl") else 32 - s
        return (r0, r0 + s, c0, c0 + s)


@dataclass(frozen=True)
class PlantedInfo:
    label: int
    patch_index: int          # -1 when the image carries no patch
    interference: bool
    object_mask: np.ndarray   # bool (32, 32): glyph pixels
    patch_mask: np.ndarray    # bool (32, 32): patch pixels


@dataclass
class PlantedDataset:
    cfg: PlantedConfig
    seed: int
    train: list
    test: list
    info: dict = field(default_factory=dict)  # image id -> PlantedInfo

    def interference_ids(self):
        return [img.id for img in self.test if self.info[img.id].interference]


def _make_image(rng, cfg, label, patch_index):
    pixels = rng.integers(0, cfg.noise_amplitude + 1, size=IMAGE_SHAPE).astype(np.uint8)
    glyph = GLYPHS[label]
    g0 = GLYPH_ROW0
    region = pixels[:, g0:g0 + GLYPH_SIZE, g0:g0 + GLYPH_SIZE]
    region[:, glyph] = cfg.glyph_intensity
    object_mask = np.zeros((32, 32), dtype=bool)
    object_mask[g0:g0 + GLYPH_SIZE, g0:g0 + GLYPH_SIZE][glyph] = True
    patch_mask = np.zeros((32, 32), dtype=bool)
    if patch_index >= 0:
        r0, r1, c0, c1 = cfg.patch_rect()
        pixels[patch_index % 3, r0:r1, c0:c1] = cfg.patch_intensity
        patch_mask[r0:r1, c0:c1] = True
    return pixels, object_mask, patch_mask


def generate_planted_dataset(cfg: PlantedConfig, seed: int) -> PlantedDataset:
    rng = np.random.default_rng(seed)
    ds = PlantedDataset(cfg=cfg, seed=seed, train=[], test=[])
    c = cfg.num_classes

    labels = rng.permutation(np.arange(cfg.train_size) % c)
    for i, label in enumerate(labels):
        label = int(label)
        if rng.random() < cfg.patched_fraction:
            if rng.random() < cfg.correlation:
                patch = label
            else:
                patch = int(rng.integers(0, c))
        else:
            patch = -1
        pixels, obj, pat = _make_image(rng, cfg, label, patch)
        img = LabeledImage(image=pixels, label=label, id=f"train#{i}")
        ds.train.append(img)
        ds.info[img.id] = PlantedInfo(label, patch, False, obj, pat)

    labels = rng.permutation(np.arange(cfg.test_size) % c)
    for i, label in enumerate(labels):
        label = int(label)
        interference = bool(rng.random() < cfg.test_interference_fraction)
        if interference:
            patch = int((label + 1 + rng.integers(0, c - 1)) % c)
        else:
            patch = label
        pixels, obj, pat = _make_image(rng, cfg, label, patch)
        img = LabeledImage(image=pixels, label=label, id=f"test#{i}")
        ds.test.append(img)
        ds.info[img.id] = PlantedInfo(label, patch, interference, obj, pat)

    return ds


def mask_to_rle(mask: np.ndarray):
    """Run-length encode a boolean grid: [[start, length], ...] over the
    row-major flattened array."""
    flat = np.asarray(mask, dtype=bool).ravel()
    runs = []
    start = None
    for i, v in enumerate(flat):
        if v and start is None:
            start = i
        elif not v and start is not None:
            runs.append([start, i - start])
            start = None
    if start is not None:
        runs.append([start, len(flat) - start])
    return runs


def rle_to_mask(runs, shape=(32, 32)) -> np.ndarray:
    flat = np.zeros(shape[0] * shape[1], dtype=bool)
    for start, length in runs:
        if start < 0 or start + length > flat.size or length < 0:
            raise ValueError(f"run [{start}, {length}] out of bounds for {shape}")
        flat[start:start + length] = True
    return flat.reshape(shape)


def save_planted_dataset(ds: PlantedDataset, directory):
    """Persist as train.bin/test.bin (3073-byte records) + manifest.json."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_cifar10(ds.train, directory / "train.bin")
    save_cifar10(ds.test, directory / "test.bin")
    manifest = {
        "seed": ds.seed,
        "config": asdict(ds.cfg),
        "images": {
            img_id: {
                "label": info.label,
                "patch_index": info.patch_index,
                "interference": info.interference,
                "object_mask_rle": mask_to_rle(info.object_mask),
                "patch_mask_rle": mask_to_rle(info.patch_mask),
            }
            for img_id, info in sorted(ds.info.items())
        },
    }
    with open(directory / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_planted_dataset(directory) -> PlantedDataset:
    directory = Path(directory)
    with open(directory / "manifest.json") as fh:
        manifest = json.load(fh)
    cfg = PlantedConfig(**manifest["config"])
    train = load_cifar10(directory / "train.bin", max_label=cfg.num_classes - 1,
                         id_prefix="train")
    test = load_cifar10(directory / "test.bin", max_label=cfg.num_classes - 1,
                        id_prefix="test")
    ds = PlantedDataset(cfg=cfg, seed=manifest["seed"], train=train, test=test)
    for img_id, entry in manifest["images"].items():
        ds.info[img_id] = PlantedInfo(
            label=entry["label"],
            patch_index=entry["patch_index"],
            interference=entry["interference"],
            object_mask=rle_to_mask(entry["object_mask_rle"]),
            patch_mask=rle_to_mask(entry["patch_mask_rle"]),
        )
    return ds

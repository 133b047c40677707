"""CIFAR-10 binary batches, channel normalization, image export.

Binary record format (bit-exact with the upstream distribution): 1 label
byte followed by 3072 pixel bytes (1024 R, 1024 G, 1024 B, each plane
row-major). Images are kept channel-major uint8 arrays of shape
(3, 32, 32).
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

RECORD_BYTES = 3073
IMAGE_SHAPE = (3, 32, 32)
PIXELS_PER_CHANNEL = 32 * 32


class TruncatedFileError(ValueError):
    pass


class InvalidLabelError(ValueError):
    pass


class DegenerateChannelError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledImage:
    image: np.ndarray   # uint8, (3, 32, 32)
    label: int
    id: str

    def __post_init__(self):
        if self.image.shape != IMAGE_SHAPE or self.image.dtype != np.uint8:
            raise ValueError(
                f"image must be uint8 {IMAGE_SHAPE}, got {self.image.dtype} "
                f"{self.image.shape}")


@dataclass(frozen=True)
class ChannelStats:
    mean: np.ndarray  # float64, (3,)
    std: np.ndarray   # float64, (3,)

    def __post_init__(self):
        if not (self.std > 0).all():
            raise DegenerateChannelError(f"channel std must be > 0, got {self.std}")


def load_cifar10(path, max_label: int = 9, id_prefix=None):
    """Load one binary batch file into LabeledImages, ids assigned in file order."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) % RECORD_BYTES != 0:
        raise TruncatedFileError(
            f"{path}: length {len(data)} is not a multiple of {RECORD_BYTES}")
    prefix = id_prefix if id_prefix is not None else path.stem
    n = len(data) // RECORD_BYTES
    buf = np.frombuffer(data, dtype=np.uint8).reshape(n, RECORD_BYTES)
    images = []
    for i in range(n):
        label = int(buf[i, 0])
        if label > max_label:
            raise InvalidLabelError(f"{path}: record {i} has label byte {label}")
        pixels = buf[i, 1:].reshape(IMAGE_SHAPE).copy()
        images.append(LabeledImage(image=pixels, label=label, id=f"{prefix}#{i}"))
    return images


def save_cifar10(images, path):
    """Write LabeledImages in the 3073-byte record format (inverse of load)."""
    with open(path, "wb") as fh:
        for img in images:
            fh.write(bytes([img.label]))
            fh.write(img.image.tobytes())


def compute_channel_stats(images, epsilon: float = 0.0) -> ChannelStats:
    """Per-channel mean and population std over every pixel of every image.

    Accumulation is float64 throughout; per-image partial sums are reduced
    in list order, so the result is deterministic for a given input order.
    """
    if not images:
        raise ValueError("cannot compute channel stats of an empty image list")
    total = np.zeros(3)
    total_sq = np.zeros(3)
    for img in images:
        x = img.image.astype(np.float64)
        total += x.sum(axis=(1, 2))
        total_sq += (x * x).sum(axis=(1, 2))
    count = len(images) * PIXELS_PER_CHANNEL
    mean = total / count
    var = total_sq / count - mean * mean
    var = np.maximum(var, 0.0)
    std = np.sqrt(var)
    if epsilon > 0:
        std = np.maximum(std, epsilon)
    if not (std > 0).all():
        bad = [("RGB"[c]) for c in range(3) if std[c] <= 0]
        raise DegenerateChannelError(
            f"constant channel(s) {bad}: std is 0; pass an epsilon to override")
    return ChannelStats(mean=mean, std=std)


def normalize_image(image: np.ndarray, stats: ChannelStats) -> np.ndarray:
    """(pixel - mean_c) / std_c per channel, float64."""
    if image.shape != IMAGE_SHAPE:
        raise ValueError(f"expected {IMAGE_SHAPE} image, got {image.shape}")
    return (image.astype(np.float64) - stats.mean[:, None, None]) / stats.std[:, None, None]


def to_display_uint8(values: np.ndarray) -> np.ndarray:
    """Map a real-valued image into [0, 255] by per-channel min-max affine."""
    out = np.zeros(IMAGE_SHAPE, dtype=np.uint8)
    for c in range(3):
        plane = values[c]
        lo, hi = float(plane.min()), float(plane.max())
        if hi > lo:
            out[c] = np.rint((plane - lo) / (hi - lo) * 255.0).astype(np.uint8)
    return out


def export_image(image: np.ndarray, path, format: str = "png"):
    """Write a (3, 32, 32) image as PPM (P6) or PNG. Float inputs are
    min-max remapped per channel; uint8 inputs are written as-is."""
    if image.dtype == np.uint8:
        pixels = image
    else:
        pixels = to_display_uint8(image)
    hwc = np.transpose(pixels, (1, 2, 0))
    fmt = format.lower()
    if fmt == "ppm":
        with open(path, "wb") as fh:
            fh.write(b"P6\n32 32\n255\n")
            fh.write(hwc.tobytes())
    elif fmt == "png":
        from PIL import Image
        Image.fromarray(hwc, mode="RGB").save(path, format="PNG")
    else:
        raise ValueError(f"unsupported format {format!r} (use 'ppm' or 'png')")


def load_ppm(path) -> np.ndarray:
    """Read back a P6 file written by export_image."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6" or parts[1] != b"32 32" or parts[2] != b"255":
        raise ValueError(f"{path}: not a 32x32 P6 file written by export_image")
    hwc = np.frombuffer(parts[3][:3072], dtype=np.uint8).reshape(32, 32, 3)
    return np.transpose(hwc, (2, 0, 1)).copy()

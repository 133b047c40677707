"""Small convolutional classifier with hand-derived forward/backward passes.

Fixed architecture: conv(3->8, 3x3, pad 1) + ReLU + maxpool2 ->
conv(8->16, 3x3, pad 1) + ReLU + maxpool2 -> flatten(1024) -> affine ->
softmax. Everything runs in float64 and is deterministic for a fixed
seed, which is what makes the finite-difference gradient checks and the
byte-identical pipeline reruns meaningful.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .backend import kernels

CONV1_OUT = 8
CONV2_OUT = 16
FLAT_DIM = CONV2_OUT * 8 * 8  # 1024 after two 2x2 pools on 32x32


class DivergedError(RuntimeError):
    def __init__(self, epoch, batch):
        super().__init__(f"training diverged (NaN loss) at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


@dataclass
class ModelParams:
    w1: np.ndarray  # (8, 3, 3, 3)
    b1: np.ndarray  # (8,)
    w2: np.ndarray  # (16, 8, 3, 3)
    b2: np.ndarray  # (16,)
    wf: np.ndarray  # (C, 1024)
    bf: np.ndarray  # (C,)

    @property
    def num_classes(self) -> int:
        return self.wf.shape[0]

    def copy(self) -> "ModelParams":
        return ModelParams(*(a.copy() for a in self.arrays()))

    def arrays(self):
        return (self.w1, self.b1, self.w2, self.b2, self.wf, self.bf)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 256
    epochs: int = 100
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")


def _glorot(rng, shape, fan_in, fan_out):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def init_model(seed: int, num_classes: int) -> ModelParams:
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    rng = np.random.default_rng(seed)
    w1 = _glorot(rng, (CONV1_OUT, 3, 3, 3), 3 * 9, CONV1_OUT * 9)
    w2 = _glorot(rng, (CONV2_OUT, CONV1_OUT, 3, 3), CONV1_OUT * 9, CONV2_OUT * 9)
    wf = _glorot(rng, (num_classes, FLAT_DIM), FLAT_DIM, num_classes)
    return ModelParams(w1=w1, b1=np.zeros(CONV1_OUT), w2=w2, b2=np.zeros(CONV2_OUT),
                       wf=wf, bf=np.zeros(num_classes))


def _softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_cached(params, x):
    z1 = kernels.conv2d_forward(x, params.w1, params.b1)
    a1 = np.maximum(z1, 0.0)
    p1, i1 = kernels.maxpool2_forward(a1)
    z2 = kernels.conv2d_forward(p1, params.w2, params.b2)
    a2 = np.maximum(z2, 0.0)
    p2, i2 = kernels.maxpool2_forward(a2)
    flat = p2.reshape(x.shape[0], FLAT_DIM)
    # per-row matvec keeps batch results bit-exact with the single path
    logits = np.empty((x.shape[0], params.num_classes))
    for i in range(x.shape[0]):
        logits[i] = params.wf @ flat[i] + params.bf
    probs = _softmax(logits)
    cache = (x, z1, i1, p1, z2, i2, flat)
    return probs, cache


def forward_batch(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Softmax scores for a batch of normalized images (N, 3, 32, 32)."""
    if x.ndim != 4 or x.shape[1:] != (3, 32, 32):
        raise ValueError(f"expected (N, 3, 32, 32) input, got {x.shape}")
    probs, _ = _forward_cached(params, np.ascontiguousarray(x, dtype=np.float64))
    return probs


def forward(params: ModelParams, image: np.ndarray) -> np.ndarray:
    """Softmax score vector for one normalized image (3, 32, 32)."""
    if image.shape != (3, 32, 32):
        raise ValueError(f"expected (3, 32, 32) image, got {image.shape}")
    return forward_batch(params, image[None])[0]


def predict(params: ModelParams, image: np.ndarray):
    """(predicted_label, scores); argmax with lowest-index tie-break."""
    scores = forward(params, image)
    return int(np.argmax(scores)), scores


def predict_batch(params: ModelParams, x: np.ndarray):
    probs = forward_batch(params, x)
    return np.argmax(probs, axis=1), probs


def _backward_from_logit_grad(params, cache, gl):
    """Backprop a (N, C) gradient at the logits down to the input.

    Returns (gx, grads) where grads maps parameter name -> gradient sum
    over the batch.
    """
    x, z1, i1, p1, z2, i2, flat = cache
    gwf = gl.T @ flat
    gbf = gl.sum(axis=0)
    gflat = gl @ params.wf
    gp2 = np.ascontiguousarray(gflat.reshape(-1, CONV2_OUT, 8, 8))
    ga2 = kernels.maxpool2_backward(i2, gp2)
    gz2 = ga2 * (z2 > 0.0)
    gp1, gw2, gb2 = kernels.conv2d_backward(p1, params.w2, gz2)
    ga1 = kernels.maxpool2_backward(i1, np.ascontiguousarray(gp1))
    gz1 = ga1 * (z1 > 0.0)
    gx, gw1, gb1 = kernels.conv2d_backward(x, params.w1, gz1)
    return gx, {"w1": gw1, "b1": gb1, "w2": gw2, "b2": gb2, "wf": gwf, "bf": gbf}


def _loss_and_grads(params, x, y):
    probs, cache = _forward_cached(params, x)
    n = x.shape[0]
    picked = probs[np.arange(n), y]
    loss_sum = -np.log(picked).sum()
    correct = int((np.argmax(probs, axis=1) == y).sum())
    gl = probs.copy()
    gl[np.arange(n), y] -= 1.0
    _, grads = _backward_from_logit_grad(params, cache, gl)
    return loss_sum, correct, grads


def train(params: ModelParams, data, cfg: TrainConfig = TrainConfig()):
    """Plain SGD on softmax cross-entropy. data: [(normalized_image, label)].

    Returns (trained_params, trace) with one {epoch, loss, accuracy} row
    per epoch. Deterministic: seeded shuffle, fixed batch order, fixed
    reduction order.
    """
    if not data:
        raise ValueError("training data is empty")
    x = np.ascontiguousarray(np.stack([img for img, _ in data]), dtype=np.float64)
    y = np.array([label for _, label in data], dtype=np.int64)
    if y.max() >= params.num_classes:
        raise ValueError(f"label {y.max()} out of range for {params.num_classes} classes")
    params = params.copy()
    rng = np.random.default_rng(cfg.seed)
    n = len(data)
    trace = []
    names = ("w1", "b1", "w2", "b2", "wf", "bf")
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        epoch_loss = 0.0
        epoch_correct = 0
        for bi, start in enumerate(range(0, n, cfg.batch_size)):
            sel = order[start:start + cfg.batch_size]
            loss_sum, correct, grads = _loss_and_grads(params, x[sel], y[sel])
            if not np.isfinite(loss_sum):
                raise DivergedError(epoch, bi)
            epoch_loss += loss_sum
            epoch_correct += correct
            scale = cfg.learning_rate / len(sel)
            for name in names:
                arr = getattr(params, name)
                arr -= scale * grads[name]
        trace.append({"epoch": epoch, "loss": float(epoch_loss) / n,
                      "accuracy": epoch_correct / n})
    return params, trace


def input_gradient(params: ModelParams, image: np.ndarray, target_class: int) -> np.ndarray:
    """Exact gradient of the post-softmax target score w.r.t. each pixel."""
    if not (0 <= target_class < params.num_classes):
        raise ValueError(f"target_class {target_class} out of range")
    x = np.ascontiguousarray(image[None], dtype=np.float64)
    probs, cache = _forward_cached(params, x)
    s = probs[0]
    # d softmax_t / d logit_j = s_t (delta_tj - s_j)
    gl = (-s[target_class] * s)[None, :]
    gl[0, target_class] += s[target_class]
    gx, _ = _backward_from_logit_grad(params, cache, gl)
    return gx[0]


def finite_diff_gradient(params: ModelParams, image: np.ndarray, target_class: int,
                         h: float = 1e-5, chunk: int = 512) -> np.ndarray:
    """Central-difference gradient of the target score, forward passes only."""
    if h <= 0:
        raise ValueError("h must be > 0")
    if not (0 <= target_class < params.num_classes):
        raise ValueError(f"target_class {target_class} out of range")
    base = np.asarray(image, dtype=np.float64)
    flat = base.ravel()
    npix = flat.size
    grad = np.empty(npix)
    for start in range(0, npix, chunk):
        idxs = np.arange(start, min(start + chunk, npix))
        batch = np.repeat(flat[None], 2 * len(idxs), axis=0)
        batch[np.arange(len(idxs)) * 2, idxs] += h
        batch[np.arange(len(idxs)) * 2 + 1, idxs] -= h
        probs = forward_batch(params, batch.reshape(-1, 3, 32, 32))
        s = probs[:, target_class]
        grad[idxs] = (s[0::2] - s[1::2]) / (2.0 * h)
    return grad.reshape(3, 32, 32)


_PARAM_ORDER = ("w1", "b1", "w2", "b2", "wf", "bf")


def save_model(params: ModelParams, path, metadata=None):
    """JSON header line (shapes + metadata) followed by the concatenated
    parameters as a flat little-endian float64 array."""
    header = {
        "order": list(_PARAM_ORDER),
        "shapes": {name: list(getattr(params, name).shape) for name in _PARAM_ORDER},
        "num_classes": params.num_classes,
        "metadata": metadata or {},
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        for name in _PARAM_ORDER:
            fh.write(np.ascontiguousarray(getattr(params, name), dtype="<f8").tobytes())


def load_model_metadata(path) -> dict:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
    return header.get("metadata", {})


def load_model(path) -> ModelParams:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        blob = fh.read()
    values = np.frombuffer(blob, dtype="<f8")
    arrays = {}
    offset = 0
    for name in header["order"]:
        shape = tuple(header["shapes"][name])
        size = int(np.prod(shape))
        arrays[name] = values[offset:offset + size].reshape(shape).astype(np.float64)
        offset += size
    if offset != values.size:
        raise ValueError(f"{path}: trailing bytes after parameters")
    return ModelParams(**arrays)

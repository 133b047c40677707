"""Vectorized numpy fallback for the hot conv/pool kernels.

Same contracts as the compiled extension (_kernels_cy): 3x3 kernels,
padding 1, float64, batched NCHW layout, and max-pool ties resolved to
the first maximum in window scan order.
"""

import numpy as np

KSIZE = 3
PAD = 1


def _im2col(x):
    cin, h, w = x.shape
    xp = np.pad(x, ((0, 0), (PAD, PAD), (PAD, PAD)))
    cols = np.empty((cin, KSIZE * KSIZE, h, w))
    for di in range(KSIZE):
        for dj in range(KSIZE):
            cols[:, di * KSIZE + dj] = xp[:, di:di + h, dj:dj + w]
    return cols.reshape(cin * KSIZE * KSIZE, h * w)


def conv2d_forward(x, w, b):
    """x: (N, Cin, H, W), w: (Cout, Cin, 3, 3), b: (Cout,) -> (N, Cout, H, W).

    Computed one sample at a time so results do not depend on how a batch
    is composed (bit-exact with the single-image path)."""
    n, cin, h, wd = x.shape
    cout = w.shape[0]
    wflat = w.reshape(cout, -1)
    y = np.empty((n, cout, h, wd))
    for i in range(n):
        cols = _im2col(x[i])
        y[i] = (wflat @ cols).reshape(cout, h, wd)
    return y + b[None, :, None, None]


def conv2d_backward(x, w, gy):
    """Gradients of a conv2d_forward call: returns (gx, gw, gb)."""
    n, cin, h, wd = x.shape
    cout = w.shape[0]
    gw = np.zeros((cout, cin * KSIZE * KSIZE))
    gxp = np.zeros((n, cin, h + 2 * PAD, wd + 2 * PAD))
    for i in range(n):
        cols = _im2col(x[i])
        gy_flat = gy[i].reshape(cout, h * wd)
        gw += gy_flat @ cols.T
        for di in range(KSIZE):
            for dj in range(KSIZE):
                t = np.tensordot(gy[i], w[:, :, di, dj], axes=([0], [0]))  # (H, W, Cin)
                gxp[i, :, di:di + h, dj:dj + wd] += t.transpose(2, 0, 1)
    gb = gy.sum(axis=(0, 2, 3))
    gx = gxp[:, :, PAD:PAD + h, PAD:PAD + wd]
    return gx, gw.reshape(w.shape), gb


def _pool_windows(x):
    n, c, h, w = x.shape
    return (x.reshape(n, c, h // 2, 2, w // 2, 2)
             .transpose(0, 1, 2, 4, 3, 5)
             .reshape(n, c, h // 2, w // 2, 4))


def maxpool2_forward(x):
    """2x2 max pool, stride 2. Returns (y, idx) where idx in [0, 4) is the
    row-major in-window position of the first maximum."""
    v = _pool_windows(x)
    idx = np.argmax(v, axis=-1).astype(np.int8)  # argmax keeps first max
    return v.max(axis=-1), idx


def maxpool2_backward(idx, gy):
    """Route gy back to the argmax positions; other positions get zero."""
    n, c, h2, w2 = gy.shape
    gv = np.zeros((n, c, h2, w2, 4))
    np.put_along_axis(gv, idx[..., None].astype(np.intp), gy[..., None], axis=-1)
    return (gv.reshape(n, c, h2, w2, 2, 2)
              .transpose(0, 1, 2, 4, 3, 5)
              .reshape(n, c, h2 * 2, w2 * 2))

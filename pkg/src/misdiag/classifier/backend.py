"""Kernel backend selection.

The compiled Cython extension is preferred when importable; the numpy
implementation is the fallback. MISDIAG_BACKEND=cython|numpy forces a
choice (cython raises if the extension is missing).
"""

import os


def _load():
    choice = os.environ.get("MISDIAG_BACKEND", "auto")
    if choice not in ("auto", "cython", "numpy"):
        raise ValueError(
            f"MISDIAG_BACKEND must be auto, cython or numpy, got {choice!r}")
    if choice in ("auto", "cython"):
        try:
            from . import _kernels_cy
            return _kernels_cy, "cython"
        except ImportError:
            if choice == "cython":
                raise
    from . import kernels_np
    return kernels_np, "numpy"


kernels, BACKEND_NAME = _load()

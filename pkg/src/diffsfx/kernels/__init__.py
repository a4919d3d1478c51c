"""Hot-loop kernels with a compiled fast path.

The GRU recurrence is the one genuinely sequential inner loop in the model
(400 time steps forward plus the same again for backpropagation), so it gets
a Cython implementation built on BLAS. Import falls back to the numpy
reference transparently; `DIFFSFX_FORCE_NUMPY=1` pins the fallback, which the
benchmark and differential tests use to compare both paths.
"""

from __future__ import annotations

import os

from . import _gru_np

if os.environ.get("DIFFSFX_FORCE_NUMPY", "") == "1":
    _impl = _gru_np
    BACKEND = "numpy"
else:
    try:
        from . import _gru_cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _gru_np
        BACKEND = "numpy"

gru_forward = _impl.gru_forward
gru_backward = _impl.gru_backward

__all__ = ["gru_forward", "gru_backward", "BACKEND"]

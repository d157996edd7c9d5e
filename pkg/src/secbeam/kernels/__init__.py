"""Evaluation kernels for the inner solver's log-barrier sweeps.

The compiled Cython kernel is preferred; a pure-numpy fallback with
identical semantics is selected when the extension is unavailable or when
``SECBEAM_KERNEL=python`` is set.  ``BACKEND`` names the active choice.
"""

import os

from .pack import PackedModel, pack_model

if os.environ.get("SECBEAM_KERNEL", "").lower() == "python":
    from . import _ref as _impl

    BACKEND = "python"
else:
    try:
        from . import _fast as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _ref as _impl

        BACKEND = "python"

eval_values = _impl.eval_values
eval_barrier = _impl.eval_barrier
eval_barrier_full = _impl.eval_barrier_full

__all__ = [
    "BACKEND",
    "PackedModel",
    "pack_model",
    "eval_values",
    "eval_barrier",
    "eval_barrier_full",
]

"""Kernel backend selection.

The compiled extension is preferred when present; setting the environment
variable ``QCORR_PURE_PYTHON=1`` forces the numpy fallback.  Both backends
expose the same functions with identical semantics.
"""

import os

from . import _kernels_py

if os.environ.get("QCORR_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _ckern as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

cc_joint_probs = _impl.cc_joint_probs
cq_blocks = _impl.cq_blocks
shannon_bits = _impl.shannon_bits

"""Search kernels with a compiled fast path.

The Cython extension is used when it was built; otherwise the pure-Python
reference is used.  Set ``SMSD_BACKEND=python`` to force the fallback
(``SMSD_BACKEND=c`` makes a missing extension an ImportError).
"""

import os

from . import _pykernels

BACKEND = "python"
_mod = _pykernels

_choice = os.environ.get("SMSD_BACKEND", "auto").lower()
if _choice not in ("auto", "c", "python"):
    raise ImportError(f"SMSD_BACKEND must be auto, c or python, not {_choice!r}")
if _choice != "python":
    try:
        from . import _ckernels as _mod  # noqa: F811
        BACKEND = "c"
    except ImportError:
        if _choice == "c":
            raise
        _mod = _pykernels

sm_rx_batch = _mod.sm_rx_batch
sm_tx_batch = _mod.sm_tx_batch
tree_batch = _mod.tree_batch


def get_backend(name):
    """Kernel module by name (``"c"`` or ``"python"``)."""
    if name == "python":
        return _pykernels
    from . import _ckernels
    return _ckernels


__all__ = ["BACKEND", "sm_rx_batch", "sm_tx_batch", "tree_batch", "get_backend"]

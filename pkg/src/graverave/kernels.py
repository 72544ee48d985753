"""Backend selection for the grid kernels.

The compiled extension is used when it was built and imports cleanly;
otherwise the pure-Python module is used. Set ``GRAVERAVE_PURE=1`` to force
the Python path.
"""

from __future__ import annotations

import os

from . import _pykernels

UNREACHABLE = _pykernels.UNREACHABLE

_impl = _pykernels
BACKEND = "python"

if os.environ.get("GRAVERAVE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

refine = _impl.refine
refine_pass = _impl.refine_pass
is_connected = _impl.is_connected
bfs_distances = _impl.bfs_distances
weighted_distances = _impl.weighted_distances

__all__ = [
    "BACKEND",
    "UNREACHABLE",
    "bfs_distances",
    "is_connected",
    "refine",
    "refine_pass",
    "weighted_distances",
]

"""Kernel backend selection.

The compiled extension ``graspdec._ckernels`` is preferred when present;
otherwise the numpy fallback is used. Override with the environment
variable ``GRASPDEC_KERNELS=py`` (force fallback) or ``=c`` (require the
extension, raising if it is missing).
"""

from __future__ import annotations

import os

from . import _kernels_py

_choice = os.environ.get("GRASPDEC_KERNELS", "auto").lower()

if _choice == "py":
    _impl = _kernels_py
elif _choice == "c":
    from . import _ckernels as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND

nearest_label_scan = _impl.nearest_label_scan
median_filter_rows = _impl.median_filter_rows
hinge_svm = _impl.hinge_svm

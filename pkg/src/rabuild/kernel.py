"""Kernel selection: compiled extension if built, pure Python otherwise.

Set ``RABUILD_PURE=1`` in the environment to force the Python kernel (used
by the benchmark and the cross-implementation tests).
"""

import os

from . import _kernel_py

if os.environ.get("RABUILD_PURE"):
    _impl = _kernel_py
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernel_py

normalize = _impl.normalize
multiply = _impl.multiply
inverse = _impl.inverse
strip_coset = _impl.strip_coset
support_mask = _impl.support_mask


def backend() -> str:
    """Name of the active kernel implementation ("c" or "python")."""
    return _impl.BACKEND


def implementations():
    """Both kernel modules when available, for equivalence tests."""
    mods = [_kernel_py]
    try:
        from . import _speedups

        mods.append(_speedups)
    except ImportError:
        pass
    return mods

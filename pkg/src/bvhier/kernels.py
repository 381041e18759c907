"""Select the compiled monomial kernels, falling back to pure Python.

Set ``BVHIER_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("BVHIER_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        from . import _kernels_py as _impl

canonicalize = _impl.canonicalize
mul = _impl.mul
left_partial = _impl.left_partial
right_partial = _impl.right_partial
z_derivative = _impl.z_derivative
replace_at = _impl.replace_at
IMPLEMENTATION = _impl.IMPLEMENTATION

__all__ = [
    "canonicalize",
    "mul",
    "left_partial",
    "right_partial",
    "z_derivative",
    "replace_at",
    "IMPLEMENTATION",
]

"""Select the kernel backend at import time.

The compiled ``_core`` extension is used when it is importable, unless the
environment variable ``LEVYFLOW_PURE_PYTHON`` is set to a non-empty value.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if not os.environ.get("LEVYFLOW_PURE_PYTHON"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

bin_accumulate = _impl.bin_accumulate
bin_indices = _impl.bin_indices
local_poly_density = _impl.local_poly_density

__all__ = ["BACKEND", "bin_accumulate", "bin_indices", "local_poly_density"]

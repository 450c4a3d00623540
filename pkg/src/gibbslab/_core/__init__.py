"""Hot numerical kernels with a compiled core and a pure-NumPy fallback.

The Cython extension is optional: if it was not built (or if
GIBBSLAB_PURE_PYTHON=1 is set) the NumPy implementations are used instead.
Both backends expose the same functions with identical semantics; the
benchmark script under benchmarks/ compares them.
"""
import os

from . import _kernels_py

BACKEND = "numpy"
_impl = _kernels_py

if os.environ.get("GIBBSLAB_PURE_PYTHON", "") != "1":
    try:
        from . import _kernels as _compiled

        _impl = _compiled
        BACKEND = "cython"
    except ImportError:
        pass

j0_array = _impl.j0_array
j1_array = _impl.j1_array
j01_arrays = _impl.j01_arrays
abs_power_mean = _impl.abs_power_mean
weighted_abs_power_sum = _impl.weighted_abs_power_sum

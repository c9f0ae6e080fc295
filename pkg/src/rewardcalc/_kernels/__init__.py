"""Hot numeric kernels with a compiled core and a pure-Python fallback.

The compiled Cython extension is preferred when it has been built; otherwise
the numpy implementation is used.  Both compute the same operations in the
same element order, so results are identical bit for bit.
"""

from . import fallback

try:
    from . import _valiter as _compiled

    BACKEND = "cython"
    value_iteration_batch = _compiled.value_iteration_batch
except ImportError:  # not built; run on the numpy fallback
    _compiled = None
    BACKEND = "fallback"
    value_iteration_batch = fallback.value_iteration_batch

__all__ = ["BACKEND", "value_iteration_batch", "fallback"]

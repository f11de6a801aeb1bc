"""Hot numerical kernels with a compiled core and a pure-Python fallback.

The fictitious-play inner loop is the one sequential, iteration-bound piece
of the package (everything else vectorizes with numpy), so it ships both as
a Cython extension and as a numpy implementation. The compiled kernel is
preferred at import time; set the environment variable VREMARKET_PURE_PYTHON
to any non-empty value to force the fallback. Both backends execute the same
arithmetic in the same order and produce bit-identical results.
"""

import os

from ._fictitious_play_py import fp_run as _fp_run_py

fp_run = _fp_run_py
BACKEND = "python"

if not os.environ.get("VREMARKET_PURE_PYTHON"):
    try:
        from ._fictitious_play_c import fp_run as _fp_run_c

        fp_run = _fp_run_c
        BACKEND = "cython"
    except ImportError:
        pass

__all__ = ["fp_run", "BACKEND"]

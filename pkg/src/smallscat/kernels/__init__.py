"""Hot pair-sum kernels with a compiled core and a numpy fallback.

The compiled extension is preferred when importable; set SMALLSCAT_FORCE_PY=1
to force the numpy backend (used by the benchmark and backend-parity tests).
"""

import os

from . import _ref

if os.environ.get("SMALLSCAT_FORCE_PY") == "1":
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _fast as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built; fall back
        _impl = _ref
        BACKEND = "python"

helm_matvec = _impl.helm_matvec
helm_eval = _impl.helm_eval
set_num_threads = _impl.set_num_threads

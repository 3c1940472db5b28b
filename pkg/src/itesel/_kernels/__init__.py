"""Hot loops for the base learners.

The compiled extension is used when it is importable; otherwise the NumPy
fallback is loaded. Set ``ITESEL_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels as python_backend

if os.environ.get("ITESEL_PURE_PYTHON", "") not in ("", "0"):
    compiled_backend = None
else:
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "compiled" if compiled_backend is not None else "python"

boost = backend.boost
predict_trees = backend.predict_trees
coordinate_descent = backend.coordinate_descent

__all__ = [
    "BACKEND_NAME",
    "backend",
    "boost",
    "compiled_backend",
    "coordinate_descent",
    "predict_trees",
    "python_backend",
]

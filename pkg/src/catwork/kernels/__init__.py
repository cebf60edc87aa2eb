"""Search kernels: compiled when available, pure Python otherwise.

Set ``CATWORK_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` reports
which one was picked at import.
"""

import os

from catwork.kernels import _pykernels as python_backend

compiled_backend = None
if os.environ.get("CATWORK_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from catwork.kernels import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend or python_backend
BACKEND = _active.BACKEND
iso_search = _active.iso_search
ef_game = _active.ef_game

__all__ = ["BACKEND", "iso_search", "ef_game", "python_backend", "compiled_backend"]

"""Hot kernels: compiled extension when available, pure Python otherwise.

Set ``FEDALLOC_PURE_PYTHON=1`` to force the fallback. ``BACKEND`` names the
module in use and ``load(name)`` returns either backend explicitly.
"""

import importlib
import os

from . import _pycore

_FORCE_PY = os.environ.get("FEDALLOC_PURE_PYTHON", "").strip() not in ("", "0")


def load(name: str):
    if name == "python":
        return _pycore
    if name == "compiled":
        return importlib.import_module("fedalloc._core._ccore")
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    try:
        load("compiled")
    except ImportError:
        return False
    return True


if _FORCE_PY:
    kernels = _pycore
    BACKEND = "python"
else:
    try:
        kernels = load("compiled")
        BACKEND = "compiled"
    except ImportError:
        kernels = _pycore
        BACKEND = "python"

__all__ = ["kernels", "BACKEND", "load", "compiled_available"]

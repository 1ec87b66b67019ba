"""Kernel backend selection.

Set ``CAUSALPROBE_DISABLE_NUMBA=1`` to force the pure-numpy path. If numba
cannot be imported the numpy path is used as well.
"""
import os
import types

from . import _numpy

KERNEL_NAMES = ("enumerate_joint", "dconnected", "cosine_argmax")


def _numba_module():
    try:
        from . import _numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        return None
    return _numba


def get_backend(name):
    """Return a namespace holding the kernels of backend ``name``."""
    if name == "numpy":
        mod = _numpy
    elif name == "numba":
        mod = _numba_module()
        if mod is None:
            raise RuntimeError("numba backend requested but numba is not importable")
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    ns = types.SimpleNamespace(name=name)
    for k in KERNEL_NAMES:
        setattr(ns, k, getattr(mod, k))
    return ns


def available_backends():
    return ("numpy", "numba") if _numba_module() is not None else ("numpy",)


def _default_backend_name():
    flag = os.environ.get("CAUSALPROBE_DISABLE_NUMBA", "").strip().lower()
    if flag in ("1", "true", "yes", "on"):
        return "numpy"
    return "numba" if _numba_module() is not None else "numpy"


kernels = get_backend(_default_backend_name())
BACKEND = kernels.name

# below this many noise configurations numba's first-call compile costs more
# than the whole vectorized numpy enumeration
SMALL_ENUMERATION = 1 << 14
_numpy_kernels = get_backend("numpy")


def enumeration_kernels(configurations: int):
    return _numpy_kernels if configurations < SMALL_ENUMERATION else kernels

"""Kernel backend selection.

The stencil transfer and compositing loops exist twice: a Cython extension
(_core) and a numpy fallback (numpy_backend) with identical signatures and
semantics.  The compiled core is used when importable unless the
AEROSPLAT_PURE_PYTHON=1 environment variable forces the fallback.
"""

import contextlib
import os

from . import numpy_backend

try:
    from . import _core
except ImportError:
    _core = None

_BACKENDS = {"numpy": numpy_backend}
if _core is not None:
    _BACKENDS["cython"] = _core

if _core is None or os.environ.get("AEROSPLAT_PURE_PYTHON") == "1":
    _active = "numpy"
else:
    _active = "cython"


def active_name():
    """Name of the backend currently serving kernel calls."""
    return _active


def available():
    """Sorted names of the importable backends."""
    return sorted(_BACKENDS)


def get_backend(name):
    """Module implementing the named backend (for benchmarks and tests)."""
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; have {available()}") from None


def set_backend(name):
    """Switch the process-wide active backend."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {available()}")
    _active = name


@contextlib.contextmanager
def use_backend(name):
    """Temporarily switch backends (test/benchmark helper)."""
    previous = _active
    set_backend(name)
    try:
        yield _BACKENDS[name]
    finally:
        set_backend(previous)


def p2g_scatter(*args):
    return _BACKENDS[_active].p2g_scatter(*args)


def grid_update(*args):
    return _BACKENDS[_active].grid_update(*args)


def scatter_forces(*args):
    return _BACKENDS[_active].scatter_forces(*args)


def g2p_gather(*args):
    return _BACKENDS[_active].g2p_gather(*args)


def composite_splats(*args):
    return _BACKENDS[_active].composite_splats(*args)

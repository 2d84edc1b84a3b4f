"""Backend selection for the stencil kernels.

Two interchangeable implementations exist: a compiled Cython module
(`_stencil`) and a pure-numpy fallback. They produce bitwise-identical
output. Selection order:

  * CHAPLAB_BACKEND=compiled  -> require the extension, error if missing
  * CHAPLAB_BACKEND=python    -> force the numpy fallback
  * CHAPLAB_BACKEND=auto / unset -> compiled if available, else fallback
"""

import os

from . import fallback

_VALID = ("auto", "compiled", "python")


def _load_compiled():
    try:
        from . import _stencil
        return _stencil
    except ImportError:
        return None


class Kernels:
    """Bundle of the five kernel entry points plus a backend label."""

    __slots__ = ("name", "rhs_axisym", "rhs_axisym_gn", "hj_axisym",
                 "rhs_cart2d", "hj_cart2d")

    def __init__(self, name, module):
        self.name = name
        self.rhs_axisym = module.rhs_axisym
        self.rhs_axisym_gn = module.rhs_axisym_gn
        self.hj_axisym = module.hj_axisym
        self.rhs_cart2d = module.rhs_cart2d
        # the 2D level-set kernel is numpy-only (shared by both backends)
        self.hj_cart2d = fallback.hj_cart2d


def select(name=None):
    """Return a Kernels bundle for the requested backend name
    (None reads CHAPLAB_BACKEND, defaulting to auto)."""
    if name is None:
        name = os.environ.get("CHAPLAB_BACKEND", "auto")
    if name not in _VALID:
        raise ValueError(
            f"unknown backend '{name}' (expected one of {_VALID})")
    if name == "python":
        return Kernels("python", fallback)
    compiled = _load_compiled()
    if compiled is not None:
        return Kernels("compiled", compiled)
    if name == "compiled":
        raise ImportError(
            "CHAPLAB_BACKEND=compiled but the extension is not built; "
            "reinstall with a C compiler or use CHAPLAB_BACKEND=python")
    return Kernels("python", fallback)


ACTIVE = select()


def backend_name():
    return ACTIVE.name

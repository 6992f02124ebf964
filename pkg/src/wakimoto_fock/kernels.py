"""Kernel selection: the compiled engine from ``_ckernels`` when built, else pure Python.

The dict-polynomial helpers are always the pure-Python ones; only
:class:`CurrentEngine`, which carries the hot loops, has a compiled variant.
Set ``WAKIMOTO_FOCK_PURE=1`` to force the pure-Python engine.
"""

import os

from ._pykernels import (  # noqa: F401
    add_scaled,
    add_term,
    eval_combo,
    mono_diff,
    mono_mul,
    mono_times_var,
    mono_times_vars,
    poly_diff,
    poly_mul,
    poly_sub,
    poly_times_var,
)
from ._pykernels import CurrentEngine as PyCurrentEngine

CompiledCurrentEngine = None
if not os.environ.get("WAKIMOTO_FOCK_PURE"):
    try:
        from ._ckernels import CurrentEngine as CompiledCurrentEngine
    except ImportError:
        CompiledCurrentEngine = None

CurrentEngine = CompiledCurrentEngine or PyCurrentEngine
IMPLEMENTATION = "compiled" if CompiledCurrentEngine is not None else "python"

__all__ = [
    "IMPLEMENTATION",
    "CurrentEngine",
    "PyCurrentEngine",
    "CompiledCurrentEngine",
    "mono_times_var",
    "mono_times_vars",
    "mono_mul",
    "mono_diff",
    "add_term",
    "add_scaled",
    "poly_mul",
    "poly_times_var",
    "poly_diff",
    "poly_sub",
    "eval_combo",
]

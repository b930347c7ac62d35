"""Kernel selection.

The compiled kernel is used when it was built; setting ``DARWINSIM_PURE=1``
forces the pure-Python implementation.  Both expose ``run_inference`` and
``run_learning`` with identical in-place array semantics:

* ``nrec``: int32 (n, 14), columns S0..S5 then TR0..TR7
* ``syn_ls``: int32 (m, 10) learning states LS0..LS9 per plastic synapse
* ``counters``: int64 [saturations, LUT clamps, cycles, instructions]
* ``fault``: int64 [first code, first index, first pc, fault count]
"""

from __future__ import annotations

import os

from . import _pykernel

FAULT_NAMES = {
    1: "illegal instruction",
    2: "runaway program",
    3: "stack overflow",
    4: "invalid context index",
    5: "jump out of program",
}

_impl = _pykernel
if not os.environ.get("DARWINSIM_PURE"):
    try:
        from . import _ckernel as _impl  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernel

IMPLEMENTATION = "compiled" if _impl is not _pykernel else "python"
run_inference = _impl.run_inference
run_learning = _impl.run_learning


def implementations():
    """All importable kernels by name (the Python one is always present)."""
    impls = {"python": _pykernel}
    try:
        from . import _ckernel

        impls["compiled"] = _ckernel
    except ImportError:  # pragma: no cover
        pass
    return impls

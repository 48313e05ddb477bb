"""Backend selection: compiled extension with pure-Python fallback.

The compiled kernels implement the same searches as
:mod:`moosolver._pykernels` with C loops; results are bit-identical
(enforced by the parity tests).  Set ``MOOSOLVER_BACKEND=python`` or
``=compiled`` to force a choice.
"""

from __future__ import annotations

import os
import warnings

from . import _pykernels

_FORCED = os.environ.get("MOOSOLVER_BACKEND", "").strip().lower()

_compiled = None
if _FORCED != "python":
    try:
        from . import _kernels as _compiled  # type: ignore
    except ImportError:
        _compiled = None
        if _FORCED == "compiled":
            raise
        warnings.warn(
            "moosolver compiled kernels unavailable; falling back to the "
            "pure-Python backend (full-game solves will be slow)",
            RuntimeWarning,
            stacklevel=2,
        )


def active_module():
    if _FORCED == "python" or _compiled is None:
        return _pykernels
    return _compiled


def backend_name() -> str:
    return active_module().NAME


def module_by_name(name: str):
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled backend not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    out = ["python"]
    if _compiled is not None:
        out.insert(0, "compiled")
    return out

"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
always available.  ``SELFSTAB_MIS_BACKEND=python|compiled`` forces a choice
(requesting the compiled backend when it is missing is an error).
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build environment
    _kernels = None

_forced = os.environ.get("SELFSTAB_MIS_BACKEND", "").strip().lower()
if _forced == "python":
    _impl = _kernels_py
elif _forced == "compiled":
    if _kernels is None:
        raise ImportError(
            "SELFSTAB_MIS_BACKEND=compiled but the extension is not built")
    _impl = _kernels
elif _forced:
    raise ImportError(f"unknown SELFSTAB_MIS_BACKEND value {_forced!r}")
else:
    _impl = _kernels if _kernels is not None else _kernels_py

BACKEND = _impl.BACKEND_NAME

step_colors = _impl.step_colors
step_levels = _impl.step_levels
run_trial_kernel = _impl.run_trial_kernel

PROC_TWO_STATE = _kernels_py.PROC_TWO_STATE
PROC_THREE_STATE = _kernels_py.PROC_THREE_STATE
PROC_THREE_COLOR = _kernels_py.PROC_THREE_COLOR
WHITE = _kernels_py.WHITE
BLACK = _kernels_py.BLACK
BLACK0 = _kernels_py.BLACK0
GRAY = _kernels_py.GRAY


def available_backends() -> list[str]:
    out = ["python"]
    if _kernels is not None:
        out.append("compiled")
    return out


def get_impl(name: str):
    """Fetch a specific backend module (for equivalence tests/benchmarks)."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _kernels is None:
            raise ValueError("compiled backend is not available")
        return _kernels
    raise ValueError(f"unknown backend {name!r}")

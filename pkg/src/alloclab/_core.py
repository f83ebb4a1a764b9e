"""Kernel selection: compiled extension when importable, numpy fallback
otherwise.  ``ALLOCLAB_FORCE_PYTHON_KERNEL=1`` forces the fallback (used by
the parity tests and the benchmark)."""

from __future__ import annotations

import os

from . import _grid_core

if os.environ.get("ALLOCLAB_FORCE_PYTHON_KERNEL") == "1":
    solve_grid_kernel = _grid_core.solve_grid_kernel
    KERNEL_NAME = _grid_core.KERNEL_NAME
else:
    try:
        from ._grid_kernel import KERNEL_NAME, solve_grid_kernel
    except ImportError:
        solve_grid_kernel = _grid_core.solve_grid_kernel
        KERNEL_NAME = _grid_core.KERNEL_NAME

__all__ = ["solve_grid_kernel", "KERNEL_NAME"]

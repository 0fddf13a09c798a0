"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the pure
Python kernel is used.  Set BELLSIM_KERNEL=python or BELLSIM_KERNEL=compiled
to force a backend (forcing "compiled" raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _kernel  # type: ignore[attr-defined]
except ImportError:
    _kernel = None

_forced = os.environ.get("BELLSIM_KERNEL", "").strip().lower()
if _forced == "python":
    KERNEL_BACKEND = "python"
elif _forced == "compiled":
    if _kernel is None:
        raise ImportError(
            "BELLSIM_KERNEL=compiled but the bellsim._kernel extension is not built"
        )
    KERNEL_BACKEND = "compiled"
elif _forced:
    raise ValueError(f"BELLSIM_KERNEL must be 'python' or 'compiled', got {_forced!r}")
else:
    KERNEL_BACKEND = "compiled" if _kernel is not None else "python"

simulate_slots = (
    _kernel.simulate_slots if KERNEL_BACKEND == "compiled" else _kernel_py.simulate_slots
)

"""Backend selection for the hot numeric kernels.

Set GASKET_SOLENOID_BACKEND=numpy to force the pure-numpy fallbacks,
=numba to require the jitted kernels, or leave unset/auto to use numba
whenever it imports.  The flag is read per call so benchmarks and tests can
flip it without reloading modules.
"""

from __future__ import annotations

import os

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

ENV_VAR = "GASKET_SOLENOID_BACKEND"


def use_numba() -> bool:
    mode = os.environ.get(ENV_VAR, "auto").strip().lower()
    if mode in ("numpy", "fallback"):
        return False
    if mode == "numba":
        if not HAS_NUMBA:
            raise RuntimeError(f"{ENV_VAR}=numba but numba is not importable")
        return True
    if mode in ("", "auto"):
        return HAS_NUMBA
    raise ValueError(f"{ENV_VAR}={mode!r}; expected auto, numba or numpy")


def backend_name() -> str:
    return "numba" if use_numba() else "numpy"

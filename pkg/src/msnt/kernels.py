"""Kernel backend selection.

The residual hot path (state recovery + face flux assembly) has two
implementations with identical contracts:

  * msnt._kernels_cy  -- Cython extension, built at install time when a
                         toolchain is available
  * msnt._kernels_py  -- pure numpy, always available

Selection happens once at import.  The environment variable MSNT_KERNEL
overrides it: "compiled" insists on the extension (ImportError if missing),
"python" forces the fallback, "auto" (default) prefers the extension.
Diagnostics helpers (face_velocity_data, theta_energy_mean) always come from
the numpy backend; they run once per accepted step, not per Newton iteration.
"""

import os

from . import _kernels_py

# always-available helpers
theta_energy_mean = _kernels_py.theta_energy_mean
face_velocity_data = _kernels_py.face_velocity_data


def _select():
    choice = os.environ.get("MSNT_KERNEL", "auto").lower()
    if choice not in ("auto", "compiled", "python"):
        raise ValueError(f"MSNT_KERNEL must be auto|compiled|python, got {choice!r}")
    if choice == "python":
        return _kernels_py
    try:
        from . import _kernels_cy
        return _kernels_cy
    except ImportError:
        if choice == "compiled":
            raise
        return _kernels_py


_impl = _select()

recover_states = _impl.recover_states
face_fluxes = _impl.face_fluxes


def backend_name():
    """Name of the active hot-kernel backend ("compiled" or "python")."""
    return _impl.BACKEND_NAME


def available_backends():
    names = ["python"]
    try:
        from . import _kernels_cy  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Fetch a specific backend module (for tests and benchmarks)."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels_cy
        return _kernels_cy
    raise ValueError(f"unknown backend {name!r}")

"""Backend selection for the replicate kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``EMPCP_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy implementation is used. ``BACKEND`` names the choice.
"""
from __future__ import annotations

import os

from . import _kernels_py

_force_py = os.environ.get("EMPCP_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

check_profiles = _impl.check_profiles
hat_profiles = _impl.hat_profiles
sim_profiles = _impl.sim_profiles


def get_backend(name: str):
    """Return the kernel module called ``name`` (``"cython"`` or ``"python"``)."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    out = ["python"]
    try:
        from . import _kernels  # noqa: F401
        out.insert(0, "cython")
    except ImportError:
        pass
    return out

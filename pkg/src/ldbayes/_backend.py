"""Selection between the compiled kernels and the numpy fallback.

The compiled extension is preferred when importable; set the environment
variable LDBAYES_BACKEND=python to force the fallback, or call
:func:`use` at runtime (mainly for benchmarks and backend-equivalence
tests).
"""

import os

from . import _kernels_py

_active = None


def _autodetect():
    if os.environ.get("LDBAYES_BACKEND", "").lower() == "python":
        return _kernels_py
    try:
        from . import _kernels

        return _kernels
    except ImportError:
        return _kernels_py


def kernels():
    """The active kernel module."""
    global _active
    if _active is None:
        _active = _autodetect()
    return _active


def use(name: str):
    """Force a backend: 'compiled', 'python', or 'auto'."""
    global _active
    if name == "python":
        _active = _kernels_py
    elif name == "compiled":
        from . import _kernels

        _active = _kernels
    elif name == "auto":
        _active = _autodetect()
    else:
        raise ValueError(f"unknown backend {name!r}")
    return _active


def compiled_available() -> bool:
    try:
        from . import _kernels  # noqa: F401

        return True
    except ImportError:
        return False

"""Sampling-backend registry and import-time selection.

Two batch kernels implement the same draw contract: a compiled Cython
extension (fast path) and a vectorized numpy fallback that is always
available.  The scalar "reference" loop in ``events`` is registered as a
third, slow backend for cross-validation.  Selection order: the
``SOFTPAIR_BACKEND`` environment variable if set, else "cython" when the
extension imported, else "numpy".
"""

from __future__ import annotations

import os

from .errors import ParameterError
from . import _kernel_py

_KERNELS = {"numpy": _kernel_py.run_kernel}

try:
    from . import _kernel_cy
except ImportError:
    _kernel_cy = None
else:
    _KERNELS["cython"] = _kernel_cy.run_kernel

_ENV_VAR = "SOFTPAIR_BACKEND"


def available_backends() -> tuple[str, ...]:
    """Backend names usable on this install, fastest first."""
    names = []
    if "cython" in _KERNELS:
        names.append("cython")
    names.append("numpy")
    names.append("reference")
    return tuple(names)


def default_backend() -> str:
    env = os.environ.get(_ENV_VAR)
    if env:
        if env not in available_backends():
            raise ParameterError(
                f"{_ENV_VAR}={env!r} is not an available backend {available_backends()}"
            )
        return env
    return "cython" if "cython" in _KERNELS else "numpy"


def resolve_name(name: str | None) -> str:
    if name is None:
        return default_backend()
    if name not in available_backends():
        raise ParameterError(f"unknown backend {name!r}; available: {available_backends()}")
    return name


def get_kernel(name: str):
    return _KERNELS[name]


def backend_name() -> str:
    """The backend ``generate_batch`` will use right now by default."""
    return default_backend()

"""Kernel backend selection.

The compiled Cython kernels are used when importable; otherwise the numpy
fallback is used. Set ``SYMHAM_KERNELS=python`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("SYMHAM_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

pauli_matrix = _impl.pauli_matrix
apply_pauli_sum = _impl.apply_pauli_sum
pauli_sum_matrix = _impl.pauli_sum_matrix


def get_backend(name):
    """Return the kernel module for ``name`` ('cython' or 'python')."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")

"""Hot elementwise kernels with a compiled fast path.

The Cython extension is optional: setting ``BSQ_PURE=1`` in the
environment, or running from a tree where the extension was never
built, selects the numpy reference implementation instead. Both
backends produce bit-identical results; ``benchmarks/kernel_bench.py``
compares their speed.
"""

import os
from contextlib import contextmanager

import numpy as np

from . import pyref

try:
    from . import _cyk
except ImportError:  # pure-python install
    _cyk = None


def _default_impl():
    if os.environ.get("BSQ_PURE"):
        return pyref
    return _cyk if _cyk is not None else pyref


_impl = _default_impl()


def backend():
    """Name of the active backend: "cython" or "numpy"."""
    return _impl.BACKEND


def available_backends():
    names = ["numpy"]
    if _cyk is not None:
        names.append("cython")
    return tuple(names)


@contextmanager
def use_backend(name):
    """Temporarily force a backend (used by tests and benchmarks)."""
    global _impl
    table = {"numpy": pyref, "cython": _cyk}
    if name not in table or table[name] is None:
        raise ValueError(f"backend {name!r} is not available")
    previous = _impl
    _impl = table[name]
    try:
        yield
    finally:
        _impl = previous


def advect_combine(u1, u2, g1, g2):
    """u1*g1 + u2*g2 for real n-by-n arrays."""
    out = np.empty_like(u1)
    _impl.advect_combine(u1, u2, g1, g2, out)
    return out


def mul_mask(c, m):
    """Complex coefficients times a real multiplier array."""
    out = np.empty_like(c)
    _impl.mul_mask(c, m, out)
    return out


def mul_mask_stack(c, masks):
    """One coefficient array against a stack of real multipliers."""
    out = np.empty(masks.shape, dtype=np.complex128)
    _impl.mul_mask_stack(c, masks, out)
    return out


def mul_ik(c, k):
    """(i*k) * c: derivative multiplier with a real wavenumber array."""
    out = np.empty_like(c)
    _impl.mul_ik(c, k, out)
    return out


def axpy(y, a, k):
    """y + a*k for complex arrays and real scalar a."""
    out = np.empty_like(y)
    _impl.axpy(y, a, k, out)
    return out


def rk4_combine(y, k1, k2, k3, k4, dt):
    """Classical Runge-Kutta update y + dt/6*(k1 + 2k2 + 2k3 + k4)."""
    out = np.empty_like(y)
    _impl.rk4_combine(y, k1, k2, k3, k4, dt, out)
    return out

"""Numpy reference implementations of the hot kernels.

Operation order per element matches the compiled versions exactly, so
the two backends agree bit for bit on finite inputs.
"""

import numpy as np

BACKEND = "numpy"


def advect_combine(u1, u2, g1, g2, out):
    np.multiply(u1, g1, out=out)
    out += u2 * g2


def mul_mask(c, m, out):
    np.multiply(c, m, out=out)


def mul_mask_stack(c, masks, out):
    np.multiply(c[None, :, :], masks, out=out)


def mul_ik(c, k, out):
    out.real = -k * c.imag
    out.imag = k * c.real


def axpy(y, a, k, out):
    np.multiply(k, a, out=out)
    out += y


def rk4_combine(y, k1, k2, k3, k4, dt, out):
    np.add(k1, 2.0 * k2, out=out)
    out += 2.0 * k3
    out += k4
    out *= dt / 6.0
    out += y

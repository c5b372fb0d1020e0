"""Pure-numpy fallback for the hot elementwise kernels.

Mirrors the compiled extension's interface; arrays may be complex128 or
clongdouble, always 1D contiguous views of the stepping state.
"""

import numpy as np


def mul_inplace(a, b):
    np.multiply(a, b, out=a)


def nonlinear_phase_inplace(a, coef):
    """a *= exp(1j * coef * |a|^2), angle evaluated in long double."""
    m2 = (a.real.astype(np.longdouble)) ** 2 + (a.imag.astype(np.longdouble)) ** 2
    theta = np.longdouble(coef) * m2
    phase = (np.cos(theta) + 1j * np.sin(theta)).astype(a.dtype, copy=False)
    np.multiply(a, phase, out=a)


def first_nonfinite(a):
    """Index of the first non-finite entry, or -1 when all are finite."""
    bad = ~np.isfinite(a)
    if not bad.any():
        return -1
    return int(np.flatnonzero(bad)[0])

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled elementwise kernels for the split-step inner loop.

Same interface as _kernels_py; operates in place on 1D contiguous
complex128 or clongdouble buffers. The nonlinear phase evaluates its
angle in long double regardless of the buffer precision.
"""

ctypedef fused cplx:
    double complex
    long double complex

cdef extern from "<complex.h>" nogil:
    long double complex cexpl(long double complex)
    long double creall(long double complex)
    long double cimagl(long double complex)

cdef extern from "<math.h>" nogil:
    bint isfinite(long double)


def mul_inplace(cplx[::1] a, cplx[::1] b):
    cdef Py_ssize_t i, n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError("length mismatch")
    with nogil:
        for i in range(n):
            a[i] = a[i] * b[i]


def nonlinear_phase_inplace(cplx[::1] a, long double coef):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef long double re, im
    cdef long double complex ph
    with nogil:
        for i in range(n):
            re = a[i].real
            im = a[i].imag
            ph = cexpl(1j * (coef * (re * re + im * im)))
            a[i] = <cplx> (a[i] * ph)


def first_nonfinite(cplx[::1] a):
    cdef Py_ssize_t i, n = a.shape[0]
    with nogil:
        for i in range(n):
            if not (isfinite(a[i].real) and isfinite(a[i].imag)):
                with gil:
                    return i
    return -1

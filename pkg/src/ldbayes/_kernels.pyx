# cython: language_level=3
"""Compiled inner loops: forward partition recursion and path stepping.

Bit-identical to the numpy fallback in _kernels_py: the recursion reduces
states with the same sequential two-term log-add-exp (numpy's formula),
and the sampler uses the same right-bisection rule on cumulative rows.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, log1p

cnp.import_array()

COMPILED = True

cdef double LN2 = 0.6931471805599453094172321214581766


cdef inline double _logaddexp(double x, double y) nogil:
    cdef double tmp
    if x == y:
        # matches numpy: handles equal finite values and equal infinities
        return x + LN2
    tmp = x - y
    if tmp > 0:
        return x + log1p(exp(-tmp))
    elif tmp <= 0:
        return y + log1p(exp(tmp))
    return x + y  # propagate NaN


def dp_log_partition(
    const double[::1] alpha0,
    const double[:, ::1] klift,
    const cnp.int64_t[:, ::1] xcode,
    const double[:, ::1] ltable,
    const cnp.int64_t[::1] ystep,
    cnp.int64_t size,
    cnp.int64_t nrest,
    const cnp.int64_t[::1] record_steps,
):
    """See _kernels_py.dp_log_partition; same contract, compiled."""
    cdef cnp.int64_t n = size * nrest
    cdef cnp.int64_t nsteps = ystep.shape[0]
    cdef cnp.int64_t nrec = record_steps.shape[0]
    cdef cnp.ndarray[double, ndim=1] a_arr = np.array(alpha0, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] b_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out_arr = np.empty(nrec, dtype=np.float64)
    cdef double[::1] a_view = a_arr
    cdef double[::1] b_view = b_arr
    cdef double[::1] out = out_arr
    cdef double* pa = &a_view[0] if n > 0 else NULL
    cdef double* pb = &b_view[0] if n > 0 else NULL
    cdef double* pt
    cdef cnp.int64_t j, f, rest, s, yc, state, ptr = 0
    cdef double acc, w

    with nogil:
        for j in range(nsteps):
            yc = ystep[j]
            for rest in range(nrest):
                for s in range(size):
                    acc = -INFINITY
                    for f in range(size):
                        state = f * nrest + rest
                        # parenthesized to match the fallback's precomputed table
                        w = pa[state] + (klift[state, s] - ltable[xcode[state, s], yc])
                        acc = _logaddexp(acc, w)
                    pb[rest * size + s] = acc
            pt = pa
            pa = pb
            pb = pt
            while ptr < nrec and record_steps[ptr] == j:
                acc = -INFINITY
                for state in range(n):
                    acc = _logaddexp(acc, pa[state])
                out[ptr] = acc
                ptr += 1
    return out_arr


def markov_path(
    const double[:, ::1] cum_kernel,
    cnp.int64_t ctx0,
    const double[::1] uniforms,
    cnp.int64_t size,
    cnp.int64_t nctx,
):
    """See _kernels_py.markov_path; same contract, compiled."""
    cdef cnp.int64_t m = uniforms.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] sym_arr = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] symbols = sym_arr
    cdef cnp.int64_t i, s, ctx = ctx0
    cdef double u
    with nogil:
        for i in range(m):
            u = uniforms[i]
            s = 0
            while s < size - 1 and u >= cum_kernel[ctx, s]:
                s += 1
            symbols[i] = s
            ctx = (ctx * size + s) % nctx
    return sym_arr

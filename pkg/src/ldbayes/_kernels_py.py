"""Pure-numpy fallback for the compiled kernels.

Semantics match ldbayes._kernels operation for operation: the forward
partition recursion uses the same sequential two-term log-add-exp
reduction order, and the path sampler uses the same right-bisection rule,
so both backends agree to the last bit on identical inputs.
"""

import numpy as np

COMPILED = False


def dp_log_partition(alpha0, klift, xcode, ltable, ystep, size, nrest, record_steps):
    """Forward log-space partition recursion over width-W symbol windows.

    alpha0 : (size * nrest,) initial log weights (W-block mass minus the
        losses of the windows interior to the initial block).
    klift : (size * nrest, size) log transition weights per state.
    xcode : (size * nrest, size) loss-table row index per (state, symbol).
    ltable : (n_x_words, n_y_words) loss table.
    ystep : (nsteps,) loss-table column per appended symbol.
    record_steps : sorted step indices; after processing step j equal to an
        entry, the log-sum over states is appended to the output.
    """
    a = np.asarray(alpha0, dtype=float).copy()
    out = np.empty(len(record_steps))
    ptr = 0
    nsteps = len(ystep)
    for j in range(nsteps):
        tab = klift - ltable[xcode, ystep[j]]
        m = a.reshape(size, nrest)[:, :, None] + tab.reshape(size, nrest, size)
        a = np.logaddexp.reduce(m, axis=0).ravel()
        while ptr < len(record_steps) and record_steps[ptr] == j:
            out[ptr] = np.logaddexp.reduce(a)
            ptr += 1
    return out


def markov_path(cum_kernel, ctx0, uniforms, size, nctx):
    """Symbol path from pre-drawn uniforms via right bisection per row."""
    m = len(uniforms)
    symbols = np.empty(m, dtype=np.int64)
    ctx = int(ctx0)
    for i in range(m):
        s = int(np.searchsorted(cum_kernel[ctx], uniforms[i], side="right"))
        if s >= size:
            s = size - 1
        symbols[i] = s
        ctx = (ctx * size + s) % nctx
    return symbols

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fiber-scaling kernel: the hot loop of the balancing sweep.

Mirrors the contract of ``_kernels_py.scale_fibers``; one fused pass
computes fiber sums, checks feasibility and rescales, without the
temporaries the vectorized fallback allocates.
"""

NAME = "compiled"


def scale_fibers(double[:, :, ::1] x, const double[:, ::1] target, double[::1] scratch):
    """Scale each fiber ``x[b, :, a]`` in place so it sums to ``target[b, a]``.

    ``scratch`` must hold at least ``x.shape[2]`` doubles. Returns -1 on
    success, or the row-major flat index ``b * A + a`` of the first fiber
    with zero sum but positive target (buffer contents then unspecified).
    """
    cdef Py_ssize_t B = x.shape[0]
    cdef Py_ssize_t n = x.shape[1]
    cdef Py_ssize_t A = x.shape[2]
    cdef Py_ssize_t b, i, a
    cdef double s

    if target.shape[0] != B or target.shape[1] != A:
        raise ValueError("target shape does not match the fiber view")
    if scratch.shape[0] < A:
        raise ValueError("scratch buffer too small")

    for b in range(B):
        for a in range(A):
            scratch[a] = 0.0
        for i in range(n):
            for a in range(A):
                scratch[a] += x[b, i, a]
        for a in range(A):
            s = scratch[a]
            if s > 0.0:
                scratch[a] = target[b, a] / s
            elif target[b, a] > 0.0:
                return b * A + a
            else:
                scratch[a] = 1.0
        for i in range(n):
            for a in range(A):
                x[b, i, a] *= scratch[a]
    return -1

"""Pure-NumPy fallback for the fiber-scaling kernel.

Same contract as the compiled extension in ``_kernels.pyx``; used when the
extension is not built. Kernel functions operate on raw float64 arrays,
never on the Tensor wrapper.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def scale_fibers(x, target, scratch=None):
    """Scale each fiber ``x[b, :, a]`` in place so it sums to ``target[b, a]``.

    ``x`` has shape (B, n, A) and ``target`` shape (B, A). Fibers whose
    current sum is zero are left untouched when their target is also zero
    (the multiplicative convention: scale 1). Returns -1 on success;
    otherwise the row-major flat index ``b * A + a`` of the first fiber
    with zero sum but positive target, in which case the buffer contents
    are unspecified. ``scratch`` is accepted for signature parity with the
    compiled kernel and ignored.
    """
    sums = x.sum(axis=1)
    dead = sums == 0.0
    infeasible = dead & (target > 0.0)
    if infeasible.any():
        return int(np.flatnonzero(infeasible)[0])
    scale = np.divide(target, sums, out=np.ones_like(sums), where=~dead)
    x *= scale[:, None, :]
    return -1

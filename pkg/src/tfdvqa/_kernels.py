"""Compiled inner loops for the derivative sweep."""
import numba
import numpy as np


@numba.njit(cache=True, fastmath=False)
def _rotate_rows(work, nrows, xmask, phase, c, s):
    """In place ``e^{i angle P}`` on ``work[:nrows]`` given ``c = cos``, ``s = sin``."""
    dim = work.shape[1]
    isn = 1j * s
    if xmask == 0:
        for r in range(nrows):
            for k in range(dim):
                work[r, k] = (c + isn * phase[k]) * work[r, k]
        return
    for r in range(nrows):
        for k in range(dim):
            p = k ^ xmask
            if p > k:
                a = work[r, k]
                b = work[r, p]
                work[r, k] = c * a + isn * phase[k] * b
                work[r, p] = c * b + isn * phase[p] * a


@numba.njit(cache=True)
def tangent_sweep(work, xmasks, phases, theta):
    """Fill ``work[0]`` with psi and ``work[k+1]`` with d psi / d theta_k.

    ``work[0]`` must hold the initial state on entry.
    """
    dim = work.shape[1]
    for k in range(theta.shape[0]):
        x = xmasks[k]
        ph = phases[k]
        for j in range(dim):
            work[k + 1, j] = 1j * ph[j] * work[0, x ^ j]
        t = theta[k]
        if t != 0.0:
            _rotate_rows(work, k + 2, x, ph, np.cos(t), np.sin(t))

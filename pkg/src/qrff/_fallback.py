"""Pure-Python versions of the quantizer inner loops.

Mirror images of the routines in ``_native.pyx``: same arithmetic, same
operation order, so results are bit-equal to the compiled backend. They are
much slower (Python-level loops) and exist so the package works without the
extension and so the compiled core can be cross-checked.
"""

from __future__ import annotations

import math


def _msq(w: float, half_levels: int) -> float:
    j = math.floor(w * (2 * half_levels - 1) / 2.0)
    if j < -half_levels:
        j = -half_levels
    elif j > half_levels - 1:
        j = half_levels - 1
    return (2.0 * j + 1.0) / (2 * half_levels - 1)


def sd1(y, half_levels, u0, q, u):
    m = y.shape[0]
    state = float(u0)
    max_abs = 0.0
    reach = (2.0 * half_levels) / (2 * half_levels - 1) + 1e-12
    clipped = False
    for i in range(m):
        w = y[i] + state
        if abs(w) > reach:
            clipped = True
        qi = _msq(w, half_levels)
        q[i] = qi
        state = w - qi
        u[i] = state
        if abs(state) > max_abs:
            max_abs = abs(state)
    return max_abs, clipped


def sd_filtered(y, half_levels, h_tail, q, v):
    m = y.shape[0]
    taps = h_tail.shape[0]
    max_abs = 0.0
    reach = (2.0 * half_levels) / (2 * half_levels - 1) + 1e-12
    clipped = False
    for i in range(m):
        acc = 0.0
        for j in range(1, taps + 1):
            if i - j >= 0:
                acc += h_tail[j - 1] * v[i - j]
        w = acc + y[i]
        if abs(w) > reach:
            clipped = True
        qi = _msq(w, half_levels)
        q[i] = qi
        v[i] = w - qi
        if abs(v[i]) > max_abs:
            max_abs = abs(v[i])
    return max_abs, clipped


def beta_run(y, half_levels, beta, block_len, q, u):
    m = y.shape[0]
    state = 0.0
    max_abs = 0.0
    reach = (2.0 * half_levels) / (2 * half_levels - 1) + 1e-12
    clipped = False
    for i in range(m):
        if i % block_len == 0:
            state = 0.0
        w = y[i] + beta * state
        if abs(w) > reach:
            clipped = True
        qi = _msq(w, half_levels)
        q[i] = qi
        state = w - qi
        u[i] = state
        if abs(state) > max_abs:
            max_abs = abs(state)
    return max_abs, clipped

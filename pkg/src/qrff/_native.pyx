# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the sequential noise-shaping recursions.

Each function mirrors a routine in ``qrff._fallback`` and must stay
arithmetically identical to it (same operations, same order), so the two
backends produce bit-equal output.
"""

from libc.math cimport fabs, floor


cdef inline double _msq(double w, int half_levels) nogil:
    # Nearest level of the midrise alphabet {odd a / (2K-1)}, ties toward +inf,
    # inputs beyond the range clip to the nearest extreme.
    cdef double j = floor(w * (2 * half_levels - 1) / 2.0)
    if j < -half_levels:
        j = -half_levels
    elif j > half_levels - 1:
        j = half_levels - 1
    return (2.0 * j + 1.0) / (2 * half_levels - 1)


def sd1(double[::1] y, int half_levels, double u0,
        double[::1] q, double[::1] u):
    """First-order state recursion. Returns (max |u_i|, clipped flag)."""
    cdef Py_ssize_t i, m = y.shape[0]
    cdef double w, state = u0, max_abs = 0.0
    cdef double reach = (2.0 * half_levels) / (2 * half_levels - 1) + 1e-12
    cdef bint clipped = False
    with nogil:
        for i in range(m):
            w = y[i] + state
            if fabs(w) > reach:
                clipped = True
            q[i] = _msq(w, half_levels)
            state = w - q[i]
            u[i] = state
            if fabs(state) > max_abs:
                max_abs = fabs(state)
    return max_abs, clipped


def sd_filtered(double[::1] y, int half_levels, double[::1] h_tail,
                double[::1] q, double[::1] v):
    """General noise-shaping recursion v_i = (h*v)_i + y_i - q_i.

    ``h_tail`` holds h_1..h_L (h_0 is structurally zero). Returns
    (max |v_i|, clipped flag).
    """
    cdef Py_ssize_t i, j, m = y.shape[0], taps = h_tail.shape[0]
    cdef double w, acc, max_abs = 0.0
    cdef double reach = (2.0 * half_levels) / (2 * half_levels - 1) + 1e-12
    cdef bint clipped = False
    with nogil:
        for i in range(m):
            acc = 0.0
            for j in range(1, taps + 1):
                if i - j >= 0:
                    acc += h_tail[j - 1] * v[i - j]
            w = acc + y[i]
            if fabs(w) > reach:
                clipped = True
            q[i] = _msq(w, half_levels)
            v[i] = w - q[i]
            if fabs(v[i]) > max_abs:
                max_abs = fabs(v[i])
    return max_abs, clipped


def beta_run(double[::1] y, int half_levels, double beta, Py_ssize_t block_len,
             double[::1] q, double[::1] u):
    """Block recursion u_i = y_i + beta*u_{i-1} - q_i, state reset per block.

    Returns (max |u_i|, clipped flag).
    """
    cdef Py_ssize_t i, m = y.shape[0]
    cdef double w, state = 0.0, max_abs = 0.0
    cdef double reach = (2.0 * half_levels) / (2 * half_levels - 1) + 1e-12
    cdef bint clipped = False
    with nogil:
        for i in range(m):
            if i % block_len == 0:
                state = 0.0
            w = y[i] + beta * state
            if fabs(w) > reach:
                clipped = True
            q[i] = _msq(w, half_levels)
            state = w - q[i]
            u[i] = state
            if fabs(state) > max_abs:
                max_abs = fabs(state)
    return max_abs, clipped

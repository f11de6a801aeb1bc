# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fictitious-play inner loop.

Mirrors kernels._fictitious_play_py.fp_run step for step: same update
order, same lowest-index tie-breaking, bit-identical floating point.
"""


def fp_run(double[:, ::1] payoff_row, double[:, ::1] payoff_col,
           double[::1] row_cum, double[::1] col_cum,
           double[::1] row_counts, double[::1] col_counts,
           long iterations):
    cdef Py_ssize_t n = row_cum.shape[0]
    cdef Py_ssize_t m = col_cum.shape[0]
    cdef Py_ssize_t i, a, b
    cdef long t
    cdef double best

    a = b = -1
    for t in range(iterations):
        a = 0
        best = row_cum[0]
        for i in range(1, n):
            if row_cum[i] > best:
                best = row_cum[i]
                a = i
        b = 0
        best = col_cum[0]
        for i in range(1, m):
            if col_cum[i] > best:
                best = col_cum[i]
                b = i
        row_counts[a] += 1.0
        col_counts[b] += 1.0
        for i in range(n):
            row_cum[i] += payoff_row[i, b]
        for i in range(m):
            col_cum[i] += payoff_col[i, a]
    return a, b

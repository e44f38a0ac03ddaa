# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dynamic-programming kernels.

Every sequence is a C-contiguous ``(n, dim)`` float64 array. With
``discrete`` set, column 0 holds symbol codes and the ground distance is
the 0/1 metric; otherwise it is the Euclidean norm of the difference.
"""

import numpy as np

from libc.math cimport sqrt, INFINITY
from libc.stdlib cimport malloc, free

cdef enum:
    EUCLIDEAN = 0
    HAMMING = 1
    LEVENSHTEIN = 2
    ERP = 3
    DFD = 4
    DTW = 5

BACKEND = "cython"


cdef inline double _ground(const double[:, ::1] a, Py_ssize_t i,
                           const double[:, ::1] b, Py_ssize_t j,
                           bint discrete) noexcept nogil:
    cdef Py_ssize_t k
    cdef double s = 0.0, t
    if discrete:
        return 0.0 if a[i, 0] == b[j, 0] else 1.0
    for k in range(a.shape[1]):
        t = a[i, k] - b[j, k]
        s += t * t
    return sqrt(s)


cdef inline double _gap(const double[:, ::1] a, Py_ssize_t i,
                        const double[::1] g, bint discrete) noexcept nogil:
    cdef Py_ssize_t k
    cdef double s = 0.0, t
    if discrete:
        return 0.0 if a[i, 0] == g[0] else 1.0
    for k in range(a.shape[1]):
        t = a[i, k] - g[k]
        s += t * t
    return sqrt(s)


cdef inline bint _same(const double[:, ::1] a, Py_ssize_t i,
                       const double[:, ::1] b, Py_ssize_t j) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(a.shape[1]):
        if a[i, k] != b[j, k]:
            return False
    return True


cdef inline double _min3(double x, double y, double z) noexcept nogil:
    if y < x:
        x = y
    if z < x:
        x = z
    return x


cdef double _euclidean(const double[:, ::1] a, const double[:, ::1] b,
                       bint discrete) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0, t
    for i in range(a.shape[0]):
        t = _ground(a, i, b, i, discrete)
        s += t * t
    return sqrt(s)


cdef double _hamming(const double[:, ::1] a, const double[:, ::1] b) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(a.shape[0]):
        if not _same(a, i, b, i):
            s += 1.0
    return s


cdef double _edit_family(int kind, const double[:, ::1] a, const double[:, ::1] b,
                         const double[::1] g, bint discrete) noexcept nogil:
    # Levenshtein and ERP share the gap-aware recurrence; rows are rolled.
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], i, j
    cdef double *prev
    cdef double *cur
    cdef double *tmp
    cdef double sub, dela, insb, out
    prev = <double *> malloc((m + 1) * sizeof(double))
    cur = <double *> malloc((m + 1) * sizeof(double))
    prev[0] = 0.0
    for j in range(1, m + 1):
        if kind == LEVENSHTEIN:
            prev[j] = prev[j - 1] + 1.0
        else:
            prev[j] = prev[j - 1] + _gap(b, j - 1, g, discrete)
    for i in range(1, n + 1):
        if kind == LEVENSHTEIN:
            dela = 1.0
        else:
            dela = _gap(a, i - 1, g, discrete)
        cur[0] = prev[0] + dela
        for j in range(1, m + 1):
            if kind == LEVENSHTEIN:
                sub = 0.0 if _same(a, i - 1, b, j - 1) else 1.0
                insb = 1.0
            else:
                sub = _ground(a, i - 1, b, j - 1, discrete)
                insb = _gap(b, j - 1, g, discrete)
            cur[j] = _min3(prev[j - 1] + sub, prev[j] + dela, cur[j - 1] + insb)
        tmp = prev
        prev = cur
        cur = tmp
    out = prev[m]
    free(prev)
    free(cur)
    return out


cdef double _coupling_family(int kind, const double[:, ::1] a, const double[:, ::1] b,
                             bint discrete) noexcept nogil:
    # DFD takes the max along the coupling path, DTW the sum.
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], i, j
    cdef double *prev
    cdef double *cur
    cdef double *tmp
    cdef double c, best, out
    prev = <double *> malloc(m * sizeof(double))
    cur = <double *> malloc(m * sizeof(double))
    for i in range(n):
        for j in range(m):
            c = _ground(a, i, b, j, discrete)
            if i == 0 and j == 0:
                best = 0.0
            elif i == 0:
                best = cur[j - 1]
            elif j == 0:
                best = prev[j]
            else:
                best = _min3(prev[j - 1], prev[j], cur[j - 1])
            if kind == DFD:
                cur[j] = c if c > best else best
            else:
                cur[j] = c + best
        tmp = prev
        prev = cur
        cur = tmp
    out = prev[m - 1]
    free(prev)
    free(cur)
    return out


cdef double _dispatch(int kind, const double[:, ::1] a, const double[:, ::1] b,
                      const double[::1] g, bint discrete) noexcept nogil:
    if kind == EUCLIDEAN:
        return _euclidean(a, b, discrete)
    if kind == HAMMING:
        return _hamming(a, b)
    if kind == LEVENSHTEIN or kind == ERP:
        return _edit_family(kind, a, b, g, discrete)
    return _coupling_family(kind, a, b, discrete)


def distance(int kind, const double[:, ::1] a, const double[:, ::1] b,
             const double[::1] gap, bint discrete):
    """Distance of ``kind`` between two already-validated arrays."""
    return _dispatch(kind, a, b, gap, discrete)


def one_to_many(int kind, const double[:, ::1] q, const double[:, :, ::1] windows,
                const double[::1] gap, bint discrete):
    """Distances from ``q`` to each ``windows[k]``; returns a float64 array."""
    cdef Py_ssize_t k, count = windows.shape[0]
    out = np.empty(count, dtype=np.float64)
    cdef double[::1] view = out
    with nogil:
        for k in range(count):
            view[k] = _dispatch(kind, q, windows[k], gap, discrete)
    return out


def prefix_matrix(int kind, const double[:, ::1] a, const double[:, ::1] b,
                  const double[::1] g, bint discrete):
    """``out[i, j]`` is the distance between ``a[:i+1]`` and ``b[:j+1]``.

    Equal-length kinds only fill the diagonal; other cells are ``inf``.
    """
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], i, j
    cdef double s = 0.0, t, sub, dela, insb, c, best
    out = np.full((n, m), np.inf)
    cdef double[:, ::1] o = out
    cdef double[:, ::1] D
    if n == 0 or m == 0:
        return out
    with nogil:
        if kind == EUCLIDEAN or kind == HAMMING:
            for i in range(n if n < m else m):
                if kind == EUCLIDEAN:
                    t = _ground(a, i, b, i, discrete)
                    s += t * t
                    o[i, i] = sqrt(s)
                else:
                    if not _same(a, i, b, i):
                        s += 1.0
                    o[i, i] = s
    if kind == LEVENSHTEIN or kind == ERP:
        full = np.empty((n + 1, m + 1))
        D = full
        with nogil:
            D[0, 0] = 0.0
            for j in range(1, m + 1):
                if kind == LEVENSHTEIN:
                    D[0, j] = D[0, j - 1] + 1.0
                else:
                    D[0, j] = D[0, j - 1] + _gap(b, j - 1, g, discrete)
            for i in range(1, n + 1):
                if kind == LEVENSHTEIN:
                    dela = 1.0
                else:
                    dela = _gap(a, i - 1, g, discrete)
                D[i, 0] = D[i - 1, 0] + dela
                for j in range(1, m + 1):
                    if kind == LEVENSHTEIN:
                        sub = 0.0 if _same(a, i - 1, b, j - 1) else 1.0
                        insb = 1.0
                    else:
                        sub = _ground(a, i - 1, b, j - 1, discrete)
                        insb = _gap(b, j - 1, g, discrete)
                    D[i, j] = _min3(D[i - 1, j - 1] + sub, D[i - 1, j] + dela, D[i, j - 1] + insb)
                    o[i - 1, j - 1] = D[i, j]
    elif kind == DFD or kind == DTW:
        with nogil:
            for i in range(n):
                for j in range(m):
                    c = _ground(a, i, b, j, discrete)
                    if i == 0 and j == 0:
                        best = 0.0
                    elif i == 0:
                        best = o[i, j - 1]
                    elif j == 0:
                        best = o[i - 1, j]
                    else:
                        best = _min3(o[i - 1, j - 1], o[i - 1, j], o[i, j - 1])
                    if kind == DFD:
                        o[i, j] = c if c > best else best
                    else:
                        o[i, j] = c + best
    return out

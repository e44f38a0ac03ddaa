"""Pure-Python twin of the compiled kernels.

Same signatures and semantics as ``_kernels.pyx``; used when the extension
is not built or when ``SEQNET_PURE=1`` is set.
"""

import math

import numpy as np

EUCLIDEAN, HAMMING, LEVENSHTEIN, ERP, DFD, DTW = range(6)

BACKEND = "python"


def _rows(arr):
    return [tuple(r) for r in np.asarray(arr).tolist()]


def _ground(x, y, discrete):
    if discrete:
        return 0.0 if x[0] == y[0] else 1.0
    return math.dist(x, y)


def _euclidean(a, b, discrete):
    return math.sqrt(sum(_ground(x, y, discrete) ** 2 for x, y in zip(a, b)))


def _hamming(a, b):
    return float(sum(1 for x, y in zip(a, b) if x != y))


def _edit_family(kind, a, b, g, discrete):
    m = len(b)
    if kind == LEVENSHTEIN:
        gap_b = [1.0] * m
    else:
        gap_b = [_ground(y, g, discrete) for y in b]
    prev = [0.0] * (m + 1)
    for j in range(1, m + 1):
        prev[j] = prev[j - 1] + gap_b[j - 1]
    for x in a:
        dela = 1.0 if kind == LEVENSHTEIN else _ground(x, g, discrete)
        cur = [prev[0] + dela] + [0.0] * m
        for j in range(1, m + 1):
            y = b[j - 1]
            if kind == LEVENSHTEIN:
                sub = 0.0 if x == y else 1.0
            else:
                sub = _ground(x, y, discrete)
            cur[j] = min(prev[j - 1] + sub, prev[j] + dela, cur[j - 1] + gap_b[j - 1])
        prev = cur
    return prev[m]


def _coupling_family(kind, a, b, discrete):
    m = len(b)
    is_dfd = kind == DFD
    prev = None
    for i, x in enumerate(a):
        cur = [0.0] * m
        for j in range(m):
            c = _ground(x, b[j], discrete)
            if i == 0 and j == 0:
                best = 0.0
            elif i == 0:
                best = cur[j - 1]
            elif j == 0:
                best = prev[j]
            else:
                best = min(prev[j - 1], prev[j], cur[j - 1])
            cur[j] = max(c, best) if is_dfd else c + best
        prev = cur
    return prev[m - 1]


def _dispatch(kind, a, b, g, discrete):
    if kind == EUCLIDEAN:
        return _euclidean(a, b, discrete)
    if kind == HAMMING:
        return _hamming(a, b)
    if kind in (LEVENSHTEIN, ERP):
        return _edit_family(kind, a, b, g, discrete)
    return _coupling_family(kind, a, b, discrete)


def distance(kind, a, b, gap, discrete):
    """Distance of ``kind`` between two already-validated arrays."""
    return _dispatch(kind, _rows(a), _rows(b), tuple(np.asarray(gap).tolist()), discrete)


def one_to_many(kind, q, windows, gap, discrete):
    """Distances from ``q`` to each ``windows[k]``; returns a float64 array."""
    qa = _rows(q)
    g = tuple(np.asarray(gap).tolist())
    return np.array([_dispatch(kind, qa, _rows(w), g, discrete) for w in windows],
                    dtype=np.float64)


def prefix_matrix(kind, a, b, gap, discrete):
    """``out[i, j]`` is the distance between ``a[:i+1]`` and ``b[:j+1]``.

    Equal-length kinds only fill the diagonal; other cells are ``inf``.
    """
    A, B = _rows(a), _rows(b)
    g = tuple(np.asarray(gap).tolist())
    n, m = len(A), len(B)
    out = np.full((n, m), np.inf)
    if n == 0 or m == 0:
        return out
    if kind in (EUCLIDEAN, HAMMING):
        s = 0
        for i in range(min(n, m)):
            if kind == EUCLIDEAN:
                s += _ground(A[i], B[i], discrete) ** 2
                out[i, i] = math.sqrt(s)
            else:
                s += 1 if A[i] != B[i] else 0
                out[i, i] = float(s)
    elif kind in (LEVENSHTEIN, ERP):
        # same recurrence as _edit_family, keeping every row
        if kind == LEVENSHTEIN:
            gap_b = [1.0] * m
        else:
            gap_b = [_ground(y, g, discrete) for y in B]
        prev = [0.0] * (m + 1)
        for j in range(1, m + 1):
            prev[j] = prev[j - 1] + gap_b[j - 1]
        for i, x in enumerate(A):
            dela = 1.0 if kind == LEVENSHTEIN else _ground(x, g, discrete)
            cur = [prev[0] + dela] + [0.0] * m
            for j in range(1, m + 1):
                y = B[j - 1]
                sub = (0.0 if x == y else 1.0) if kind == LEVENSHTEIN else _ground(x, y, discrete)
                cur[j] = min(prev[j - 1] + sub, prev[j] + dela, cur[j - 1] + gap_b[j - 1])
            out[i] = cur[1:]
            prev = cur
    else:
        for i, x in enumerate(A):
            for j in range(m):
                c = _ground(x, B[j], discrete)
                if i == 0 and j == 0:
                    best = 0.0
                elif i == 0:
                    best = out[i, j - 1]
                elif j == 0:
                    best = out[i - 1, j]
                else:
                    best = min(out[i - 1, j - 1], out[i - 1, j], out[i, j - 1])
                out[i, j] = max(c, best) if kind == DFD else c + best
    return out

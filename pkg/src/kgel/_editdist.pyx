# cython: boundscheck=False, wraparound=False
"""Compiled edit-distance kernel. Semantics match kgel._editdist_py exactly."""

from libc.stdlib cimport free, malloc


def levenshtein(str a, str b):
    """Unit-cost Levenshtein distance over Unicode characters."""
    if a == b:
        return 0
    cdef Py_ssize_t la = len(a), lb = len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    if lb > la:
        a, b = b, a
        la, lb = lb, la

    cdef Py_ssize_t *prev = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *curr = <Py_ssize_t *> malloc((lb + 1) * sizeof(Py_ssize_t))
    if prev == NULL or curr == NULL:
        free(prev)
        free(curr)
        raise MemoryError()

    cdef Py_ssize_t i, j, cost, best, tmp_v
    cdef Py_ssize_t *tmp
    cdef Py_UCS4 ca
    try:
        for j in range(lb + 1):
            prev[j] = j
        for i in range(1, la + 1):
            curr[0] = i
            ca = a[i - 1]
            for j in range(1, lb + 1):
                cost = 0 if ca == <Py_UCS4> b[j - 1] else 1
                best = prev[j] + 1
                tmp_v = curr[j - 1] + 1
                if tmp_v < best:
                    best = tmp_v
                tmp_v = prev[j - 1] + cost
                if tmp_v < best:
                    best = tmp_v
                curr[j] = best
            tmp = prev
            prev = curr
            curr = tmp
        return prev[lb]
    finally:
        free(prev)
        free(curr)

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled matching kernels; see ``_pykernels`` for the reference semantics."""

from libc.stdlib cimport malloc, free

import numpy as np

NAME = "cython"

DEF MAX_N = 16


cdef extern from *:
    int __builtin_ctz(unsigned int x) nogil


cdef inline int _lowbit(unsigned int x) nogil:
    return __builtin_ctz(x)


cdef inline int _eidx(int n, int u, int v) nogil:
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


cdef int _walk(unsigned int mask, int* choice, int n, int* out) nogil:
    cdef int k = 0, i, j
    while mask:
        i = _lowbit(mask)
        j = choice[mask]
        if j < 0:
            mask &= ~(1u << i)
        else:
            out[k] = _eidx(n, i, j)
            k += 1
            mask &= ~((1u << i) | (1u << j))
    return k


cdef int _lex_less(int* a, int na, int* b, int nb) nogil:
    cdef int t = 0
    while t < na and t < nb:
        if a[t] != b[t]:
            return a[t] < b[t]
        t += 1
    return na < nb


def max_weight_matching(int n, weights):
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef unsigned int size = 1u << n
    cdef unsigned int mask, rest, bits
    cdef int i, j, ch, base, na, nb
    cdef double val, cand
    cdef int la[MAX_N]
    cdef int lb[MAX_N]
    cdef double* best = <double*> malloc(size * sizeof(double))
    cdef int* choice = <int*> malloc(size * sizeof(int))
    if best == NULL or choice == NULL:
        free(best)
        free(choice)
        raise MemoryError()
    try:
        with nogil:
            best[0] = 0.0
            choice[0] = -1
            for mask in range(1, size):
                i = _lowbit(mask)
                rest = mask & ~(1u << i)
                val = best[rest]
                ch = -1
                base = i * (2 * n - i - 1) // 2 - i - 1
                bits = rest
                while bits:
                    j = _lowbit(bits)
                    bits &= bits - 1
                    cand = w[base + j] + best[rest & ~(1u << j)]
                    if cand > val:
                        val = cand
                        ch = j
                    elif cand == val:
                        choice[mask] = j
                        na = _walk(mask, choice, n, la)
                        choice[mask] = ch
                        nb = _walk(mask, choice, n, lb)
                        if _lex_less(la, na, lb, nb):
                            ch = j
                best[mask] = val
                choice[mask] = ch
            na = _walk(size - 1, choice, n, la)
        return [la[t] for t in range(na)]
    finally:
        free(best)
        free(choice)


def greedy_matching(int n, weights, double threshold=-np.inf):
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    # stable sort on -w keeps index order among equal weights
    cdef long long[::1] order = np.argsort(-np.asarray(w), kind="stable").astype(np.int64)
    cdef int m = w.shape[0]
    cdef int t, e, u, v, k = 0
    cdef char* used = <char*> malloc(n * sizeof(char))
    cdef int* eu = <int*> malloc(m * sizeof(int))
    cdef int* ev = <int*> malloc(m * sizeof(int))
    if used == NULL or eu == NULL or ev == NULL:
        free(used)
        free(eu)
        free(ev)
        raise MemoryError()
    picked = []
    try:
        for u in range(n):
            used[u] = 0
            for v in range(u + 1, n):
                eu[k] = u
                ev[k] = v
                k += 1
        for t in range(m):
            e = <int> order[t]
            if not (w[e] > 0.0 and w[e] >= threshold):
                break
            u = eu[e]
            v = ev[e]
            if not used[u] and not used[v]:
                used[u] = 1
                used[v] = 1
                picked.append(e)
    finally:
        free(used)
        free(eu)
        free(ev)
    picked.sort()
    return picked

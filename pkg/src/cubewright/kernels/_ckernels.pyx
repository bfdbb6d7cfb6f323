# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hash-aggregate over dictionary-encoded coordinates."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

cnp.import_array()


cdef tuple _aggregate(const int64_t[:, :] coords, const int64_t[:] weights, bint weighted,
                      const int64_t[:, :] maps, bint mapped, const int64_t[:] radices):
    cdef Py_ssize_t n = coords.shape[0]
    cdef Py_ssize_t d = coords.shape[1]
    cdef Py_ssize_t i, j
    cdef int64_t key, c
    cdef bint dropped
    cdef unordered_map[int64_t, Py_ssize_t] slots
    cdef unordered_map[int64_t, Py_ssize_t].iterator it
    cdef vector[int64_t] keys
    cdef vector[int64_t] sums

    slots.reserve(1024)
    for i in range(n):
        key = 0
        dropped = False
        for j in range(d):
            c = coords[i, j]
            if mapped:
                c = maps[j, c]
                if c < 0:
                    dropped = True
                    break
            key = key * radices[j] + c
        if dropped:
            continue
        it = slots.find(key)
        if it == slots.end():
            slots[key] = keys.size()
            keys.push_back(key)
            sums.push_back(weights[i] if weighted else 1)
        else:
            sums[slots[key]] += weights[i] if weighted else 1

    out_keys = np.empty(keys.size(), dtype=np.int64)
    out_sums = np.empty(keys.size(), dtype=np.int64)
    cdef int64_t[:] ok = out_keys
    cdef int64_t[:] os = out_sums
    for i in range(<Py_ssize_t>keys.size()):
        ok[i] = keys[i]
        os[i] = sums[i]
    return out_keys.tolist(), out_sums.tolist()


def count_codes(codes, radices):
    c = np.ascontiguousarray(codes, dtype=np.int64)
    r = np.ascontiguousarray(radices, dtype=np.int64)
    if c.ndim != 2 or c.shape[1] != r.shape[0]:
        raise ValueError("codes must be (rows, dims) matching radices")
    dummy_w = np.zeros(1, dtype=np.int64)
    dummy_m = np.zeros((1, 1), dtype=np.int64)
    return _aggregate(c, dummy_w, False, dummy_m, False, r)


def remap_sum(coords, counts, maps, radices):
    c = np.ascontiguousarray(coords, dtype=np.int64)
    w = np.ascontiguousarray(counts, dtype=np.int64)
    m = np.ascontiguousarray(maps, dtype=np.int64)
    r = np.ascontiguousarray(radices, dtype=np.int64)
    if c.ndim != 2 or c.shape[1] != r.shape[0] or m.shape[0] != r.shape[0] or w.shape[0] != c.shape[0]:
        raise ValueError("shape mismatch between coords, counts, maps and radices")
    if c.shape[0] and m.shape[1] <= c.max(initial=0):
        raise ValueError("a coordinate exceeds its map")
    return _aggregate(c, w, True, m, True, r)

# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled monomial kernels; mirrors ``_kernels_py`` exactly."""

from libc.stdlib cimport malloc, free

IMPLEMENTATION = "cython"

ctypedef long long code_t


cdef inline tuple _pack(code_t* buf, Py_ssize_t n):
    cdef list out = [None] * n
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = buf[i]
    return tuple(out)


cdef int _sort(code_t* items, Py_ssize_t n):
    """In-place insertion sort; returns the Koszul sign or 0."""
    cdef int sign = 1
    cdef Py_ssize_t i, j
    cdef code_t cur
    for i in range(1, n):
        cur = items[i]
        j = i - 1
        while j >= 0 and items[j] > cur:
            if (cur & 1) and (items[j] & 1):
                sign = -sign
            items[j + 1] = items[j]
            j -= 1
        items[j + 1] = cur
    for i in range(1, n):
        if items[i] == items[i - 1] and (items[i] & 1):
            return 0
    return sign


def canonicalize(seq):
    cdef Py_ssize_t n = len(seq), i
    if n == 0:
        return 1, ()
    cdef code_t* buf = <code_t*> malloc(n * sizeof(code_t))
    try:
        for i in range(n):
            buf[i] = seq[i]
        sign = _sort(buf, n)
        if sign == 0:
            return 0, ()
        return sign, _pack(buf, n)
    finally:
        free(buf)


def mul(tuple a, tuple b):
    cdef Py_ssize_t na = len(a), nb = len(b), i = 0, j = 0, k = 0
    if na == 0:
        return 1, b
    if nb == 0:
        return 1, a
    cdef code_t* buf = <code_t*> malloc((na + nb) * sizeof(code_t))
    cdef int sign = 1
    cdef int odd_left = 0
    cdef code_t x, y
    try:
        for i in range(na):
            odd_left += <int>((<code_t>a[i]) & 1)
        i = 0
        while i < na and j < nb:
            x = a[i]
            y = b[j]
            if x < y or (x == y and not (x & 1)):
                buf[k] = x
                odd_left -= <int>(x & 1)
                i += 1
            elif x == y:
                return 0, ()
            else:
                if (y & 1) and (odd_left & 1):
                    sign = -sign
                buf[k] = y
                j += 1
            k += 1
        while i < na:
            buf[k] = a[i]
            i += 1
            k += 1
        while j < nb:
            buf[k] = b[j]
            j += 1
            k += 1
        return sign, _pack(buf, k)
    finally:
        free(buf)


def left_partial(tuple f, code_t g):
    cdef Py_ssize_t n = len(f), idx, k
    cdef int odd_before = 0
    cdef int mult
    cdef code_t x
    for idx in range(n):
        x = f[idx]
        if x == g:
            rest = f[:idx] + f[idx + 1:]
            if g & 1:
                return (-1 if odd_before & 1 else 1), rest
            mult = 1
            k = idx + 1
            while k < n and <code_t>f[k] == g:
                mult += 1
                k += 1
            return mult, rest
        odd_before += <int>(x & 1)
    return 0, ()


def right_partial(tuple f, code_t g):
    cdef Py_ssize_t n = len(f), idx, k
    cdef int odd_after
    cdef int mult
    for idx in range(n):
        if <code_t>f[idx] == g:
            rest = f[:idx] + f[idx + 1:]
            if g & 1:
                odd_after = 0
                for k in range(idx + 1, n):
                    odd_after += <int>((<code_t>f[k]) & 1)
                return (-1 if odd_after & 1 else 1), rest
            mult = 1
            k = idx + 1
            while k < n and <code_t>f[k] == g:
                mult += 1
                k += 1
            return mult, rest
    return 0, ()


def z_derivative(tuple f, code_t step, code_t frozen_from):
    cdef Py_ssize_t n = len(f), idx, i
    cdef list out = []
    cdef code_t x, prev = -1
    cdef int sign
    if n == 0:
        return out
    cdef code_t* buf = <code_t*> malloc(n * sizeof(code_t))
    try:
        for idx in range(n):
            x = f[idx]
            if x >= frozen_from:
                continue
            if x == prev and not (x & 1):
                last = len(out) - 1
                c, mono = out[last]
                out[last] = (c + 1, mono)
                continue
            prev = x
            for i in range(n):
                buf[i] = f[i]
            buf[idx] = x + step
            sign = _sort(buf, n)
            if sign:
                out.append((sign, _pack(buf, n)))
        return out
    finally:
        free(buf)


def replace_at(tuple f, Py_ssize_t idx, code_t new):
    return canonicalize(f[:idx] + (new,) + f[idx + 1:])

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Walsh-Hadamard butterfly (hot-kernel backend)."""

cimport cython


cpdef hadamard_inplace(double[::1] a):
    """In-place natural-order Hadamard transform of a power-of-two array."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t h = 1
    cdef Py_ssize_t base, j
    cdef double x, y
    with nogil:
        while h < n:
            base = 0
            while base < n:
                for j in range(base, base + h):
                    x = a[j]
                    y = a[j + h]
                    a[j] = x + y
                    a[j + h] = x - y
                base += 2 * h
            h *= 2
    return a.base if a.base is not None else a

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: chain products, prefix/suffix stacks, traces.

Small matrices (dim <= 8) use a naive triple loop, which beats any BLAS
call at that size; larger ones go straight to BLAS zgemm without the
Python-level dispatch cost of numpy's matmul.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

ctypedef double complex cplx

DEF NAIVE_MAX = 8


cdef void _matmul(const cplx[:, ::1] a, const cplx[:, ::1] b, cplx[:, ::1] out) noexcept nogil:
    cdef int n = <int> a.shape[0]
    cdef Py_ssize_t i, j, k
    cdef cplx acc
    cdef cplx alpha = 1, beta = 0
    if n <= NAIVE_MAX:
        for i in range(n):
            for j in range(n):
                acc = 0
                for k in range(n):
                    acc = acc + a[i, k] * b[k, j]
                out[i, j] = acc
        return
    # zgemm is column-major; compute out^T = b^T @ a^T by swapping the
    # operands, which is exactly out = a @ b on our row-major arrays.
    zgemm("N", "N", &n, &n, &n, &alpha,
          <cplx*> &b[0, 0], &n, <cplx*> &a[0, 0], &n,
          &beta, &out[0, 0], &n)


def chain_product(cnp.ndarray[cplx, ndim=3, mode="c"] mats):
    """Product of a (k, N, N) stack with the first matrix acting first:
    result = mats[k-1] @ ... @ mats[0]."""
    cdef Py_ssize_t k = mats.shape[0]
    cdef Py_ssize_t n = mats.shape[1]
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] out = np.eye(n, dtype=complex)
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] tmp = np.empty((n, n), dtype=complex)
    cdef cplx[:, ::1] out_v = out, tmp_v = tmp
    cdef cplx[:, :, ::1] mats_v = mats
    cdef Py_ssize_t i
    for i in range(k):
        _matmul(mats_v[i], out_v, tmp_v)
        out_v, tmp_v = tmp_v, out_v
    if k % 2 == 1:
        return tmp
    return out


def prefix_suffix(cnp.ndarray[cplx, ndim=3, mode="c"] mats):
    """Running products of a (k, N, N) stack.

    prefix[i] = mats[i-1] @ ... @ mats[0]  (prefix[0] = I)
    suffix[i] = mats[k-1] @ ... @ mats[i]  (suffix[k] = I)
    """
    cdef Py_ssize_t k = mats.shape[0]
    cdef Py_ssize_t n = mats.shape[1]
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] prefix = np.empty((k + 1, n, n), dtype=complex)
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] suffix = np.empty((k + 1, n, n), dtype=complex)
    cdef cplx[:, :, ::1] pre_v = prefix, suf_v = suffix, mats_v = mats
    cdef Py_ssize_t i, j
    prefix[0] = np.eye(n)
    suffix[k] = np.eye(n)
    with nogil:
        for i in range(k):
            _matmul(mats_v[i], pre_v[i], pre_v[i + 1])
        for i in range(k - 1, -1, -1):
            _matmul(suf_v[i + 1], mats_v[i], suf_v[i])
    return prefix, suffix


def trace_product(cnp.ndarray[cplx, ndim=2, mode="c"] a,
                  cnp.ndarray[cplx, ndim=2, mode="c"] b):
    """tr(a @ b) without forming the product."""
    cdef Py_ssize_t n = a.shape[0]
    cdef cplx[:, ::1] a_v = a, b_v = b
    cdef cplx acc = 0
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(n):
                acc = acc + a_v[i, j] * b_v[j, i]
    return complex(acc)


def sandwich(cnp.ndarray[cplx, ndim=2, mode="c"] left,
             cnp.ndarray[cplx, ndim=2, mode="c"] mid,
             cnp.ndarray[cplx, ndim=2, mode="c"] right):
    """left @ mid @ right."""
    cdef Py_ssize_t n = left.shape[0]
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] tmp = np.empty((n, n), dtype=complex)
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] out = np.empty((n, n), dtype=complex)
    cdef cplx[:, ::1] left_v = left, mid_v = mid, right_v = right
    cdef cplx[:, ::1] tmp_v = tmp, out_v = out
    with nogil:
        _matmul(mid_v, right_v, tmp_v)
        _matmul(left_v, tmp_v, out_v)
    return out

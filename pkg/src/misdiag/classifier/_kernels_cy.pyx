# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled conv/pool kernels; contract mirrors kernels_np exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def conv2d_forward(cnp.ndarray x_arr, cnp.ndarray w_arr, cnp.ndarray b_arr):
    cdef double[:, :, :, ::1] x = np.ascontiguousarray(x_arr, dtype=np.float64)
    cdef double[:, :, :, ::1] w = np.ascontiguousarray(w_arr, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_arr, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], cin = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t cout = w.shape[0]
    y_arr = np.empty((n, cout, h, wd), dtype=np.float64)
    cdef double[:, :, :, ::1] y = y_arr
    cdef Py_ssize_t ni, o, c, i, j, di, dj, i0, i1, j0, j1
    cdef double wv, bias
    # shift-accumulate: contiguous inner loops over j for both x and y
    for ni in range(n):
        for o in range(cout):
            bias = b[o]
            for i in range(h):
                for j in range(wd):
                    y[ni, o, i, j] = bias
            for c in range(cin):
                for di in range(3):
                    i0 = 1 - di if di == 0 else 0
                    i1 = h + 1 - di if di == 2 else h
                    for dj in range(3):
                        j0 = 1 - dj if dj == 0 else 0
                        j1 = wd + 1 - dj if dj == 2 else wd
                        wv = w[o, c, di, dj]
                        for i in range(i0, i1):
                            for j in range(j0, j1):
                                y[ni, o, i, j] += wv * x[ni, c, i + di - 1, j + dj - 1]
    return y_arr


def conv2d_backward(cnp.ndarray x_arr, cnp.ndarray w_arr, cnp.ndarray gy_arr):
    cdef double[:, :, :, ::1] x = np.ascontiguousarray(x_arr, dtype=np.float64)
    cdef double[:, :, :, ::1] w = np.ascontiguousarray(w_arr, dtype=np.float64)
    cdef double[:, :, :, ::1] gy = np.ascontiguousarray(gy_arr, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], cin = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t cout = w.shape[0]
    gx_arr = np.zeros((n, cin, h, wd), dtype=np.float64)
    gw_arr = np.zeros((cout, cin, 3, 3), dtype=np.float64)
    gb_arr = np.zeros(cout, dtype=np.float64)
    cdef double[:, :, :, ::1] gx = gx_arr
    cdef double[:, :, :, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr
    cdef Py_ssize_t ni, o, c, i, j, di, dj, i0, i1, j0, j1
    cdef double wv, acc
    for ni in range(n):
        for o in range(cout):
            for i in range(h):
                for j in range(wd):
                    gb[o] += gy[ni, o, i, j]
            for c in range(cin):
                for di in range(3):
                    i0 = 1 - di if di == 0 else 0
                    i1 = h + 1 - di if di == 2 else h
                    for dj in range(3):
                        j0 = 1 - dj if dj == 0 else 0
                        j1 = wd + 1 - dj if dj == 2 else wd
                        wv = w[o, c, di, dj]
                        acc = 0.0
                        for i in range(i0, i1):
                            for j in range(j0, j1):
                                acc += gy[ni, o, i, j] * x[ni, c, i + di - 1, j + dj - 1]
                                gx[ni, c, i + di - 1, j + dj - 1] += wv * gy[ni, o, i, j]
                        gw[o, c, di, dj] += acc
    return gx_arr, gw_arr, gb_arr


def maxpool2_forward(cnp.ndarray x_arr):
    cdef double[:, :, :, ::1] x = np.ascontiguousarray(x_arr, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t h2 = h // 2, w2 = wd // 2
    y_arr = np.empty((n, c, h2, w2), dtype=np.float64)
    idx_arr = np.empty((n, c, h2, w2), dtype=np.int8)
    cdef double[:, :, :, ::1] y = y_arr
    cdef signed char[:, :, :, ::1] idx = idx_arr
    cdef Py_ssize_t ni, ci, i, j, dr, dc
    cdef double best, v
    cdef signed char bidx
    for ni in range(n):
        for ci in range(c):
            for i in range(h2):
                for j in range(w2):
                    best = x[ni, ci, 2 * i, 2 * j]
                    bidx = 0
                    for dr in range(2):
                        for dc in range(2):
                            v = x[ni, ci, 2 * i + dr, 2 * j + dc]
                            if v > best:  # strictly greater: first max wins ties
                                best = v
                                bidx = <signed char>(2 * dr + dc)
                    y[ni, ci, i, j] = best
                    idx[ni, ci, i, j] = bidx
    return y_arr, idx_arr


def maxpool2_backward(cnp.ndarray idx_arr, cnp.ndarray gy_arr):
    cdef signed char[:, :, :, ::1] idx = np.ascontiguousarray(idx_arr, dtype=np.int8)
    cdef double[:, :, :, ::1] gy = np.ascontiguousarray(gy_arr, dtype=np.float64)
    cdef Py_ssize_t n = gy.shape[0], c = gy.shape[1], h2 = gy.shape[2], w2 = gy.shape[3]
    gx_arr = np.zeros((n, c, h2 * 2, w2 * 2), dtype=np.float64)
    cdef double[:, :, :, ::1] gx = gx_arr
    cdef Py_ssize_t ni, ci, i, j
    cdef signed char b
    for ni in range(n):
        for ci in range(c):
            for i in range(h2):
                for j in range(w2):
                    b = idx[ni, ci, i, j]
                    gx[ni, ci, 2 * i + (b >> 1), 2 * j + (b & 1)] = gy[ni, ci, i, j]
    return gx_arr

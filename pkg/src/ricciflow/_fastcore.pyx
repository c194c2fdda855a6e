# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-face geometry kernels (see _purecore for the contract)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport acos, sqrt

cnp.import_array()

BACKEND_NAME = "cython"


def face_geometry(ell):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ell_arr = \
        np.ascontiguousarray(ell, dtype=np.float64)
    cdef Py_ssize_t nf = ell_arr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] angles = np.empty((nf, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] areas = np.empty(nf)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cots = np.empty((nf, 3))
    cdef double a, b, c, lo, md, hi, tmp, area, q, d0, d1, d2, r
    cdef Py_ssize_t f

    for f in range(nf):
        a = ell_arr[f, 0]
        b = ell_arr[f, 1]
        c = ell_arr[f, 2]

        hi = a; md = b; lo = c
        if md > hi: tmp = hi; hi = md; md = tmp
        if lo > md: tmp = md; md = lo; lo = tmp
        if md > hi: tmp = hi; hi = md; md = tmp
        area = 0.25 * sqrt((hi + (md + lo)) * (lo - (hi - md))
                           * (lo + (hi - md)) * (hi + (md - lo)))
        areas[f] = area

        d0 = b * b + c * c - a * a
        d1 = c * c + a * a - b * b
        d2 = a * a + b * b - c * c

        r = d0 / (2.0 * b * c)
        if r > 1.0: r = 1.0
        elif r < -1.0: r = -1.0
        angles[f, 0] = acos(r)
        r = d1 / (2.0 * c * a)
        if r > 1.0: r = 1.0
        elif r < -1.0: r = -1.0
        angles[f, 1] = acos(r)
        r = d2 / (2.0 * a * b)
        if r > 1.0: r = 1.0
        elif r < -1.0: r = -1.0
        angles[f, 2] = acos(r)

        q = 1.0 / (4.0 * area)
        cots[f, 0] = d0 * q
        cots[f, 1] = d1 * q
        cots[f, 2] = d2 * q

    return angles, areas, cots


def face_areas(ell):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ell_arr = \
        np.ascontiguousarray(ell, dtype=np.float64)
    cdef Py_ssize_t nf = ell_arr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] areas = np.empty(nf)
    cdef double lo, md, hi, tmp
    cdef Py_ssize_t f

    for f in range(nf):
        hi = ell_arr[f, 0]; md = ell_arr[f, 1]; lo = ell_arr[f, 2]
        if md > hi: tmp = hi; hi = md; md = tmp
        if lo > md: tmp = md; md = lo; lo = tmp
        if md > hi: tmp = hi; hi = md; md = tmp
        areas[f] = 0.25 * sqrt((hi + (md + lo)) * (lo - (hi - md))
                               * (lo + (hi - md)) * (hi + (md - lo)))
    return areas


def vertex_sums(faces, angles, areas, nv):
    cdef cnp.ndarray[cnp.int64_t, ndim=2] faces_arr = \
        np.ascontiguousarray(faces, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ang = \
        np.ascontiguousarray(angles, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ar = \
        np.ascontiguousarray(areas, dtype=np.float64)
    cdef Py_ssize_t nf = faces_arr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] angle_sum = np.zeros(int(nv))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] area_sum = np.zeros(int(nv))
    cdef Py_ssize_t f, c

    # angles corner-major, areas face-major: same order as the numpy fallback
    for c in range(3):
        for f in range(nf):
            angle_sum[faces_arr[f, c]] += ang[f, c]
    for f in range(nf):
        for c in range(3):
            area_sum[faces_arr[f, c]] += ar[f]
    return angle_sum, area_sum


def edge_cot_weights(face_edges, cots, ne):
    cdef cnp.ndarray[cnp.int64_t, ndim=2] fe = \
        np.ascontiguousarray(face_edges, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ct = \
        np.ascontiguousarray(cots, dtype=np.float64)
    cdef Py_ssize_t nf = fe.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.zeros(int(ne))
    cdef Py_ssize_t f, c

    for f in range(nf):
        for c in range(3):
            w[fe[f, c]] += 0.5 * ct[f, c]
    return w

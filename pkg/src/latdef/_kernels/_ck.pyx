# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython kernel backend: d=2/3 point enumeration and fused compensated sums.

Mirrors the contract of ``_pyk`` (lexicographic enumeration order, descending
input order for sums). Accumulation is Neumaier-compensated.
"""
import math

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, fabs, pow, sqrt

from ..errors import CapExceeded

cnp.import_array()

BACKEND = "cython"

W_NONE = 0
W_PARITY = 1
W_COS = 2

F_GAUSS = 0
F_POWER = 1
F_YUK = 2
F_LJ = 3

cdef enum:
    C_GAUSS = 0
    C_POWER = 1
    C_YUK = 2
    C_LJ = 3


def _box(basis, center, r2max):
    binv = np.linalg.inv(basis)
    m0 = -binv @ center
    row_norms = np.linalg.norm(binv, axis=1)
    r = math.sqrt(max(r2max, 0.0))
    lo = np.ceil(m0 - r * row_norms - 1e-12).astype(np.int64)
    hi = np.floor(m0 + r * row_norms + 1e-12).astype(np.int64)
    return lo, hi


def ball_points(basis, center, double r2max, cap):
    basis = np.ascontiguousarray(basis, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    cdef int d = basis.shape[0]
    if d not in (2, 3):
        raise NotImplementedError("cython backend supports d in {2, 3}")
    lo, hi = _box(basis, center, r2max)
    cdef long long total = 1
    for l, h in zip(lo, hi):
        total *= max(int(h - l + 1), 0)
    if total <= 0:
        return np.empty((0, d)), np.empty((0, d), dtype=np.int64)
    cdef long long nmax = min(total, int(cap) + 1)
    pts = np.empty((nmax, d), dtype=np.float64)
    mcs = np.empty((nmax, d), dtype=np.int64)
    cdef double[:, ::1] pv = pts
    cdef long long[:, ::1] mv = mcs
    cdef const double[:, ::1] b = basis
    cdef double cx = center[0], cy = center[1], cz = center[2] if d == 3 else 0.0
    cdef long long lo0 = lo[0], hi0 = hi[0], lo1 = lo[1], hi1 = hi[1]
    cdef long long lo2 = lo[2] if d == 3 else 0, hi2 = hi[2] if d == 3 else 0
    cdef long long i, j, k, n = 0, capn = int(cap)
    cdef double px, py, pz, r2, tol = r2max * (1 + 1e-14) + 1e-300
    if d == 2:
        for i in range(lo0, hi0 + 1):
            for j in range(lo1, hi1 + 1):
                px = b[0, 0] * i + b[0, 1] * j + cx
                py = b[1, 0] * i + b[1, 1] * j + cy
                r2 = px * px + py * py
                if r2 <= tol:
                    if n >= capn:
                        raise CapExceeded(f"point count exceeds cap ({cap})")
                    pv[n, 0] = px
                    pv[n, 1] = py
                    mv[n, 0] = i
                    mv[n, 1] = j
                    n += 1
    else:
        for i in range(lo0, hi0 + 1):
            for j in range(lo1, hi1 + 1):
                for k in range(lo2, hi2 + 1):
                    px = b[0, 0] * i + b[0, 1] * j + b[0, 2] * k + cx
                    py = b[1, 0] * i + b[1, 1] * j + b[1, 2] * k + cy
                    pz = b[2, 0] * i + b[2, 1] * j + b[2, 2] * k + cz
                    r2 = px * px + py * py + pz * pz
                    if r2 <= tol:
                        if n >= capn:
                            raise CapExceeded(f"point count exceeds cap ({cap})")
                        pv[n, 0] = px
                        pv[n, 1] = py
                        pv[n, 2] = pz
                        mv[n, 0] = i
                        mv[n, 1] = j
                        mv[n, 2] = k
                        n += 1
    return pts[:n], mcs[:n]


def ball_norms(basis, center, double r2max, cap, int weight_mode=W_NONE, phase=None):
    basis = np.ascontiguousarray(basis, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    cdef int d = basis.shape[0]
    if d not in (2, 3):
        raise NotImplementedError("cython backend supports d in {2, 3}")
    lo, hi = _box(basis, center, r2max)
    cdef long long total = 1
    for l, h in zip(lo, hi):
        total *= max(int(h - l + 1), 0)
    if total <= 0:
        e = np.empty(0)
        return e, (e.copy() if weight_mode != W_NONE else None)
    cdef long long nmax = min(total, int(cap) + 1)
    r2a = np.empty(nmax, dtype=np.float64)
    wa = np.empty(nmax if weight_mode != W_NONE else 0, dtype=np.float64)
    cdef double[::1] rv = r2a
    cdef double[::1] wv = wa
    cdef const double[:, ::1] b = basis
    cdef double cx = center[0], cy = center[1], cz = center[2] if d == 3 else 0.0
    cdef double ph0 = 0.0, ph1 = 0.0, ph2 = 0.0
    if weight_mode == W_COS:
        ph0 = phase[0]
        ph1 = phase[1]
        if d == 3:
            ph2 = phase[2]
    cdef long long lo0 = lo[0], hi0 = hi[0], lo1 = lo[1], hi1 = hi[1]
    cdef long long lo2 = lo[2] if d == 3 else 0, hi2 = hi[2] if d == 3 else 0
    cdef long long i, j, k, n = 0, capn = int(cap)
    cdef double px, py, pz, r2, tol = r2max * (1 + 1e-14) + 1e-300
    cdef double twopi = 2.0 * np.pi
    if d == 2:
        for i in range(lo0, hi0 + 1):
            for j in range(lo1, hi1 + 1):
                px = b[0, 0] * i + b[0, 1] * j + cx
                py = b[1, 0] * i + b[1, 1] * j + cy
                r2 = px * px + py * py
                if r2 <= tol:
                    if n >= capn:
                        raise CapExceeded(f"point count exceeds cap ({cap})")
                    rv[n] = r2
                    if weight_mode == W_PARITY:
                        wv[n] = -1.0 if (i + j) & 1 else 1.0
                    elif weight_mode == W_COS:
                        wv[n] = cos(twopi * (i * ph0 + j * ph1))
                    n += 1
    else:
        for i in range(lo0, hi0 + 1):
            for j in range(lo1, hi1 + 1):
                for k in range(lo2, hi2 + 1):
                    px = b[0, 0] * i + b[0, 1] * j + b[0, 2] * k + cx
                    py = b[1, 0] * i + b[1, 1] * j + b[1, 2] * k + cy
                    pz = b[2, 0] * i + b[2, 1] * j + b[2, 2] * k + cz
                    r2 = px * px + py * py + pz * pz
                    if r2 <= tol:
                        if n >= capn:
                            raise CapExceeded(f"point count exceeds cap ({cap})")
                        rv[n] = r2
                        if weight_mode == W_PARITY:
                            wv[n] = -1.0 if (i + j + k) & 1 else 1.0
                        elif weight_mode == W_COS:
                            wv[n] = cos(twopi * (i * ph0 + j * ph1 + k * ph2))
                        n += 1
    return r2a[:n], (wa[:n] if weight_mode != W_NONE else None)


cdef inline double _term(double r2, int code, double p0, double p1,
                         double p2, double p3) nogil:
    if code == C_GAUSS:
        return exp(-p0 * r2)
    if code == C_POWER:
        return pow(r2, -p0)
    if code == C_YUK:
        return exp(-p0 * r2) * pow(r2, -p1)
    # C_LJ
    return p1 * pow(r2, -p3) - p0 * pow(r2, -p2)


def family_sum(r2, w, int code, params, def_a=(), def_k2=()):
    cdef const double[::1] rv = np.ascontiguousarray(r2, dtype=np.float64)
    cdef bint has_w = w is not None
    cdef const double[::1] wv = np.ascontiguousarray(
        w if has_w else np.empty(0), dtype=np.float64)
    cdef const double[::1] da = np.ascontiguousarray(def_a, dtype=np.float64)
    cdef const double[::1] dk = np.ascontiguousarray(def_k2, dtype=np.float64)
    cdef double p0 = 0, p1 = 0, p2 = 0, p3 = 0
    p0 = params[0]
    if len(params) > 1:
        p1 = params[1]
    if len(params) > 2:
        p2 = params[2]
    if len(params) > 3:
        p3 = params[3]
    cdef Py_ssize_t i, j, n = rv.shape[0], nk = da.shape[0]
    cdef double s = 0.0, c = 0.0, t, val, x
    with nogil:
        for i in range(n):
            x = rv[i]
            val = _term(x, code, p0, p1, p2, p3)
            for j in range(nk):
                val -= da[j] * _term(dk[j] * x, code, p0, p1, p2, p3)
            if has_w:
                val *= wv[i]
            t = s + val
            if fabs(s) >= fabs(val):
                c += (s - t) + val
            else:
                c += (val - t) + s
            s = t
    return s + c


def compensated_sum(values):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double s = 0.0, c = 0.0, t, x
    with nogil:
        for i in range(n):
            x = v[i]
            t = s + x
            if fabs(s) >= fabs(x):
                c += (s - t) + x
            else:
                c += (x - t) + s
            s = t
    return s + c

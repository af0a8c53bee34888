# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: orbit iteration and Bowen-metric covers.

Operation order matches ``_pykernels`` exactly (the build disables FMA
contraction), so polynomial maps agree bit for bit across backends.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, log, fabs, floor, INFINITY, NAN, M_PI

cnp.import_array()

cdef int KIND_POLY = 0
cdef int KIND_SINE = 1
cdef double TWO_PI = 2.0 * M_PI


cdef inline double _horner(const double[::1] co, double x) noexcept nogil:
    cdef Py_ssize_t i, m = co.shape[0]
    cdef double y = co[m - 1]
    for i in range(m - 2, -1, -1):
        y = y * x + co[i]
    return y


cdef inline double _f(int kind, const double[::1] co, const double[::1] pa, double x) noexcept nogil:
    if kind == KIND_POLY:
        return _horner(co, x)
    if kind == KIND_SINE:
        return pa[0] * sin(M_PI * x)
    return x + pa[0] - (pa[1] / TWO_PI) * sin(TWO_PI * x)


cdef inline double _df(int kind, const double[::1] dco, const double[::1] pa, double x) noexcept nogil:
    if kind == KIND_POLY:
        return _horner(dco, x)
    if kind == KIND_SINE:
        return pa[0] * M_PI * cos(M_PI * x)
    return 1.0 - pa[1] * cos(TWO_PI * x)


cdef inline double _wrap(double y) noexcept nogil:
    y = y - floor(y)
    if y >= 1.0:
        y -= 1.0
    return y


cdef inline double _step(int kind, int circle, const double[::1] co, const double[::1] pa,
                         double x) noexcept nogil:
    cdef double y = _f(kind, co, pa, x)
    if circle:
        return _wrap(y)
    if y < 0.0:
        return 0.0
    if y > 1.0:
        return 1.0
    return y


cdef inline double _dist(double a, double b, int circle) noexcept nogil:
    cdef double d = fabs(a - b)
    if circle and 1.0 - d < d:
        d = 1.0 - d
    return d


def iterate(int kind, int circle, coeffs, dcoeffs, params, double x0, Py_ssize_t n,
            bint clamp, double tol):
    cdef const double[::1] co = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef const double[::1] dco = np.ascontiguousarray(dcoeffs, dtype=np.float64)
    cdef const double[::1] pa = np.ascontiguousarray(params, dtype=np.float64)
    pts_a = np.full(n + 1, np.nan)
    der_a = np.full(n + 1, np.nan)
    dlg_a = np.full(n + 1, np.nan)
    cdef double[::1] pts = pts_a
    cdef double[::1] der = der_a
    cdef double[::1] dlg = dlg_a
    cdef double x = x0, y, d
    cdef Py_ssize_t i, escape = -1
    with nogil:
        for i in range(n + 1):
            d = _df(kind, dco, pa, x)
            pts[i] = x
            der[i] = d
            if d != 0.0:
                dlg[i] = log(fabs(d))
            else:
                dlg[i] = -INFINITY
            if i == n:
                break
            y = _f(kind, co, pa, x)
            if circle:
                y = _wrap(y)
            elif y != y:
                escape = i + 1
                break
            elif y < 0.0 or y > 1.0:
                if (y < -tol or y > 1.0 + tol) and escape < 0:
                    escape = i + 1
                    if not clamp:
                        break
                if y < 0.0:
                    y = 0.0
                else:
                    y = 1.0
            x = y
    return pts_a, der_a, dlg_a, escape


def trajectories(int kind, int circle, coeffs, params, pts_in, Py_ssize_t n):
    cdef const double[::1] co = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef const double[::1] pa = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[::1] pts = np.ascontiguousarray(pts_in, dtype=np.float64)
    cdef Py_ssize_t m = pts.shape[0], i, t
    out_a = np.empty((m, n))
    cdef double[:, ::1] out = out_a
    cdef double y
    with nogil:
        for i in range(m):
            y = pts[i]
            for t in range(n):
                out[i, t] = y
                if t + 1 < n:
                    y = _step(kind, circle, co, pa, y)
    return out_a


def adjacent_gaps(int kind, int circle, coeffs, params, pts_in, Py_ssize_t n):
    cdef const double[::1] co = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef const double[::1] pa = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[::1] pts = np.ascontiguousarray(pts_in, dtype=np.float64)
    cdef Py_ssize_t m = pts.shape[0], i, t
    gaps_a = np.zeros(m - 1 if m > 0 else 0)
    cdef double[::1] gaps = gaps_a
    prev_a = np.empty(n)
    cur_a = np.empty(n)
    cdef double[::1] prev = prev_a
    cdef double[::1] cur = cur_a
    cdef double[::1] tmp
    cdef double y, g, d
    if m == 0:
        return gaps_a
    with nogil:
        y = pts[0]
        for t in range(n):
            prev[t] = y
            if t + 1 < n:
                y = _step(kind, circle, co, pa, y)
        for i in range(1, m):
            y = pts[i]
            g = 0.0
            for t in range(n):
                cur[t] = y
                d = _dist(y, prev[t], circle)
                if d > g:
                    g = d
                if t + 1 < n:
                    y = _step(kind, circle, co, pa, y)
            gaps[i - 1] = g
            tmp = prev
            prev = cur
            cur = tmp
    return gaps_a


def sweep_cover(int kind, int circle, coeffs, params, pts_in, Py_ssize_t n, double eps):
    cdef const double[::1] co = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef const double[::1] pa = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[::1] pts = np.ascontiguousarray(pts_in, dtype=np.float64)
    cdef Py_ssize_t m = pts.shape[0], i = 0, j, t, r = 0
    centers_a = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] centers = centers_a
    buf_a = np.empty(max(n, 1))
    cdef double[::1] buf = buf_a
    cdef double y
    cdef bint ok
    with nogil:
        while i < m:
            centers[r] = i
            r += 1
            y = pts[i]
            for t in range(n):
                buf[t] = y
                if t + 1 < n:
                    y = _step(kind, circle, co, pa, y)
            j = i + 1
            while j < m:
                y = pts[j]
                ok = True
                for t in range(n):
                    if not (_dist(y, buf[t], circle) < eps):
                        ok = False
                        break
                    if t + 1 < n:
                        y = _step(kind, circle, co, pa, y)
                if not ok:
                    break
                j += 1
            i = j
    return r, centers_a[:r].copy()


def separated_greedy(traj_in, pts_in, double eps, bint circle):
    cdef const double[:, ::1] traj = np.ascontiguousarray(traj_in, dtype=np.float64)
    cdef const double[::1] pts = np.ascontiguousarray(pts_in, dtype=np.float64)
    cdef Py_ssize_t m = pts.shape[0], n = traj.shape[1], i, k, s, t, nc = 0
    chosen_a = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] chosen = chosen_a
    cdef bint ok, close
    with nogil:
        for i in range(m):
            ok = True
            for k in range(nc - 1, -1, -1):
                s = chosen[k]
                if pts[i] - pts[s] >= eps:
                    break
                close = True
                for t in range(n):
                    if not (_dist(traj[i, t], traj[s, t], circle) < eps):
                        close = False
                        break
                if close:
                    ok = False
                    break
            if ok and circle:
                for k in range(nc):
                    s = chosen[k]
                    if pts[s] > pts[i] - (1.0 - eps):
                        break
                    close = True
                    for t in range(n):
                        if not (_dist(traj[i, t], traj[s, t], circle) < eps):
                            close = False
                            break
                    if close:
                        ok = False
                        break
            if ok:
                chosen[nc] = i
                nc += 1
    return chosen_a[:nc].copy()

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled 2-d geometry kernels (hot path of cell construction).

Same contracts as `_ref.py`; loops replace the NumPy broadcasts so the
per-call overhead stays flat when these run tens of thousands of times
inside replication loops.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def convex_hull_2d(points):
    """Indices of the convex hull of 2-d points, counterclockwise."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.lexsort((pts[:, 1], pts[:, 0])).astype(np.int64)
    if n == 1:
        return order[:1].copy()
    cdef cnp.ndarray[cnp.int64_t, ndim=1] work = np.empty(2 * n + 1, dtype=np.int64)
    cdef Py_ssize_t m = 0, i, idx
    cdef double ox, oy, ax, ay, bx, by
    # lower chain
    for i in range(n):
        idx = order[i]
        while m >= 2:
            ox = pts[work[m - 2], 0]; oy = pts[work[m - 2], 1]
            ax = pts[work[m - 1], 0]; ay = pts[work[m - 1], 1]
            bx = pts[idx, 0]; by = pts[idx, 1]
            if (ax - ox) * (by - oy) - (ay - oy) * (bx - ox) <= 0.0:
                m -= 1
            else:
                break
        work[m] = idx
        m += 1
    cdef Py_ssize_t lower = m - 1  # last lower point repeats as first upper point
    m -= 1
    cdef Py_ssize_t base = m
    # upper chain
    for i in range(n - 1, -1, -1):
        idx = order[i]
        while m >= base + 2:
            ox = pts[work[m - 2], 0]; oy = pts[work[m - 2], 1]
            ax = pts[work[m - 1], 0]; ay = pts[work[m - 1], 1]
            bx = pts[idx, 0]; by = pts[idx, 1]
            if (ax - ox) * (by - oy) - (ay - oy) * (bx - ox) <= 0.0:
                m -= 1
            else:
                break
        work[m] = idx
        m += 1
    m -= 1
    if m == 0:
        work[0] = order[0]
        m = 1
    return work[:m].copy()


def polygon_distance(poly, pts):
    """Distance from query points to a convex CCW polygon (0 inside)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] P = np.ascontiguousarray(poly, dtype=np.float64)
    arr = np.ascontiguousarray(pts, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Q = arr
    cdef Py_ssize_t k = P.shape[0], n = Q.shape[0]
    if k == 0:
        raise ValueError("empty polygon")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, j, m
    cdef double px, py, ax, ay, bx, by, ex, ey, ee, t, dx, dy, d2, best, cr
    cdef bint inside
    m = 1 if k == 2 else k
    for i in range(n):
        px = Q[i, 0]; py = Q[i, 1]
        if k == 1:
            out[i] = sqrt((px - P[0, 0]) ** 2 + (py - P[0, 1]) ** 2)
            continue
        best = -1.0
        inside = k >= 3
        for j in range(m):
            ax = P[j, 0]; ay = P[j, 1]
            bx = P[(j + 1) % k, 0]; by = P[(j + 1) % k, 1]
            ex = bx - ax; ey = by - ay
            if inside:
                cr = (px - ax) * ey - (py - ay) * ex
                if cr > 0.0:
                    inside = False
            ee = ex * ex + ey * ey
            if ee == 0.0:
                t = 0.0
            else:
                t = ((px - ax) * ex + (py - ay) * ey) / ee
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            dx = px - (ax + t * ex); dy = py - (ay + t * ey)
            d2 = dx * dx + dy * dy
            if best < 0.0 or d2 < best:
                best = d2
        out[i] = 0.0 if inside else sqrt(best)
    return out[0] if single else out


def cut_mask(normals, offsets, vertices):
    """Whether each halfplane <u,x> <= t strictly excludes some vertex."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] U = np.ascontiguousarray(normals, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] T = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V = np.ascontiguousarray(vertices, dtype=np.float64)
    cdef Py_ssize_t m = T.shape[0], k = V.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.zeros(m, dtype=np.uint8)
    cdef Py_ssize_t i, j
    cdef double ux, uy, t
    for i in range(m):
        ux = U[i, 0]; uy = U[i, 1]; t = T[i]
        for j in range(k):
            if ux * V[j, 0] + uy * V[j, 1] > t:
                out[i] = 1
                break
    return out.view(bool)

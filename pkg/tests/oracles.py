"""Independent reference computations backing the derived test values.

Everything here deliberately avoids the package's own quadrature and
search paths: scipy adaptive quadrature, dense grids, and closed forms
only, so a test comparing against these exercises two unrelated routes.
"""
import math

import numpy as np
from scipy.integrate import quad


def isotropic_integral(f, pieces=()):
    """Adaptive quadrature of f(theta)/(2*pi) over the circle."""
    pts = sorted(set([0.0, 2 * math.pi] + [p % (2 * math.pi) for p in pieces]))
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = quad(f, a, b, limit=200)
        total += val
    return total / (2 * math.pi)


def ball_excess_oracle(radius, y_norm):
    """Excess of a point at distance y_norm from the center over a ball, isotropic law."""
    if y_norm <= radius:
        return 0.0
    arc = math.acos(radius / y_norm)
    val, _ = quad(lambda t: y_norm * math.cos(t) - radius, -arc, arc)
    return val / (2 * math.pi)


def square_mean_support_oracle():
    """Isotropic average of the support function of [-1,1]^2 (Cauchy formula)."""
    return isotropic_integral(
        lambda t: abs(math.cos(t)) + abs(math.sin(t)),
        pieces=[0, math.pi / 2, math.pi, 3 * math.pi / 2],
    )


def polygon_perimeter_numeric(path, n=200000):
    """Arc length of a planar boundary path by dense polyline refinement."""
    s = np.linspace(0.0, path.total, n, endpoint=False)
    pts = path.point_at(s)
    d = np.diff(np.vstack([pts, pts[:1]]), axis=0)
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def dense_boundary_minimum(evaluator, path, n=1_000_000, chunk=65536):
    """Minimum of an excess evaluator over a dense boundary grid."""
    best = math.inf
    s = np.linspace(0.0, path.total, n, endpoint=False)
    for i in range(0, n, chunk):
        pts = path.point_at(s[i : i + chunk])
        best = min(best, float(evaluator.batch(pts).min()))
    return best


def cube_distance_oracle(x):
    """Distance from a point to [-1,1]^3 in closed form."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.linalg.norm(np.maximum(np.abs(x) - 1.0, 0.0)))

"""Reference computations that share no code with the package."""

import math

import mpmath
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


def expm_taylor(M, digits: int = 40) -> np.ndarray:
    """Generic matrix exponential by scaling, Taylor series and squaring in high precision."""
    with mpmath.workdps(digits):
        A = mpmath.matrix([[mpmath.mpf(float(x)) for x in row] for row in np.asarray(M, dtype=float)])
        n = A.rows
        norm = max(sum(abs(A[i, j]) for j in range(n)) for i in range(n))
        s = max(0, int(mpmath.ceil(mpmath.log(norm + 1, 2))) + 1)
        B = A / (2**s)
        term = mpmath.eye(n)
        total = mpmath.eye(n)
        k = 1
        while True:
            term = term * B / k
            total += term
            if mpmath.mnorm(term, 1) < mpmath.mpf(10) ** (-digits):
                break
            k += 1
        for _ in range(s):
            total = total * total
        return np.array([[float(total[i, j]) for j in range(n)] for i in range(n)])


def lv_rhs(a, b, c, d):
    def f(t, z):
        x, y = z
        return [x * (a - b * y), y * (-c + d * x)]

    return f


def lv_period(a, b, c, d, x0, y0) -> float:
    """Period of the orbit through ``(x0, y0)``, from the first return to the line ``x = x0``.

    The crossing direction is the one the flow takes at the start point.
    """
    f = lv_rhs(a, b, c, d)
    sign = np.sign(f(0, [x0, y0])[0])

    def cross(t, z):
        return z[0] - x0

    cross.direction = sign
    T0 = 2 * math.pi / math.sqrt(a * c)
    sol = solve_ivp(f, (0, 50 * T0), [x0, y0], rtol=1e-13, atol=1e-14, events=cross)
    times = [t for t in sol.t_events[0] if t > 1e-3 * T0]
    if not times:
        raise RuntimeError("no return found")
    return float(times[0])


def lv_flow(a, b, c, d, x0, y0, t) -> tuple[float, float]:
    sol = solve_ivp(lv_rhs(a, b, c, d), (0, t), [x0, y0], rtol=1e-13, atol=1e-14, method="DOP853")
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def lv_orbit_extremes(a, b, c, d, x0, y0) -> tuple[float, float, float, float]:
    """Min/max of x and y on the closed orbit through ``(x0, y0)``, by root-finding on H.

    The x extremes sit on the line ``y = a/b`` and the y extremes on ``x = c/d``.
    """
    H = d * x0 - c * math.log(x0) + b * y0 - a * math.log(y0)
    p, q = c / d, a / b
    gx = lambda x: d * x - c * math.log(x) + b * q - a * math.log(q) - H
    gy = lambda y: d * p - c * math.log(p) + b * y - a * math.log(y) - H
    kw = dict(xtol=1e-300, rtol=4 * np.finfo(float).eps)
    xmin = brentq(gx, 1e-300, p, **kw)
    xmax = brentq(gx, p, p + 10 * abs(H) / d + 10, **kw)
    ymin = brentq(gy, 1e-300, q, **kw)
    ymax = brentq(gy, q, q + 10 * abs(H) / b + 10, **kw)
    return xmin, xmax, ymin, ymax


def random_elliptic(rng, scale: float = 10.0):
    """Random ``(a, b, c)`` with ``a^2 + bc < 0`` and Frobenius norm at most ``scale``."""
    while True:
        a, b, c = rng.uniform(-1, 1, 3) * scale
        if a * a + b * c < 0.0 and 2 * a * a + b * b + c * c <= scale * scale:
            return a, b, c

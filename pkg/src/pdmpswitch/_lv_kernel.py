"""Compiled RK4 segment integrator for one Lotka-Volterra regime in log coordinates.

State ``(u, v) = (log x, log y)``::

    du/dt = a - b exp(v)
    dv/dt = -c + d exp(u)

A step is accepted only if the first integral ``H = d x - c u + b y - a v``
moved by at most ``tol * h * H_ref``; otherwise the step is halved.  The
change in ``H`` is evaluated from increments (``expm1``) so that it is not
swamped by the size of ``H`` itself.
"""

import math

import numba as nb
import numpy as np

REACHED = 0
EXITED = 1
UNDERFLOW = 2

# layout of the stats buffer
UMIN, UMAX, VMIN, VMAX, DH_TOTAL, N_STEPS, N_REJECT, MAX_RATE = range(8)
N_STATS = 8


@nb.njit(cache=True)
def first_integral(a, b, c, d, u, v):
    return d * math.exp(u) - c * u + b * math.exp(v) - a * v


@nb.njit(cache=True)
def h_reference(a, b, c, d, u, v):
    """Magnitude used to make H drift relative; guarded against H near zero."""
    x = math.exp(u)
    y = math.exp(v)
    H = d * x - c * u + b * y - a * v
    scale = d * x + abs(c * u) + b * y + abs(a * v)
    return max(abs(H), 1e-6 * scale)


@nb.njit(cache=True)
def _delta_h(a, b, c, d, u0, v0, du, dv):
    return d * math.exp(u0) * math.expm1(du) - c * du + b * math.exp(v0) * math.expm1(dv) - a * dv


@nb.njit(cache=True)
def _hermite(y0, f0, g0, y1, f1, g1, h, s):
    """Quintic Hermite interpolant matching value, first and second derivative at both ends."""
    s2 = s * s
    s3 = s2 * s
    s4 = s3 * s
    s5 = s4 * s
    hh = h * h
    return ((1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5) * y0
            + (s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5) * h * f0
            + 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5) * hh * g0
            + (10.0 * s3 - 15.0 * s4 + 6.0 * s5) * y1
            + (-4.0 * s3 + 7.0 * s4 - 3.0 * s5) * h * f1
            + 0.5 * (s3 - 2.0 * s4 + s5) * hh * g1)


@nb.njit(cache=True)
def _gap(u, v, cx, cy, r2):
    ex = math.exp(u) - cx
    ey = math.exp(v) - cy
    return ex * ex + ey * ey - r2


@nb.njit(cache=True)
def integrate(a, b, c, d, u, v, t, t_end, h, tol, h_min, h_max,
              out_t, out_u, out_v, idx,
              ex_cx, ex_cy, ex_r2, stats):
    """Integrate from ``t`` to ``t_end``.

    Grid times ``out_t[idx:]`` that fall inside an accepted step are filled
    by quintic Hermite interpolation, whose error is below that of the step.  When ``ex_r2 > 0`` the run stops at the
    first time ``(x - cx)^2 + (y - cy)^2 >= ex_r2``, located by bisection on
    the interpolant.

    Returns ``(u, v, t, h_next, status, idx)``.
    """
    ref = h_reference(a, b, c, d, u, v)
    fu = a - b * math.exp(v)
    fv = -c + d * math.exp(u)
    su = -b * math.exp(v) * fv
    sv = d * math.exp(u) * fu
    n_out = out_t.shape[0]
    check_exit = ex_r2 > 0.0
    while t < t_end:
        remaining = t_end - t
        hh = h if h < remaining else remaining
        last = hh == remaining
        k1u, k1v = fu, fv
        k2u = a - b * math.exp(v + 0.5 * hh * k1v)
        k2v = -c + d * math.exp(u + 0.5 * hh * k1u)
        k3u = a - b * math.exp(v + 0.5 * hh * k2v)
        k3v = -c + d * math.exp(u + 0.5 * hh * k2u)
        k4u = a - b * math.exp(v + hh * k3v)
        k4v = -c + d * math.exp(u + hh * k3u)
        du = hh * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
        dv = hh * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
        u1 = u + du
        v1 = v + dv
        # drift of the RK increment itself; rounding u + du is not integrator error
        dh = _delta_h(a, b, c, d, u, v, du, dv)
        if not (math.isfinite(u1) and math.isfinite(v1)) or abs(dh) > tol * hh * ref:
            stats[N_REJECT] += 1
            h = 0.5 * hh
            if h < h_min:
                return u, v, t, h, UNDERFLOW, idx
            continue
        t1 = t_end if last else t + hh
        gu = a - b * math.exp(v1)
        gv = -c + d * math.exp(u1)
        tu = -b * math.exp(v1) * gv
        tv = d * math.exp(u1) * gu
        while idx < n_out and out_t[idx] <= t1:
            s = (out_t[idx] - t) / hh
            if s < 0.0:
                s = 0.0
            out_u[idx] = _hermite(u, fu, su, u1, gu, tu, hh, s)
            out_v[idx] = _hermite(v, fv, sv, v1, gv, tv, hh, s)
            idx += 1
        if check_exit and _gap(u1, v1, ex_cx, ex_cy, ex_r2) >= 0.0:
            lo = 0.0
            hi = 1.0
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                um = _hermite(u, fu, su, u1, gu, tu, hh, mid)
                vm = _hermite(v, fv, sv, v1, gv, tv, hh, mid)
                if _gap(um, vm, ex_cx, ex_cy, ex_r2) >= 0.0:
                    hi = mid
                else:
                    lo = mid
            ue = _hermite(u, fu, su, u1, gu, tu, hh, hi)
            ve = _hermite(v, fv, sv, v1, gv, tv, hh, hi)
            if _gap(ue, ve, ex_cx, ex_cy, ex_r2) < 0.0:
                ue, ve, hi = u1, v1, 1.0
            te = t + hi * hh
            stats[DH_TOTAL] += _delta_h(a, b, c, d, u, v, ue - u, ve - v)
            stats[N_STEPS] += 1
            if ue < stats[UMIN]:
                stats[UMIN] = ue
            if ue > stats[UMAX]:
                stats[UMAX] = ue
            if ve < stats[VMIN]:
                stats[VMIN] = ve
            if ve > stats[VMAX]:
                stats[VMAX] = ve
            return ue, ve, te, h, EXITED, idx
        stats[DH_TOTAL] += dh
        stats[N_STEPS] += 1
        rate = abs(dh) / (hh * ref)
        if rate > stats[MAX_RATE]:
            stats[MAX_RATE] = rate
        if u1 < stats[UMIN]:
            stats[UMIN] = u1
        if u1 > stats[UMAX]:
            stats[UMAX] = u1
        if v1 < stats[VMIN]:
            stats[VMIN] = v1
        if v1 > stats[VMAX]:
            stats[VMAX] = v1
        if hh == h and abs(dh) < tol * hh * ref / 32.0:
            h = min(2.0 * h, h_max)
        u, v, t = u1, v1, t1
        fu, fv = gu, gv
        su, sv = tu, tv
    return u, v, t, h, REACHED, idx


def new_stats(u: float, v: float) -> np.ndarray:
    s = np.zeros(N_STATS)
    s[UMIN] = s[UMAX] = u
    s[VMIN] = s[VMAX] = v
    return s


EMPTY = np.empty(0)

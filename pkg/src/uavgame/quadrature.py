"""Adaptive Simpson quadrature.

Used on the production path by the coverage integral and, separately, by the
test oracles for the closed-form temporal probabilities.
"""

from __future__ import annotations

from .exceptions import QuadratureNonConvergence


def _simpson(fa, fm, fb, a, b):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(func, a, b, abs_tol=1e-10, max_subdivisions=2**18):
    """Integrate ``func`` over ``[a, b]``.

    Interval halving with the Lyness acceptance test ``|S2 - S1| <= 15 * tol``
    and Richardson correction. The tolerance budget is split between halves,
    so the returned value's absolute error is about ``abs_tol`` in total.

    Raises
    ------
    QuadratureNonConvergence
        If more than ``max_subdivisions`` interval splits were needed.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fb = func(a), func(b)
    m = 0.5 * (a + b)
    fm = func(m)
    whole = _simpson(fa, fm, fb, a, b)

    total = 0.0
    compensation = 0.0
    splits = 0
    # explicit stack so deep refinement cannot hit the recursion limit
    stack = [(a, b, fa, fm, fb, whole, abs_tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm, frm = func(lm), func(rm)
        left = _simpson(flo, flm, fmid, lo, mid)
        right = _simpson(fmid, frm, fhi, mid, hi)
        delta = left + right - s
        if abs(delta) <= 15.0 * tol or depth >= 60 or mid in (lo, hi):
            # Kahan summation keeps the many small pieces from drifting
            y = left + right + delta / 15.0 - compensation
            t = total + y
            compensation = (t - total) - y
            total = t
            continue
        splits += 1
        if splits > max_subdivisions:
            raise QuadratureNonConvergence(
                f"no convergence on [{a}, {b}] after {max_subdivisions} subdivisions (tol={abs_tol})"
            )
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * tol, depth + 1))
    return sign * total


def trapezoid_grid(func, a, b, n):
    """Fixed-grid trapezoid rule with ``n`` points; ``func`` must accept arrays."""
    import numpy as np

    x = np.linspace(a, b, n)
    y = func(x)
    h = (b - a) / (n - 1)
    return float(h * (y.sum() - 0.5 * (y[0] + y[-1])))


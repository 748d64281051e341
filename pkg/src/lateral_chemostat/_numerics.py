"""Scalar root finding and minimisation used across the package.

Both routines accept numpy arrays for the bracket end points so that many
independent problems can be solved in lock step (the function must then be
elementwise).  Scalars in, float out.
"""

import math

import numpy as np

from .errors import InconsistencyError

MAX_ITER = 200
INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def bisect(f, lo, hi, xtol, maxiter=MAX_ITER, increasing=None):
    """Bisection on ``[lo, hi]`` where ``f(lo)`` and ``f(hi)`` differ in sign.

    Parameters
    ----------
    f : callable
        Elementwise function.
    lo, hi : float or ndarray
        Bracket end points (broadcast together).
    xtol : float or ndarray
        Absolute tolerance on the argument.
    maxiter : int
        Hard cap on the number of halvings.
    increasing : bool, optional
        Orientation known in advance.  The end-point signs are then not
        checked, which tolerates rounding noise at an end point where the
        function vanishes analytically.

    Returns
    -------
    float or ndarray
        Midpoint of the final bracket.
    """
    scalar = np.ndim(lo) == 0 and np.ndim(hi) == 0
    if scalar:
        return _bisect_scalar(f, float(lo), float(hi), float(xtol), maxiter, increasing)

    lo, hi = np.broadcast_arrays(np.asarray(lo, float), np.asarray(hi, float))
    lo, hi = lo.copy(), hi.copy()
    if increasing is None:
        flo = np.asarray(f(lo), float)
        fhi = np.asarray(f(hi), float)
        if np.any(np.sign(flo) * np.sign(fhi) > 0):
            raise InconsistencyError("bisection bracket does not change sign")
        lo_neg = flo < 0
    else:
        lo_neg = np.full(lo.shape, bool(increasing))
    for _ in range(maxiter):
        if np.all(np.abs(hi - lo) <= xtol):
            break
        mid = 0.5 * (lo + hi)
        fmid = np.asarray(f(mid), float)
        go_right = (fmid < 0) == lo_neg
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def _bisect_scalar(f, lo, hi, xtol, maxiter, increasing):
    if increasing is None:
        flo = f(lo)
        fhi = f(hi)
        if flo == 0:
            return lo
        if fhi == 0:
            return hi
        if (flo > 0) == (fhi > 0):
            raise InconsistencyError(
                f"bisection bracket [{lo!r}, {hi!r}] does not change sign "
                f"(f = {flo!r}, {fhi!r})"
            )
        lo_neg = flo < 0
    else:
        lo_neg = bool(increasing)
    for _ in range(maxiter):
        if abs(hi - lo) <= xtol:
            break
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0:
            return mid
        if (fmid < 0) == lo_neg:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_min(f, lo, hi, xtol, maxiter=MAX_ITER):
    """Golden-section search for the minimiser of a unimodal ``f`` on ``[lo, hi]``."""
    a, b = float(lo), float(hi)
    c = b - INVPHI * (b - a)
    e = a + INVPHI * (b - a)
    fc, fe = f(c), f(e)
    for _ in range(maxiter):
        if b - a <= xtol:
            break
        if fc < fe:
            b, e, fe = e, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + INVPHI * (b - a)
            fe = f(e)
    return 0.5 * (a + b)

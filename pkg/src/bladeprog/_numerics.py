from .errors import NonConvergenceError


def bisect_decreasing(f, lo, hi, xtol, max_iter=400):
    """Root of a non-increasing function on ``[lo, hi]`` by bisection.

    Requires ``f(lo) >= 0 >= f(hi)``; raises NonConvergenceError otherwise or
    when ``max_iter`` halvings do not shrink the bracket below ``xtol``.
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo < 0 or f_hi > 0:
        raise NonConvergenceError(
            f"root not bracketed on [{lo:g}, {hi:g}]: f = ({f_lo:g}, {f_hi:g})", 0)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0:
            return mid
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= xtol:
            return 0.5 * (lo + hi)
    raise NonConvergenceError(f"bisection bracket still {hi - lo:g} wide", max_iter)

"""Scalar root finding on monotone functions: bisection safeguarding Newton."""

from __future__ import annotations

import math
from typing import Callable

MU_TOL = 1e-13
MAX_ITER = 200


def expand_bracket(
    f: Callable[[float], float], lo: float, step: float, *, decreasing: bool, max_doublings: int = 200
) -> float:
    """Walk right from ``lo`` with doubling steps until ``f`` changes sign.

    ``f`` must be monotone; returns a point ``hi`` with ``f(hi)`` on the far side of zero.
    """
    hi = lo + step
    for _ in range(max_doublings):
        fh = f(hi)
        if (fh <= 0.0) if decreasing else (fh >= 0.0):
            return hi
        step *= 2.0
        hi = lo + step
    raise RuntimeError("failed to bracket root")


def newton_bisect(
    fdf: Callable[[float], tuple[float, float]],
    lo: float,
    hi: float,
    x0: float | None = None,
    *,
    tol: float = MU_TOL,
    max_iter: int = MAX_ITER,
) -> float:
    """Root of a monotone function on ``[lo, hi]`` (sign change required).

    ``fdf`` returns ``(f(x), f'(x))``. Newton steps leaving the current bracket,
    or failing to halve it, fall back to bisection.
    """
    flo, _ = fdf(lo)
    fhi, _ = fdf(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")
    increasing = fhi > 0.0
    x = 0.5 * (lo + hi) if x0 is None or not (lo < x0 < hi) else x0
    dx_old = hi - lo
    for _ in range(max_iter):
        fx, dfx = fdf(x)
        if fx == 0.0:
            return x
        if (fx > 0.0) == increasing:
            hi = x
        else:
            lo = x
        newton_ok = dfx != 0.0 and math.isfinite(dfx)
        if newton_ok:
            x_new = x - fx / dfx
            newton_ok = lo < x_new < hi and abs(x_new - x) < 0.5 * dx_old
        if not newton_ok:
            x_new = 0.5 * (lo + hi)
        dx_old = abs(x_new - x)
        x = x_new
        if dx_old < tol or hi - lo < tol:
            # one more Newton polish from the final iterate when it stays bracketed
            fx, dfx = fdf(x)
            if fx != 0.0 and dfx != 0.0 and math.isfinite(dfx):
                x_pol = x - fx / dfx
                if lo <= x_pol <= hi:
                    x = x_pol
            return x
    return x

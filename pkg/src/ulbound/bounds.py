"""Delsarte-Goethals-Seidel design bounds and Levenshtein code bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .orthopoly import gegenbauer_eval, greatest_zero

INT64_MAX = 2**63 - 1
ENDPOINT_SLACK = 1e-12


class BoundError(ValueError):
    pass


@dataclass(frozen=True)
class LevenshteinInterval:
    tau: int
    lo: float
    hi: float

    def __contains__(self, s: float) -> bool:
        return self.lo - ENDPOINT_SLACK <= s <= self.hi + ENDPOINT_SLACK


@dataclass(frozen=True)
class BoundContext:
    n: int
    N: float
    tau: int
    k: int
    s: Optional[float] = None


def half_degree(tau: int) -> int:
    """``k = ceil((tau + 1) / 2)``."""
    return (tau + 2) // 2


def dgs_bound(n: int, tau: int) -> int:
    """Delsarte-Goethals-Seidel lower bound ``D(n, tau)`` on the size of a tau-design."""
    if n < 2 or tau < 0:
        raise BoundError(f"need n >= 2, tau >= 0 (got n={n}, tau={tau})")
    if tau % 2:
        k = (tau + 1) // 2
        value = 2 * math.comb(n + k - 2, n - 1)
    else:
        k = tau // 2
        value = math.comb(n + k - 1, n - 1) + math.comb(n + k - 2, n - 1)
    if value > INT64_MAX:
        raise OverflowError(f"D({n},{tau}) exceeds 2^63-1")
    return value


def interval(n: int, tau: int) -> LevenshteinInterval:
    """``I_tau``: ``[t_{k-1}^{1,1}, t_k^{1,0}]`` for ``tau = 2k-1``, ``[t_k^{1,0}, t_k^{1,1}]`` for ``tau = 2k``."""
    if tau < 1:
        raise BoundError("tau must be >= 1")
    if tau % 2:
        k = (tau + 1) // 2
        return LevenshteinInterval(tau, greatest_zero(n, k - 1, 1, 1), greatest_zero(n, k, 1, 0))
    k = tau // 2
    return LevenshteinInterval(tau, greatest_zero(n, k, 1, 0), greatest_zero(n, k, 1, 1))


def levenshtein_formula(n: int, tau: int, s: float) -> float:
    """Closed form of ``L_tau(n, s)`` without the interval check."""
    if tau % 2:
        k = (tau + 1) // 2
        pk = gegenbauer_eval(n, k, s)
        den = (1 - s) * pk
        if abs(den) < 1e-14:
            raise BoundError(f"L_{tau}({n}, s) denominator vanishes at s={s!r}")
        num = gegenbauer_eval(n, k - 1, s) - pk
        return math.comb(k + n - 3, k - 1) * ((2 * k + n - 3) / (n - 1) - num / den)
    k = tau // 2
    pk = gegenbauer_eval(n, k, s)
    pk1 = gegenbauer_eval(n, k + 1, s)
    den = (1 - s) * (pk + pk1)
    if abs(den) < 1e-14:
        raise BoundError(f"L_{tau}({n}, s) denominator vanishes at s={s!r}")
    return math.comb(k + n - 2, k) * ((2 * k + n - 1) / (n - 1) - (1 + s) * (pk - pk1) / den)


def levenshtein_bound(n: int, tau: int, s: float) -> float:
    """``L_tau(n, s)`` for ``s`` in ``I_tau``."""
    iv = interval(n, tau)
    if s not in iv:
        raise BoundError(f"s={s!r} outside I_{tau} = [{iv.lo!r}, {iv.hi!r}] for n={n}")
    return levenshtein_formula(n, tau, min(max(s, iv.lo), iv.hi))


def classify_tau(n: int, N: float) -> BoundContext:
    """The unique ``tau`` with ``D(n, tau) < N <= D(n, tau + 1)``."""
    if N < 3:
        raise BoundError(f"N must be >= 3 (got {N}); the antipodal pair is handled separately")
    tau = 1
    while dgs_bound(n, tau + 1) < N:
        tau += 1
    return BoundContext(n, N, tau, half_degree(tau))


def _bisect(fun, lo: float, hi: float, iters: int = 60) -> float:
    flo = fun(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = fun(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi), lo, hi


def _polish(fun, s: float, lo: float, hi: float) -> float:
    h = 1e-7 * max(1.0, abs(s))
    a, b = max(s - h, lo), min(s + h, hi)
    if b <= a:
        return s
    slope = (fun(b) - fun(a)) / (b - a)
    if slope == 0 or not np.isfinite(slope):
        return s
    s_new = s - fun(s) / slope
    if lo <= s_new <= hi and abs(fun(s_new)) <= abs(fun(s)):
        return s_new
    return s


def solve_s(ctx: BoundContext) -> BoundContext:
    """Fill in ``s`` in ``I_tau`` with ``L_tau(n, s) = N``."""
    n, N, tau = ctx.n, ctx.N, ctx.tau
    iv = interval(n, tau)
    if N == dgs_bound(n, tau + 1):
        return replace(ctx, s=iv.hi)

    def resid(s):
        return levenshtein_formula(n, tau, s) - N

    if not (resid(iv.lo) < 0 <= resid(iv.hi)):
        raise RuntimeError(f"L_{tau}({n}, .) = {N} not bracketed by I_{tau}")
    s, lo, hi = _bisect(resid, iv.lo, iv.hi)
    s = _polish(resid, s, lo, hi)
    return replace(ctx, s=s)


def denominator_pole(n: int, m: int) -> float:
    """Smallest ``s > hi(I_m)`` where the denominator of ``L_m`` vanishes."""
    iv = interval(n, m)
    if m % 2:
        return greatest_zero(n, (m + 1) // 2, 0, 0)
    k = m // 2

    def den(s):
        return gegenbauer_eval(n, k, s) + gegenbauer_eval(n, k + 1, s)

    grid = np.linspace(iv.hi, 1.0, 4001)
    vals = den(grid)
    sign_change = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if not sign_change.size:
        return 1.0
    i = sign_change[0]
    s, _, _ = _bisect(den, grid[i], grid[i + 1])
    return s


def solve_s_extended(n: int, N: float, m: int) -> float:
    """Solve ``L_m(n, s) = N`` for ``s >= lo(I_m)``, continuing past ``I_m`` up to the pole."""
    iv = interval(n, m)
    if N < dgs_bound(n, m):
        raise BoundError(f"N={N} below D({n},{m})")
    if N <= dgs_bound(n, m + 1):
        return solve_s(BoundContext(n, N, m, half_degree(m))).s
    pole = denominator_pole(n, m)

    def resid(s):
        return levenshtein_formula(n, m, s) - N

    gap = 0.5 * (pole - iv.hi)
    while True:
        hi = pole - gap
        try:
            if resid(hi) > 0:
                break
        except BoundError:
            pass
        gap *= 0.5
        if gap < 1e-15:
            raise RuntimeError(f"cannot bracket L_{m}({n}, s) = {N} below the pole at {pole}")
    s, lo, hi = _bisect(resid, iv.hi, hi)
    return _polish(resid, s, lo, hi)


def locate_tau(n: int, s: float, tau_max: int = 400) -> int:
    """Smallest ``tau`` with ``s`` in ``I_tau``."""
    if not -1 <= s < 1:
        raise BoundError("s must lie in [-1, 1)")
    for tau in range(1, tau_max + 1):
        if s <= interval(n, tau).hi + ENDPOINT_SLACK:
            return tau
    raise BoundError(f"s={s} beyond I_{tau_max}")


def levenshtein_curve(n: int, s_grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(s, tau, L(n, s))`` along a grid in [-1, 1)."""
    s_grid = np.asarray(s_grid, dtype=float)
    taus = np.array([locate_tau(n, s) for s in s_grid], dtype=int)
    vals = np.array([levenshtein_bound(n, t, s) for t, s in zip(taus, s_grid)])
    return s_grid, taus, vals

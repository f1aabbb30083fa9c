"""Gegenbauer and Jacobi polynomials on [-1, 1].

Gegenbauer polynomials ``P_i^{(n)}`` are normalized so that ``P_i^{(n)}(1) = 1``
and generated by the three-term recurrence

    (i + n - 2) P_{i+1}(t) = (2i + n - 2) t P_i(t) - i P_{i-1}(t).

Jacobi polynomials use Szego's normalization ``P_i^{(a,b)}(1) = binom(i + a, i)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

log = logging.getLogger(__name__)

MAX_DEGREE = 200
DOMAIN_SLACK = 1e-12


class RootFindingError(RuntimeError):
    pass


@dataclass(frozen=True)
class JacobiParams:
    """Exponents of the weight ``(1 - t)^a (1 + t)^b``."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > -1 and self.b > -1):
            raise ValueError(f"Jacobi exponents must exceed -1, got a={self.a}, b={self.b}")

    @classmethod
    def gegenbauer(cls, n: int) -> "JacobiParams":
        lam = (n - 3) / 2
        return cls(lam, lam)

    @classmethod
    def adjacent(cls, n: int, a: int, b: int) -> "JacobiParams":
        """Exponents ``(a + (n-3)/2, b + (n-3)/2)`` of the adjacent polynomials."""
        lam = (n - 3) / 2
        return cls(a + lam, b + lam)


@dataclass
class Polynomial:
    """Univariate polynomial with monomial coefficients (ascending order).

    ``gegenbauer_coeffs`` optionally holds the expansion in ``P_i^{(n)}`` for
    ``n = gegenbauer_n``.
    """

    monomial_coeffs: np.ndarray
    gegenbauer_coeffs: Optional[np.ndarray] = None
    gegenbauer_n: Optional[int] = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.monomial_coeffs, dtype=float))
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:1]
        self.monomial_coeffs = c
        if self.gegenbauer_coeffs is not None:
            g = np.asarray(self.gegenbauer_coeffs, dtype=float)
            if self.gegenbauer_n is None:
                raise ValueError("gegenbauer_coeffs given without gegenbauer_n")
            self.gegenbauer_coeffs = g

    @classmethod
    def from_gegenbauer(cls, n: int, coeffs) -> "Polynomial":
        g = np.asarray(coeffs, dtype=float)
        return cls(gegenbauer_to_monomial(n, g), g, n)

    @property
    def degree(self) -> int:
        return len(self.monomial_coeffs) - 1

    def with_gegenbauer(self, n: int) -> "Polynomial":
        if self.gegenbauer_n == n and self.gegenbauer_coeffs is not None:
            return self
        return Polynomial(self.monomial_coeffs, to_gegenbauer(n, self), n)

    def __call__(self, t):
        if self.gegenbauer_coeffs is not None:
            return gegenbauer_series(self.gegenbauer_n, self.gegenbauer_coeffs, t)
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c in self.monomial_coeffs[::-1]:
            out = out * t + c
        return out if out.ndim else float(out)


def _check_domain(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1 + DOMAIN_SLACK):
        raise ValueError("argument outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def gegenbauer_eval(n: int, i: int, t):
    """Return ``P_i^{(n)}(t)``; ``t`` may be a scalar or array in [-1, 1]."""
    if n < 2 or i < 0:
        raise ValueError(f"need n >= 2 and i >= 0, got n={n}, i={i}")
    if np.ndim(t) == 0:
        x = float(t)
        if abs(x) > 1 + DOMAIN_SLACK:
            raise ValueError("argument outside [-1, 1]")
        x = min(max(x, -1.0), 1.0)
        prev, cur = 1.0, x
        if i == 0:
            return 1.0
        for m in range(1, i):
            prev, cur = cur, ((2 * m + n - 2) * x * cur - m * prev) / (m + n - 2)
        return cur
    t = _check_domain(t)
    prev = np.ones_like(t)
    if i == 0:
        return prev
    cur = t.copy()
    for m in range(1, i):
        prev, cur = cur, ((2 * m + n - 2) * t * cur - m * prev) / (m + n - 2)
    return cur if cur.ndim else float(cur)


def gegenbauer_table(n: int, deg: int, t) -> np.ndarray:
    """Rows ``P_0^{(n)}(t), ..., P_deg^{(n)}(t)`` stacked along axis 0."""
    t = _check_domain(t)
    out = np.empty((deg + 1,) + t.shape)
    out[0] = 1.0
    if deg >= 1:
        out[1] = t
    for m in range(1, deg):
        out[m + 1] = ((2 * m + n - 2) * t * out[m] - m * out[m - 1]) / (m + n - 2)
    return out


def gegenbauer_series(n: int, coeffs, t):
    """Evaluate ``sum_i coeffs[i] P_i^{(n)}(t)`` by Clenshaw's recurrence."""
    c = np.asarray(coeffs, dtype=float)
    t = _check_domain(t)
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    # P_{m+1} = A_m t P_m - B_m P_{m-1}; Clenshaw needs A_m, B_{m+1}.
    for m in range(len(c) - 1, 0, -1):
        a_m = (2 * m + n - 2) / (m + n - 2)
        b_next = (m + 1) / (m + n - 1)
        b1, b2 = c[m] + a_m * t * b1 - b_next * b2, b1
    out = c[0] + t * b1 - (1 / (n - 1)) * b2 if len(c) > 1 else c[0] + 0 * t
    return out if np.ndim(out) else float(out)


def jacobi_eval(params: JacobiParams, i: int, t):
    """Jacobi polynomial ``P_i^{(a,b)}(t)`` in Szego's normalization."""
    a, b = params.a, params.b
    if np.ndim(t) == 0:
        t = float(t)
        prev = 1.0
    else:
        t = np.asarray(t, dtype=float)
        prev = np.ones_like(t)
    if i == 0:
        return prev
    cur = (a + 1) + (a + b + 2) * (t - 1) / 2
    for m in range(2, i + 1):
        s = 2 * m + a + b
        c1 = 2 * m * (m + a + b) * (s - 2)
        slope = (s - 1) * s * (s - 2) / c1
        shift = (s - 1) * (a * a - b * b) / c1
        back = 2 * (m + a - 1) * (m + b - 1) * s / c1
        prev, cur = cur, (slope * t + shift) * cur - back * prev
    return cur if np.ndim(cur) else float(cur)


def derivative_eval(params: JacobiParams, i: int, t, order: int = 1):
    """``order``-th derivative of ``P_i^{(a,b)}`` at ``t``.

    Uses d/dt P_i^{(a,b)} = (i + a + b + 1)/2 * P_{i-1}^{(a+1,b+1)}.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if order > i:
        t = np.asarray(t, dtype=float)
        z = np.zeros_like(t)
        return z if z.ndim else 0.0
    scale = 1.0
    for m in range(order):
        scale *= (i + params.a + params.b + 1 + m) / 2
    shifted = JacobiParams(params.a + order, params.b + order)
    return scale * jacobi_eval(shifted, i - order, t)


def jacobi_at_one(params: JacobiParams, i: int) -> float:
    return math.exp(math.lgamma(i + params.a + 1) - math.lgamma(i + 1) - math.lgamma(params.a + 1))


def gegenbauer_derivative(n: int, j: int, t, order: int):
    """``order``-th derivative of ``P_j^{(n)}`` (order 0 gives the value)."""
    if order == 0:
        return gegenbauer_eval(n, j, t)
    params = JacobiParams.gegenbauer(n)
    return derivative_eval(params, j, t, order) / jacobi_at_one(params, j)


def bracketed_roots(f, df, lo, hi, width: float = 1e-8, tol: float = 1e-14) -> np.ndarray:
    """One root of ``f`` in each bracket ``[lo[i], hi[i]]``: bisection, then Newton polish.

    ``f`` and ``df`` must accept arrays.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = f(lo)
    fhi = f(hi)
    bad = np.flatnonzero(flo * fhi > 0)
    if bad.size:
        raise RootFindingError(f"no sign change in brackets {list(zip(lo[bad], hi[bad]))}")
    lo0, hi0 = lo.copy(), hi.copy()
    while np.max(hi - lo) > width:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = flo * fm <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fm)
    x = 0.5 * (lo + hi)
    for _ in range(20):
        d = df(x)
        step = np.divide(f(x), d, out=np.zeros_like(x), where=d != 0)
        x_new = np.clip(x - step, lo0, hi0)
        done = np.max(np.abs(x_new - x)) < tol
        x = x_new
        if done:
            break
    return x


@lru_cache(maxsize=1024)
def _roots_cached(params: JacobiParams, i: int) -> tuple:
    if i == 1:
        # (a + 1) + (a + b + 2)(t - 1)/2 = 0
        return ((params.b - params.a) / (params.a + params.b + 2),)
    prev = np.array(_roots_cached(params, i - 1))
    edges = np.concatenate(([-1.0], prev, [1.0]))
    try:
        roots = bracketed_roots(
            lambda x: jacobi_eval(params, i, x),
            lambda x: derivative_eval(params, i, x),
            edges[:-1],
            edges[1:],
        )
    except RootFindingError as exc:
        raise RootFindingError(f"degree {i}, {params}: {exc}") from None
    if np.any(np.diff(roots) <= 0):
        raise RootFindingError(f"roots of degree {i} not strictly increasing for {params}")
    return tuple(roots)


def all_roots(params: JacobiParams, i: int) -> np.ndarray:
    """Sorted zeros of ``P_i^{(a,b)}``, bracketed by interlacing with degree ``i - 1``."""
    if i < 1:
        raise ValueError("degree must be >= 1")
    if i > MAX_DEGREE:
        raise ValueError(f"degree capped at {MAX_DEGREE}")
    return np.array(_roots_cached(params, i))


@dataclass(frozen=True)
class GreatestZeros:
    n: int
    k: int
    t_k_10: Optional[float]
    t_k_11: float
    t_k_00: Optional[float]


def greatest_zero(n: int, k: int, a: int, b: int) -> float:
    """``t_k^{a,b}``: largest zero of the adjacent Jacobi polynomial; ``t_0^{1,1} = -1``."""
    if k == 0:
        if (a, b) == (1, 1):
            return -1.0
        raise ValueError(f"t_0^{{{a},{b}}} is undefined")
    return float(all_roots(JacobiParams.adjacent(n, a, b), k)[-1])


def greatest_zeros(n: int, k: int) -> GreatestZeros:
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return GreatestZeros(n, 0, None, -1.0, None)
    return GreatestZeros(
        n,
        k,
        greatest_zero(n, k, 1, 0),
        greatest_zero(n, k, 1, 1),
        greatest_zero(n, k, 0, 0),
    )


def _times_t(n: int, g: np.ndarray) -> np.ndarray:
    """Gegenbauer coefficients of ``t * p`` from those of ``p``.

    t P_i = i/(2i+n-2) P_{i-1} + (i+n-2)/(2i+n-2) P_{i+1}.
    """
    out = np.zeros(len(g) + 1)
    out[1] += g[0]
    for i in range(1, len(g)):
        d = 2 * i + n - 2
        out[i - 1] += g[i] * i / d
        out[i + 1] += g[i] * (i + n - 2) / d
    return out


def newton_form_to_gegenbauer(n: int, coeffs, centers) -> np.ndarray:
    """Expand ``c0 + (t-x0)(c1 + (t-x1)(c2 + ...))`` in the Gegenbauer basis."""
    coeffs = np.asarray(coeffs, dtype=float)
    centers = np.asarray(centers, dtype=float)
    g = coeffs[-1:].copy()
    for m in range(len(coeffs) - 2, -1, -1):
        tg = _times_t(n, g)
        tg[:-1] -= centers[m] * g
        tg[0] += coeffs[m]
        g = tg
    return g


def to_gegenbauer(n: int, p: Polynomial) -> np.ndarray:
    """Gegenbauer coefficients ``f_0, ..., f_deg`` of ``p`` (Horner in the Gegenbauer basis)."""
    c = p.monomial_coeffs
    g = newton_form_to_gegenbauer(n, c, np.zeros(max(len(c) - 1, 0)))
    _warn_conditioning(c, g)
    return g


@lru_cache(maxsize=64)
def _monomial_table(n: int, deg: int) -> np.ndarray:
    # row i holds the monomial coefficients of P_i^{(n)}
    tab = np.zeros((deg + 1, deg + 1))
    tab[0, 0] = 1.0
    if deg >= 1:
        tab[1, 1] = 1.0
    for m in range(1, deg):
        tab[m + 1, 1:] = (2 * m + n - 2) * tab[m, :-1]
        tab[m + 1] -= m * tab[m - 1]
        tab[m + 1] /= m + n - 2
    tab.flags.writeable = False
    return tab


def gegenbauer_to_monomial(n: int, coeffs) -> np.ndarray:
    g = np.asarray(coeffs, dtype=float)
    if len(g) > MAX_DEGREE + 1:
        raise ValueError(f"degree capped at {MAX_DEGREE}")
    return g @ _monomial_table(n, len(g) - 1)


def weighted_mean(n: int, p: Polynomial) -> float:
    """``f_0 = gamma_n * int p(t) (1-t^2)^{(n-3)/2} dt``, the constant Gegenbauer coefficient."""
    return float(to_gegenbauer(n, p)[0])


def _warn_conditioning(mono: np.ndarray, geg: np.ndarray) -> None:
    big = np.max(np.abs(mono))
    small = np.max(np.abs(geg))
    if big > 0 and small > 0:
        ratio = max(big / small, small / big)
        if ratio > 1e12:
            log.warning("basis conversion poorly conditioned (coefficient ratio %.3g)", ratio)

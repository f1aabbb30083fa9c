"""Potentials ``h(t)`` of the inner product with closed-form derivatives.

Every built-in kind except the Gauss potential is a power of an affine
function, ``h(t) = sign * c * (p + q t)^e``, so derivatives follow from

    d^i/dt^i (p + q t)^e = q^i e (e-1) ... (e-i+1) (p + q t)^(e-i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

GRID_POINTS = 2000


class PotentialError(ValueError):
    pass


def _falling(e: float, i: int) -> float:
    out = 1.0
    for m in range(i):
        out *= e - m
    return out


@dataclass(frozen=True)
class Potential:
    """A potential with value and derivative evaluators.

    ``deriv(t, 0)`` equals ``eval(t)``. Singular kinds return ``+inf`` at
    ``t = 1``.
    """

    kind: str
    params: tuple = ()
    value_fn: Callable = field(default=None, repr=False, compare=False)
    deriv_fn: Callable = field(default=None, repr=False, compare=False)
    strictly_abs_monotone: bool = True
    singular_at_one: bool = False
    # derivative order from which absolute monotonicity holds (1 for log / Fejes-Toth)
    monotone_from: int = 0

    @property
    def label(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}:" + ",".join(f"{p:g}" for p in self.params)

    def _domain(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr > 1 + 1e-12) or np.any(arr < -1 - 1e-12):
            raise PotentialError(f"{self.label}: argument outside [-1, 1]")
        return np.clip(arr, -1.0, 1.0)

    def eval(self, t):
        return self.deriv(t, 0)

    def deriv(self, t, i: int = 0):
        if i < 0:
            raise ValueError("derivative order must be >= 0")
        x = self._domain(t)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = self.deriv_fn(x, i) if i else self.value_fn(x)
        out = np.asarray(out, dtype=float)
        return out if out.ndim else float(out)

    __call__ = eval


def _affine_power(sign: float, c: float, p: float, q: float, e: float, log_kind: bool = False):
    """Value/derivative callables for ``sign * c * (p + q t)^e`` (or ``sign*c*log(p+q t)``)."""

    def base(t):
        return p + q * t

    def value(t):
        u = base(t)
        if log_kind:
            return sign * c * np.log(u)
        return sign * c * np.where(u > 0, u, 0.0) ** e

    def deriv(t, i):
        u = base(t)
        if log_kind:
            # d^i log(u) = q^i (-1)^(i-1) (i-1)! u^(-i)
            coef = sign * c * q**i * (-1) ** (i - 1) * math.factorial(i - 1)
            return coef * u ** (-float(i))
        coef = sign * c * q**i * _falling(e, i)
        if coef == 0:
            return np.zeros_like(u)
        return coef * u ** (e - i)

    return value, deriv


def riesz(alpha: float) -> Potential:
    """``[2(1-t)]^{-alpha/2}``, ``alpha > 0``."""
    if alpha <= 0:
        raise PotentialError("Riesz exponent must be positive")
    v, d = _affine_power(1.0, 2.0 ** (-alpha / 2), 1.0, -1.0, -alpha / 2)
    return Potential("riesz", (alpha,), v, d, True, True)


def newton(n: int) -> Potential:
    """Newton (harmonic) potential on ``S^{n-1}``: Riesz with ``alpha = n - 2``."""
    if n < 3:
        raise PotentialError("the Newton potential needs n >= 3")
    base = riesz(n - 2)
    return Potential("newton", (n,), base.value_fn, base.deriv_fn, True, True)


def gauss() -> Potential:
    """``exp(2t - 2)``."""

    def value(t):
        return np.exp(2 * t - 2)

    def deriv(t, i):
        return 2.0**i * np.exp(2 * t - 2)

    return Potential("gauss", (), value, deriv, True, False)


def korevaar(r: float, n: int) -> Potential:
    """``(1 + r^2 - 2 r t)^{-(n-2)/2}``, ``0 < r < 1``."""
    if not 0 < r < 1:
        raise PotentialError("Korevaar parameter r must lie in (0, 1)")
    if n < 3:
        raise PotentialError("the Korevaar potential needs n >= 3")
    v, d = _affine_power(1.0, 1.0, 1 + r * r, -2 * r, -(n - 2) / 2)
    return Potential("korevaar", (r, n), v, d, True, False)


def logarithmic() -> Potential:
    """``-(1/2) log(1 - t)``; negative on [-1, 0) but every derivative is positive."""
    v, d = _affine_power(-1.0, 0.5, 1.0, -1.0, 0.0, log_kind=True)
    return Potential("log", (), v, d, True, True, monotone_from=1)


def fejes_toth(alpha: float) -> Potential:
    """``-[2(1-t)]^{alpha/2}``, ``0 < alpha < 2``."""
    if not 0 < alpha < 2:
        raise PotentialError("Fejes-Toth exponent must lie in (0, 2)")
    v, d = _affine_power(-1.0, 2.0 ** (alpha / 2), 1.0, -1.0, alpha / 2)
    return Potential("ft", (alpha,), v, d, True, False, monotone_from=1)


def custom(value: Callable, deriv: Callable, name: str = "custom", singular_at_one: bool = False) -> Potential:
    """User potential from callbacks ``value(t)`` and ``deriv(t, i)`` (``i >= 1``).

    Absolute monotonicity is not assumed; see :func:`check_abs_monotone`.
    """
    return Potential(name, (), value, deriv, False, singular_at_one)


def parse_potential(spec: str, n: int) -> Potential:
    """Parse ``newton``, ``riesz:a``, ``gauss``, ``korevaar:r``, ``log`` or ``ft:a``."""
    name, _, arg = spec.strip().partition(":")
    name = name.lower()
    try:
        if name == "newton":
            return newton(n)
        if name == "gauss":
            return gauss()
        if name == "log":
            return logarithmic()
        if name == "riesz":
            return riesz(float(arg))
        if name == "korevaar":
            return korevaar(float(arg), n)
        if name in ("ft", "fejes_toth"):
            return fejes_toth(float(arg))
    except ValueError as exc:
        if isinstance(exc, PotentialError):
            raise
        raise PotentialError(f"bad parameter in potential spec {spec!r}") from None
    raise PotentialError(f"unknown potential {spec!r}")


@dataclass
class MonotonicityReport:
    ok: bool
    max_order: int
    # (order, t, value) for the most negative sample, if any
    worst: Optional[tuple] = None
    failing_orders: list = field(default_factory=list)


def check_abs_monotone(
    p: Potential, max_order: int, min_order: int = 0, tol: float = 1e-12
) -> MonotonicityReport:
    """Sample ``h^{(i)} >= -tol`` for ``min_order <= i <= max_order`` on [-1, 1-1e-6]."""
    if max_order > 30:
        raise ValueError("max_order is capped at 30")
    grid = np.linspace(-1.0, 1.0 - 1e-6, GRID_POINTS)
    worst = None
    failing = []
    for i in range(min_order, max_order + 1):
        vals = np.asarray(p.deriv(grid, i), dtype=float)
        j = int(np.nanargmin(vals))
        if vals[j] < -tol or np.isnan(vals).any():
            failing.append(i)
            if worst is None or vals[j] < worst[2]:
                worst = (i, float(grid[j]), float(vals[j]))
    return MonotonicityReport(not failing, max_order, worst, failing)

"""Universal lower bound ``R_tau(n, N; h)`` and its optimal Hermite interpolant."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bounds import BoundContext
from .orthopoly import Polynomial, gegenbauer_to_monomial, newton_form_to_gegenbauer
from .potentials import Potential, PotentialError, check_abs_monotone
from .quadrature import QuadratureRule, antipodal_rule, build_rule, build_rule_degree

log = logging.getLogger(__name__)

GRID_POINTS = 10_000
FEAS_TOL = 1e-9
COEF_TOL = 1e-10


@dataclass
class HermiteInterpolant:
    poly: Polynomial
    nodes: np.ndarray
    multiplicities: tuple

    @property
    def degree(self) -> int:
        return int(sum(self.multiplicities)) - 1

    @property
    def gegenbauer_coeffs(self) -> np.ndarray:
        return self.poly.gegenbauer_coeffs


@dataclass
class Feasibility:
    f_le_h: bool
    gegenbauer_nonneg: bool
    max_violation: float
    worst_t: Optional[float] = None
    min_coeff: Optional[float] = None
    worst_coeff_index: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.f_le_h and self.gegenbauer_nonneg

    def to_dict(self) -> dict:
        return {
            "f_le_h": self.f_le_h,
            "gegenbauer_nonneg": self.gegenbauer_nonneg,
            "max_violation": self.max_violation,
            "worst_t": self.worst_t,
            "min_coeff": self.min_coeff,
            "worst_coeff_index": self.worst_coeff_index,
        }


@dataclass
class UlbReport:
    ctx: BoundContext
    rule: QuadratureRule
    potential: str
    value: float
    interpolant: HermiteInterpolant
    feasibility: Feasibility
    lp_value: float
    monotone_checked: bool = True
    notes: list = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return self.feasibility.ok and self.monotone_checked

    def to_dict(self) -> dict:
        return {
            "n": self.ctx.n,
            "N": self.ctx.N,
            "tau": self.ctx.tau,
            "k": self.ctx.k,
            "s": self.ctx.s,
            "potential": self.potential,
            "nodes": list(map(float, self.rule.nodes)),
            "weights": list(map(float, self.rule.weights)),
            "ulb": self.value,
            "lp_value": self.lp_value,
            "gegenbauer_coeffs": list(map(float, self.interpolant.gegenbauer_coeffs)),
            "feasibility": self.feasibility.to_dict(),
            "verified": self.verified,
        }


def hermite_newton(points, values, derivs):
    """Divided-difference coefficients for Hermite data.

    ``points`` lists each node once per condition (a repeated node means a
    derivative condition); ``values[i]`` and ``derivs[i]`` belong to ``points[i]``.
    Returns the Newton coefficients; the centers are ``points[:-1]``.
    """
    z = np.asarray(points, dtype=float)
    m = len(z)
    table = np.array(values, dtype=float)
    coeffs = [table[0]]
    for order in range(1, m):
        nxt = np.empty(m - order)
        for i in range(m - order):
            dz = z[i + order] - z[i]
            if dz == 0:
                # only first derivatives are supplied, so repeats have multiplicity <= 2
                nxt[i] = derivs[i]
            else:
                nxt[i] = (table[i + 1] - table[i]) / dz
        table = nxt
        coeffs.append(table[0])
    return np.array(coeffs)


def interpolation_scheme(rule: QuadratureRule) -> tuple:
    """Multiplicity per node: 1 at ``alpha_1 = -1`` for even ``tau``, 2 elsewhere."""
    mult = [2] * rule.k
    if rule.tau % 2 == 0:
        mult[0] = 1
    return tuple(mult)


def hermite_interpolant(rule: QuadratureRule, h: Potential) -> HermiteInterpolant:
    """Polynomial of degree ``tau`` touching ``h`` at the rule's nodes."""
    mult = interpolation_scheme(rule)
    pts = np.repeat(rule.nodes, mult)
    vals = np.asarray(h.eval(pts), dtype=float)
    ders = np.asarray(h.deriv(pts, 1), dtype=float)
    coeffs = hermite_newton(pts, vals, ders)
    centers = pts[:-1]
    geg = newton_form_to_gegenbauer(rule.n, coeffs, centers)
    poly = Polynomial(gegenbauer_to_monomial(rule.n, geg), geg, rule.n)
    return HermiteInterpolant(poly, np.array(rule.nodes), mult)


def certify_feasibility(
    f, h: Potential, n: int, tol: float = FEAS_TOL, coef_tol: float = COEF_TOL
) -> Feasibility:
    """Check ``f <= h`` on a dense grid and ``f_i >= 0`` for ``i >= 1``.

    ``f`` may be a :class:`HermiteInterpolant` or a :class:`Polynomial`.
    """
    poly = f.poly if isinstance(f, HermiteInterpolant) else f
    poly = poly.with_gegenbauer(n)
    grid = np.linspace(-1.0, 1.0, GRID_POINTS)
    if isinstance(f, HermiteInterpolant):
        nodes = np.asarray(f.nodes, dtype=float)
        grid = np.concatenate((grid, nodes, 0.5 * (nodes[:-1] + nodes[1:])))
    if h.singular_at_one:
        grid = grid[grid < 1.0]
    hv = np.asarray(h.eval(grid), dtype=float)
    fv = np.asarray(poly(grid), dtype=float)
    finite = np.isfinite(hv)
    viol = np.full(grid.shape, -np.inf)
    viol[finite] = (fv[finite] - hv[finite]) / np.maximum(1.0, np.abs(hv[finite]))
    i = int(np.argmax(viol))
    max_violation = float(viol[i])
    coeffs = poly.gegenbauer_coeffs[1:]
    if coeffs.size:
        j = int(np.argmin(coeffs))
        min_coeff, worst_j = float(coeffs[j]), j + 1
    else:
        min_coeff, worst_j = None, None
    return Feasibility(
        f_le_h=max_violation <= tol,
        gegenbauer_nonneg=min_coeff is None or min_coeff >= -coef_tol,
        max_violation=max_violation,
        worst_t=float(grid[i]),
        min_coeff=min_coeff,
        worst_coeff_index=worst_j,
    )


def lp_value_of(f, n: int, N: float) -> float:
    """Bound ``N (f_0 N - f(1))`` delivered by a feasible polynomial ``f``."""
    poly = f.poly if isinstance(f, HermiteInterpolant) else f
    poly = poly.with_gegenbauer(n)
    f0 = poly.gegenbauer_coeffs[0]
    return float(N * (f0 * N - poly(1.0)))


def _report(rule: QuadratureRule, h: Potential, enforce_monotone: bool, tol: float = FEAS_TOL) -> UlbReport:
    notes = []
    monotone_ok = True
    mono = check_abs_monotone(h, min(rule.tau + 1, 30), min_order=h.monotone_from)
    if not mono.ok:
        msg = f"{h.label} fails absolute monotonicity at orders {mono.failing_orders} (worst {mono.worst})"
        if enforce_monotone:
            raise PotentialError(msg)
        log.warning(msg)
        notes.append(msg)
        monotone_ok = False
    hv = np.asarray(h.eval(rule.nodes), dtype=float)
    value = float(rule.N**2 * np.dot(rule.weights, hv))
    interp = hermite_interpolant(rule, h)
    feas = certify_feasibility(interp, h, rule.n, tol=tol)
    if not feas.ok:
        notes.append("feasibility certificate failed")
        log.warning("ULB for (%s, %s, %s) unverified: %s", rule.n, rule.N, h.label, feas)
    lp = lp_value_of(interp, rule.n, rule.N)
    return UlbReport(rule.ctx, rule, h.label, value, interp, feas, lp, monotone_ok, notes)


def ulb(n: int, N: float, h: Potential, enforce_monotone: bool = True, tol: float = FEAS_TOL) -> UlbReport:
    """Universal lower bound ``N^2 sum_i rho_i h(alpha_i)`` on the minimal h-energy of N points on S^{n-1}."""
    if N < 2:
        raise ValueError("N must be >= 2")
    rule = antipodal_rule(n) if N == 2 else build_rule(n, N)
    return _report(rule, h, enforce_monotone, tol)


def suboptimal_lp(
    n: int, N: float, m: int, h: Potential, enforce_monotone: bool = True, tol: float = FEAS_TOL
) -> UlbReport:
    """Optimal LP bound over polynomials of degree at most ``m <= tau(n, N)``."""
    if N == 2:
        if m != 1:
            raise ValueError("N = 2 only admits m = 1")
        return ulb(n, N, h, enforce_monotone, tol)
    return _report(build_rule_degree(n, N, m), h, enforce_monotone, tol)

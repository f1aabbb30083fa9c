"""Test functions ``Q_j(n, s)`` and improvement of the universal bound by higher degrees.

``Q_j = 1/N + sum_i rho_i P_j^{(n)}(alpha_i)`` vanishes for ``1 <= j <= tau``.
A negative value for some ``j > tau`` means the bound can be raised with a
polynomial of degree ``j``; nonnegativity for every ``j > tau`` means the
Hermite interpolant solves the full linear program.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bounds import BoundContext
from .orthopoly import (
    Polynomial,
    gegenbauer_derivative,
    gegenbauer_eval,
    gegenbauer_table,
    gegenbauer_to_monomial,
)
from .potentials import Potential, custom
from .quadrature import QuadratureRule, build_rule
from .ulb import (
    FEAS_TOL,
    Feasibility,
    HermiteInterpolant,
    certify_feasibility,
    hermite_interpolant,
    lp_value_of,
    ulb,
)

NEG_TOL = 1e-9
ANTIPODAL_TOL = 1e-12
EPS_GRID = 2000


def test_function(rule: QuadratureRule, j: int) -> float:
    if j < 0:
        raise ValueError("j must be >= 0")
    return 1.0 / rule.N + float(np.dot(rule.weights, gegenbauer_eval(rule.n, j, rule.nodes)))


def test_functions(rule: QuadratureRule, js) -> dict:
    """``{j: Q_j}``; one recurrence pass covers every requested degree."""
    js = [int(j) for j in js]
    if not js:
        return {}
    if min(js) < 0:
        raise ValueError("j must be >= 0")
    tab = gegenbauer_table(rule.n, max(js), rule.nodes)
    q = 1.0 / rule.N + tab @ rule.weights
    return {j: float(q[j]) for j in js}


# the names collide with pytest's collection pattern
test_function.__test__ = False
test_functions.__test__ = False


def emn_envelope(n: int, j: int, t: float) -> float:
    """Upper bound for ``|P_j^{(n)}(t)|`` on (-1, 1), computed in log space."""
    if not -1 < t < 1:
        raise ValueError("t must lie strictly inside (-1, 1)")
    log_val = (
        math.lgamma((n - 1) / 2)
        - (n - 2) / 4 * math.log1p(-t * t)
        + 0.5
        * (
            (n - 2) * math.log(2)
            + 1
            + math.log(4 + (n - 3) * math.sqrt(2))
            + math.lgamma(j + 1)
            - math.log(math.pi)
            - math.log(2 * j + n - 2)
            - math.lgamma(j + n - 2)
        )
    )
    return math.exp(log_val)


@dataclass(frozen=True)
class CutoffChoice:
    t: float
    threshold: float
    case: str


def cutoff_point(rule: QuadratureRule) -> CutoffChoice:
    """Node and threshold used to define ``j_0``."""
    N = rule.N
    a1, r1 = rule.nodes[0], rule.weights[0]
    if a1 > -1:
        return CutoffChoice(float(a1), 1 / (N - 1), "alpha_1 > -1")
    if abs(r1 - 1 / N) <= ANTIPODAL_TOL:
        return CutoffChoice(float(rule.nodes[1]), 2 / (N - 2), "alpha_1 = -1, rho_1 = 1/N")
    return CutoffChoice(float(rule.nodes[1]), 1 / (N - 1), "alpha_1 = -1, rho_1 < 1/N")


def j0_cutoff(n: int, N: float, rule: Optional[QuadratureRule] = None) -> int:
    """Smallest ``j > tau`` whose envelope at the cutoff node drops below the threshold."""
    rule = rule or build_rule(n, N)
    choice = cutoff_point(rule)
    j = rule.tau + 1
    while emn_envelope(n, j, choice.t) >= choice.threshold:
        j += 1
    return j


@dataclass
class TestFunctionScan:
    __test__ = False  # not a pytest class

    ctx: BoundContext
    rule: QuadratureRule
    values: dict
    j0: Optional[int]
    negative_js: list = field(default_factory=list)
    indeterminate_js: list = field(default_factory=list)

    @property
    def all_nonneg_upto_j0(self) -> bool:
        return not any(j < self.j0 for j in self.negative_js)

    @property
    def lp_optimal(self) -> bool:
        """Every ``Q_j`` with ``tau < j < j0`` is nonnegative, hence all ``j > tau`` are."""
        return self.all_nonneg_upto_j0

    @property
    def conclusion(self) -> str:
        tau = self.ctx.tau
        if self.negative_js:
            js = ", ".join(str(j) for j in self.negative_js)
            return f"ULB improvable: Q_j < 0 for j in {{{js}}}, so polynomials of degree > {tau} beat the bound"
        text = (
            f"LP-optimal at degree {tau}: Q_j >= 0 for all j > {tau}, so the degree-{tau} interpolant solves the "
            "full LP and the ULB is the LP optimum; any code of this size whose energy exceeds the ULB is not "
            "LP-universally optimal"
        )
        if self.indeterminate_js:
            text += f" (Q_j within tolerance of 0 for j in {{{', '.join(map(str, self.indeterminate_js))}}})"
        return text

    def to_dict(self) -> dict:
        return {
            "n": self.ctx.n,
            "N": self.ctx.N,
            "tau": self.ctx.tau,
            "s": self.ctx.s,
            "j0": self.j0,
            "Q": {str(j): q for j, q in self.values.items()},
            "negative_js": self.negative_js,
            "indeterminate_js": self.indeterminate_js,
            "all_nonneg_upto_j0": self.all_nonneg_upto_j0,
            "lp_optimal": self.lp_optimal,
            "conclusion": self.conclusion,
        }


def lp_optimality_verdict(n: int, N: float, j_max_extra: int = 0, tol: float = NEG_TOL) -> TestFunctionScan:
    """Scan ``Q_j`` for ``tau < j <= max(j0 - 1, tau + j_max_extra)`` and classify the signs."""
    rule = build_rule(n, N)
    j0 = j0_cutoff(n, N, rule)
    hi = max(j0 - 1, rule.tau + j_max_extra)
    values = test_functions(rule, range(rule.tau + 1, hi + 1))
    neg = [j for j, q in values.items() if q < -tol]
    indet = [j for j, q in values.items() if abs(q) <= tol]
    return TestFunctionScan(rule.ctx, rule, values, j0, neg, indet)


@dataclass
class Improvement:
    n: int
    N: float
    j: int
    potential: str
    ulb: float
    value: float
    epsilon: float
    q_j: float
    polynomial: Polynomial
    base: HermiteInterpolant
    feasibility: Feasibility
    base_feasibility: Feasibility

    @property
    def predicted(self) -> float:
        return self.ulb - self.epsilon * self.N**2 * self.q_j

    @property
    def certified(self) -> bool:
        return self.epsilon > 0 and self.feasibility.ok and self.base_feasibility.gegenbauer_nonneg

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "j": self.j,
            "potential": self.potential,
            "ulb": self.ulb,
            "improved": self.value,
            "predicted": self.predicted,
            "epsilon": self.epsilon,
            "Q_j": self.q_j,
            "gegenbauer_coeffs": list(map(float, self.polynomial.gegenbauer_coeffs)),
            "feasibility": self.feasibility.to_dict(),
            "certified": self.certified,
        }


def max_epsilon(h: Potential, n: int, j: int, grid_points: int = EPS_GRID) -> float:
    """Largest ``eps`` with ``(h - eps P_j^{(n)})^{(i)} >= 0`` for ``i <= j`` on the sample grid."""
    grid = np.linspace(-1.0, 1.0 - 1e-6, grid_points)
    eps = math.inf
    for i in range(j + 1):
        hd = np.asarray(h.deriv(grid, i), dtype=float)
        pd = np.asarray(gegenbauer_derivative(n, j, grid, i), dtype=float)
        pos = pd > 0
        if np.any(pos):
            eps = min(eps, float(np.min(hd[pos] / pd[pos])))
    return max(eps, 0.0)


def shifted_potential(h: Potential, n: int, j: int, eps: float) -> Potential:
    """``h - eps P_j^{(n)}``."""

    def value(t):
        return h.eval(t) - eps * gegenbauer_eval(n, j, t)

    def deriv(t, i):
        return h.deriv(t, i) - eps * gegenbauer_derivative(n, j, t, i)

    return custom(value, deriv, name=f"{h.label}-eps*P{j}", singular_at_one=h.singular_at_one)


def improve_bound(
    n: int, N: float, h: Potential, j: int, eps: Optional[float] = None, tol: float = FEAS_TOL
) -> Improvement:
    """Raise the universal bound with ``f = eps P_j + g`` where ``g`` interpolates ``h - eps P_j``.

    Requires ``Q_j < 0``. ``eps`` defaults to the largest grid-feasible value.
    """
    base = ulb(n, N, h)
    rule = base.rule
    if j <= rule.tau:
        raise ValueError(f"j={j} must exceed tau={rule.tau}")
    q = test_function(rule, j)
    if eps is None:
        if not q < -NEG_TOL:
            raise ValueError(f"Q_{j}({n}, s) = {q:.3e} is not negative; no improvement of degree {j}")
        eps = max_epsilon(h, n, j)
        if eps <= 0:
            raise RuntimeError(f"no positive eps keeps h - eps*P_{j} absolutely monotone")
    h_shift = shifted_potential(h, n, j, eps)
    g = hermite_interpolant(rule, h_shift)
    geg = np.zeros(j + 1)
    geg[: len(g.gegenbauer_coeffs)] = g.gegenbauer_coeffs
    geg[j] += eps
    f = Polynomial(gegenbauer_to_monomial(n, geg), geg, n)
    feas = certify_feasibility(f, h, n, tol=tol)
    g_feas = certify_feasibility(g, h_shift, n, tol=tol)
    value = lp_value_of(f, n, N)
    return Improvement(n, N, j, h.label, base.value, value, eps, q, f, g, feas, g_feas)


def k1_threshold(n: int) -> float:
    return math.sqrt(n - 2)


def k2_threshold(n: int) -> int:
    """Smallest ``k >= 9`` with ``4n <= k^2 - 4k + 5 + sqrt(k^4 - 8k^3 - 6k^2 + 24k + 25)``."""
    k = 9
    while 4 * n > k * k - 4 * k + 5 + math.sqrt(k**4 - 8 * k**3 - 6 * k**2 + 24 * k + 25):
        k += 1
    return k


def predicted_improvable(n: int, tau: int) -> bool:
    """Informational: whether the known thresholds already predict ``Q_{2k+3} < 0``.

    Even ``tau = 2k`` needs ``k >= sqrt(n - 2)``; odd ``tau = 2k - 1`` needs ``k >= k2(n)``.
    """
    if tau % 2 == 0:
        return tau // 2 >= k1_threshold(n)
    return (tau + 1) // 2 >= k2_threshold(n)


def conjecture_evidence(dims, sizes) -> list:
    """Pairs ``(n, N)`` where ``Q_{tau+3}, Q_{tau+4} >= 0`` yet some later ``Q_j < 0`` below ``j0``.

    An empty result is numerical evidence that nonnegativity at ``tau+3`` and
    ``tau+4`` propagates to every degree.
    """
    counter = []
    for n in dims:
        for N in sizes:
            scan = lp_optimality_verdict(n, N, j_max_extra=4)
            tau = scan.ctx.tau
            if scan.values[tau + 3] >= -NEG_TOL and scan.values[tau + 4] >= -NEG_TOL and scan.negative_js:
                counter.append((n, N, scan.negative_js))
    return counter

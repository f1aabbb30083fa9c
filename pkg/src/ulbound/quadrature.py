"""Levenshtein 1/N-quadrature rules.

A rule ``{(alpha_i, rho_i)}`` satisfies

    f_0 = f(1)/N + sum_i rho_i f(alpha_i)

for every polynomial ``f`` of degree at most ``tau(n, N)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bounds import BoundContext, classify_tau, half_degree, solve_s, solve_s_extended
from .orthopoly import (
    JacobiParams,
    RootFindingError,
    all_roots,
    bracketed_roots,
    derivative_eval,
    gegenbauer_table,
    jacobi_eval,
    to_gegenbauer,
)

RESIDUAL_TOL = 1e-9


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    n: int
    N: float
    tau: int
    k: int
    s: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def ctx(self) -> BoundContext:
        return BoundContext(self.n, self.N, self.tau, self.k, self.s)

    def apply(self, values_at_nodes, value_at_one) -> float:
        """``f(1)/N + sum_i rho_i f(alpha_i)``."""
        return value_at_one / self.N + float(np.dot(self.weights, values_at_nodes))

    def gegenbauer_residuals(self, deg: int) -> np.ndarray:
        """``Q_j - delta_{j0}`` for ``j = 0..deg``; zero wherever the rule is exact."""
        tab = gegenbauer_table(self.n, deg, self.nodes)
        out = 1.0 / self.N + tab @ self.weights
        out[0] -= 1.0
        return out

    def exactness_residual(self, poly) -> float:
        """``f_0 - f(1)/N - sum rho_i f(alpha_i)`` for a ``Polynomial``."""
        f0 = to_gegenbauer(self.n, poly)[0]
        return f0 - self.apply(poly(self.nodes), poly(1.0))


def _combination_roots(params: JacobiParams, deg: int, s: float) -> np.ndarray:
    """Zeros of ``P_deg(t) P_{deg-1}(s) - P_deg(s) P_{deg-1}(t)`` in [-1, 1], largest set to ``s``."""
    if deg == 1:
        return np.array([s])
    a_s = jacobi_eval(params, deg - 1, s)
    b_s = jacobi_eval(params, deg, s)

    def comb(t):
        return jacobi_eval(params, deg, t) * a_s - b_s * jacobi_eval(params, deg - 1, t)

    def dcomb(t):
        return derivative_eval(params, deg, t) * a_s - b_s * derivative_eval(params, deg - 1, t)

    # zeros of P_{deg-1} separate the zeros of the combination below s
    sep = all_roots(params, deg - 1)
    if not s > sep[-1]:
        raise QuadratureError(f"s={s} not above the largest zero {sep[-1]} of P_{deg - 1}")
    edges = np.concatenate(([-1.0], sep))
    lo, hi = edges[:-1], edges[1:]
    if abs(comb(-1.0)) < 1e-14 * max(1.0, abs(a_s), abs(b_s)):
        lower = [-1.0]
        lo, hi = lo[1:], hi[1:]
    else:
        lower = []
    try:
        inner = bracketed_roots(comb, dcomb, lo, hi) if len(lo) else np.array([])
    except RootFindingError as exc:
        raise QuadratureError(f"expected {deg} nodes, bracketing failed: {exc}") from None
    roots = np.concatenate((lower, inner, [s]))
    if len(roots) != deg or np.any(np.diff(roots) <= 0):
        raise QuadratureError(f"expected {deg} distinct nodes, got {roots}")
    return roots


def nodes_odd(n: int, k: int, s: float) -> np.ndarray:
    """Radau-type nodes (odd ``tau = 2k-1``) from Jacobi ``((n-1)/2, (n-3)/2)`` polynomials."""
    return _combination_roots(JacobiParams.adjacent(n, 1, 0), k, s)


def nodes_even(n: int, k: int, s: float) -> np.ndarray:
    """Lobatto-type nodes (even ``tau = 2k-2``): ``-1`` followed by the zeros of the degree ``k-1`` combination."""
    if k < 2:
        raise ValueError("even rules need k >= 2")
    inner = _combination_roots(JacobiParams.adjacent(n, 1, 1), k - 1, s)
    return np.concatenate(([-1.0], inner))


def weights_for(nodes, n: int, N: float, tau: int | None = None, require_positive: bool = True) -> np.ndarray:
    """Weights making the rule exact on ``P_0..P_{k-1}``; degrees up to ``tau`` are verified."""
    nodes = np.asarray(nodes, dtype=float)
    k = len(nodes)
    tab = gegenbauer_table(n, max(k - 1, tau or 0), nodes)
    rhs = -np.full(k, 1.0 / N)
    rhs[0] += 1.0
    weights = np.linalg.solve(tab[:k], rhs)
    if tau is not None and tau >= k:
        resid = tab[k:] @ weights + 1.0 / N
        worst = int(np.argmax(np.abs(resid)))
        if abs(resid[worst]) > RESIDUAL_TOL:
            raise QuadratureError(
                f"rule not exact at degree {k + worst}: residual {resid[worst]:.3e} (n={n}, N={N}, nodes={nodes})"
            )
    if require_positive and np.any(weights <= 0):
        raise QuadratureError(f"nonpositive weights {weights} at nodes {nodes} (n={n}, N={N})")
    return weights


def _assemble(n: int, N: float, tau: int, s: float) -> QuadratureRule:
    k = half_degree(tau)
    nodes = nodes_odd(n, k, s) if tau % 2 else nodes_even(n, k, s)
    weights = weights_for(nodes, n, N, tau)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(n, N, tau, k, s, nodes, weights)


@lru_cache(maxsize=512)
def build_rule(n: int, N: float) -> QuadratureRule:
    """The Levenshtein rule for ``(n, N)``, ``N >= 3``."""
    ctx = solve_s(classify_tau(n, N))
    return _assemble(n, N, ctx.tau, ctx.s)


@lru_cache(maxsize=512)
def build_rule_degree(n: int, N: float, m: int) -> QuadratureRule:
    """Rule exact on polynomials of degree ``m <= tau(n, N)`` with nodes from ``L_m(n, s) = N``."""
    tau = classify_tau(n, N).tau
    if not 1 <= m <= tau:
        raise ValueError(f"degree m={m} must lie in [1, tau={tau}]")
    if m == tau:
        return build_rule(n, N)
    return _assemble(n, N, m, solve_s_extended(n, N, m))


def antipodal_rule(n: int) -> QuadratureRule:
    """``N = 2``: the single node ``-1`` with weight ``1/2`` (exact through degree 1)."""
    nodes = np.array([-1.0])
    weights = np.array([0.5])
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(n, 2, 1, 1, -1.0, nodes, weights)

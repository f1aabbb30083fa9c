import numpy as np
import pytest

import oracles
from ulbound.orthopoly import Polynomial
from ulbound.potentials import PotentialError, custom, fejes_toth, gauss, korevaar, logarithmic, newton, riesz
from ulbound.quadrature import QuadratureRule, build_rule, weights_for
from ulbound.ulb import certify_feasibility, hermite_interpolant, lp_value_of, suboptimal_lp, ulb


def test_golden_4_24():
    rep = ulb(4, 24, newton(4))
    assert rep.value == pytest.approx(333, abs=1e-6)
    assert rep.verified
    assert rep.lp_value == pytest.approx(rep.value, rel=1e-9)


def test_simplex_n3():
    rep = ulb(3, 4, newton(3))
    assert rep.value == pytest.approx(12 * (8 / 3) ** -0.5, rel=1e-12)


def test_antipodal_pair():
    for h in (newton(5), gauss()):
        assert ulb(5, 2, h).value == pytest.approx(2 * h.eval(-1.0))


def test_value_is_weighted_sum():
    rule = build_rule(6, 50)
    h = gauss()
    rep = ulb(6, 50, h)
    assert rep.value == pytest.approx(50**2 * np.dot(rule.weights, h.eval(rule.nodes)), rel=1e-10)


def test_tangent_line_when_tau_is_one():
    rule = build_rule(3, 4)
    h = gauss()
    f = hermite_interpolant(rule, h)
    a = rule.nodes[0]
    assert f.degree == 1
    slope = h.deriv(a, 1)
    assert f.poly(0.3) == pytest.approx(h.eval(a) + slope * (0.3 - a))


def test_hermite_conditions_4_24():
    rule = build_rule(4, 24)
    h = newton(4)
    f = hermite_interpolant(rule, h)
    assert f.degree == 5 and f.poly.monomial_coeffs[-1] > 0
    np.testing.assert_allclose(f.poly(rule.nodes), h.eval(rule.nodes), atol=1e-10)
    fprime = np.polynomial.polynomial.polyval(rule.nodes, np.polynomial.polynomial.polyder(f.poly.monomial_coeffs))
    np.testing.assert_allclose(fprime, h.deriv(rule.nodes, 1), atol=1e-9)


def test_hermite_quadratic_by_hand():
    # nodes -1 (single) and -1/3 (double): three conditions, degree 2
    nodes = np.array([-1.0, -1 / 3])
    rule = QuadratureRule(3, 4, 2, 2, -1 / 3, nodes, weights_for(nodes, 3, 4, require_positive=False))
    h = gauss()
    f = hermite_interpolant(rule, h)
    a = -1 / 3
    A = np.array([[1, -1, 1], [1, a, a * a], [0, 1, 2 * a]])
    b = [h.eval(-1.0), h.eval(a), h.deriv(a, 1)]
    np.testing.assert_allclose(f.poly.monomial_coeffs, np.linalg.solve(A, b), atol=1e-14)


def test_certificate_4_24_and_gauss_sweep():
    assert ulb(4, 24, newton(4)).feasibility.ok
    for n in (3, 5, 8):
        for N in range(3, 60, 5):
            rep = ulb(n, N, gauss())
            if rep.ctx.tau <= 9:
                assert rep.feasibility.ok, (n, N)


def test_certificate_catches_non_monotone():
    h = custom(lambda t: -np.asarray(t, dtype=float), lambda t, i: -np.ones_like(np.asarray(t, dtype=float)) * (i == 1))
    f = Polynomial([0.0, 1.0])  # f(t) = t > -t for t > 0
    feas = certify_feasibility(f, h, 4)
    assert not feas.f_le_h and feas.worst_t > 0


def _square(t, i=0):
    t = np.asarray(t, dtype=float)
    return (t * t, 2 * t, 2 + 0 * t)[i] if i < 3 else 0 * t


def test_non_monotone_potential_rejected():
    h = custom(_square, _square)  # h' < 0 on [-1, 0)
    with pytest.raises(PotentialError):
        ulb(4, 24, h)
    rep = ulb(4, 24, h, enforce_monotone=False)
    assert not rep.verified and rep.notes


def test_lp_value_constant():
    assert lp_value_of(Polynomial([0.7]), 5, 10) == pytest.approx(10 * 9 * 0.7)


@pytest.mark.parametrize("h", [newton(4), riesz(1), gauss(), korevaar(0.4, 4), logarithmic(), fejes_toth(1.0)], ids=lambda h: h.label)
def test_quadrature_identity(h):
    for N in (5, 13, 24, 47):
        rep = ulb(4, N, h)
        assert rep.verified
        assert rep.lp_value == pytest.approx(rep.value, rel=1e-9, abs=1e-12)


def test_gegenbauer_coefficients_against_gauss_jacobi():
    rep = ulb(4, 24, newton(4))
    c = rep.interpolant.poly.monomial_coeffs
    want = oracles.gegenbauer_coeffs(4, lambda x: np.polynomial.polynomial.polyval(x, c), 5)
    np.testing.assert_allclose(rep.interpolant.gegenbauer_coeffs, want, atol=1e-12)


def test_suboptimal_chain():
    h = newton(4)
    vals = [suboptimal_lp(4, 24, m, h) for m in range(1, 6)]
    assert all(r.verified for r in vals)
    v = [r.value for r in vals]
    assert np.all(np.diff(v) > 0)
    assert v[-1] == pytest.approx(ulb(4, 24, h).value)
    # the constant coefficient f_0 matches the printed degree chain .499, .581, .658, .69, .71
    f0 = [r.interpolant.gegenbauer_coeffs[0] for r in vals]
    np.testing.assert_allclose(f0, [0.499, 0.581, 0.658, 0.69, 0.71], atol=0.006)


def test_suboptimal_rejects_large_m():
    with pytest.raises(ValueError):
        suboptimal_lp(4, 24, 6, newton(4))


def random_feasible(rep, h, n, rng, grid):
    """Shrink and perturb the optimal interpolant, then lower f_0 until u <= h on the grid."""
    g = rep.interpolant.gegenbauer_coeffs.copy()
    u = g * rng.uniform(0.0, 1.3, size=g.size)
    u[1:] = np.maximum(u[1:], 0)
    p = Polynomial.from_gegenbauer(n, u)
    hv = h.eval(grid)
    u[0] += np.min(hv - p(grid))
    return Polynomial.from_gegenbauer(n, u)


@pytest.mark.parametrize("n,N", [(4, 24), (3, 12)])
def test_no_feasible_polynomial_beats_ulb(n, N):
    h = newton(n)
    rep = ulb(n, N, h)
    rng = np.random.default_rng(7)
    grid = np.linspace(-1, 1 - 1e-9, 40_001)
    for _ in range(50):
        u = random_feasible(rep, h, n, rng, grid)
        assert certify_feasibility(u, h, n).ok
        assert lp_value_of(u, n, N) <= rep.value + 1e-9 * rep.value


def test_json_schema():
    d = ulb(4, 24, newton(4)).to_dict()
    for key in ("n", "N", "tau", "s", "nodes", "weights", "ulb", "gegenbauer_coeffs", "feasibility"):
        assert key in d


def test_second_derivative_touching():
    # h - f has a double root at interior nodes, so it stays nonnegative nearby
    rule = build_rule(4, 24)
    h = newton(4)
    f = hermite_interpolant(rule, h)
    for a in rule.nodes:
        t = np.array([a - 1e-3, a + 1e-3])
        assert np.all(h.eval(t) - f.poly(t) >= -1e-12)

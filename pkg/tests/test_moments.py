import cmath
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from cbm.errors import CapacityError, DomainError
from cbm.moments import (
    EnsembleParams,
    ab_bounds,
    bounds_for,
    closed_form_partitions,
    closed_forms,
    coe_trace_second_moment,
    corollary_bound,
    cross_moment_bound_check,
    cue_expected,
    dirichlet_moment,
    exact_moment,
    gamma_bounds,
    i_of,
    limit_check,
    moment_report,
    n_factor,
    sandwich_check,
    tail_rate_check,
    weingarten,
)
from cbm.partitions import enumerate_partitions

F = Fraction
TWO_PI = 2 * math.pi


def P(n, beta):
    return EnsembleParams.from_beta(n, beta)


# --- quadrature oracle ------------------------------------------------------


def quad_moment_n3(mu, nu, beta, tol=1e-9):
    """E[Re p_mu conj p_nu] at n=3 by 2D quadrature with theta_1 pinned at 0.

    The inner range is split at theta_3 = theta_2, where the weight has a cusp.
    """

    def obs(t2, t3):
        z = (1.0, cmath.exp(1j * t2), cmath.exp(1j * t3))
        v = 1.0 + 0j
        for r in mu:
            v *= sum(x**r for x in z)
        for r in nu:
            v *= sum(x**r for x in z).conjugate()
        return v.real

    def w(t2, t3):
        s = abs(2 * math.sin(t2 / 2)) * abs(2 * math.sin(t3 / 2)) * abs(2 * math.sin((t2 - t3) / 2))
        return s**beta

    def integral(h):
        opts = dict(epsabs=tol, epsrel=tol)
        lo = integrate.dblquad(h, 0, TWO_PI, 0, lambda t2: t2, **opts)[0]
        hi = integrate.dblquad(h, 0, TWO_PI, lambda t2: t2, TWO_PI, **opts)[0]
        return lo + hi

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integral(lambda t3, t2: w(t2, t3) * obs(t2, t3)) / integral(lambda t3, t2: w(t2, t3))


@pytest.mark.slow
@pytest.mark.parametrize("beta", [F(1), F(4), F(2, 3), F(5, 2)])
@pytest.mark.parametrize("mu,nu", [((1,), (1,)), ((2,), (1, 1)), ((2, 1), (2, 1)), ((3,), (1, 1, 1)), ((3,), (3,))])
def test_exact_moment_matches_quadrature(beta, mu, nu):
    exact = exact_moment(mu, nu, P(3, beta))
    assert quad_moment_n3(mu, nu, float(beta)) == pytest.approx(float(exact), abs=1e-6)


def i_two_product(m, beta):
    b = F(beta)
    out = F(1)
    for j in range(1, m + 1):
        out *= (j - 1 - b / 2) / (j + b / 2)
    return out


@pytest.mark.parametrize("beta,top", [(F(1), 12), (F(2), 9), (F(4), 9), (F(2, 3), 9), (F(5), 8), (F(7, 3), 8)])
def test_i_of_two_particles_product_formula(beta, top):
    for m in range(1, top + 1):
        assert i_of(m, P(2, beta)) == i_two_product(m, beta)


@pytest.mark.parametrize("beta,m", [(1.0, 1), (1.0, 3), (4.0, 2), (2.0 / 3, 5)])
def test_i_of_two_particles_by_quadrature(beta, m):
    def w(x):
        return abs(2 * math.sin(x / 2)) ** beta

    num = integrate.quad(lambda x: w(x) * math.cos(m * x), 0, 2 * math.pi, limit=200)[0]
    den = integrate.quad(w, 0, 2 * math.pi, limit=200)[0]
    assert num / den == pytest.approx(float(i_of(m, P(2, F(beta).limit_denominator(10)))), abs=1e-9)


# --- reference values ---------------------------------------------------------


def test_n_factor_examples():
    for n in (2, 5, 9):
        for a in (F(1, 2), F(2), F(7, 3)):
            p = EnsembleParams(n, a)
            assert n_factor((1,), p) == n / (n + a - 1)
            assert n_factor((2,), p) == n * (n + a) / ((n + a - 1) * (n + 2 * a - 1))
            assert n_factor((), p) == 1
    p = EnsembleParams(4, 1)
    assert all(n_factor(lam, p) == 1 for k in range(1, 7) for lam in enumerate_partitions(k) if len(lam) <= 4)
    with pytest.raises(DomainError):
        n_factor((1, 1, 1), EnsembleParams(2, 1))


def test_exact_moment_examples():
    assert exact_moment((1,), (1,), P(3, 1)) == F(3, 2)
    assert exact_moment((1,), (1,), P(3, 4)) == F(3, 5)
    for n in range(2, 8):
        assert exact_moment((2,), (1, 1), P(n, 2)) == 0
    for n in range(3, 8):
        assert exact_moment((3,), (2, 1), P(n, 2)) == 0
    assert exact_moment((), (), P(3, 1)) == 1


def test_exact_moment_capacity():
    with pytest.raises(CapacityError):
        exact_moment((13,), (13,), P(3, 1))


def test_weight_mismatch_vanishes():
    for mu in [(1,), (2, 1), (3,)]:
        for nu in [(2,), (1, 1, 1, 1), ()]:
            if sum(mu) != sum(nu):
                assert exact_moment(mu, nu, P(4, F(2, 3))) == 0


def test_degenerate_single_angle():
    for a in (F(1, 3), F(1), F(4)):
        p = EnsembleParams(1, a)
        for m in range(1, 9):
            assert exact_moment((m,), (m,), p) == 1
        assert exact_moment((1, 1), (2,), p) == 1
        assert exact_moment((2, 1), (1, 1, 1), p) == 1


@pytest.mark.parametrize("a", [F(2, 5), F(3), F(1, 2)])
def test_hermitian_and_cauchy_schwarz(a):
    for k in range(1, 7):
        parts = enumerate_partitions(k)
        for n in (k, k + 3):
            p = EnsembleParams(n, a)
            diag = {mu: exact_moment(mu, mu, p) for mu in parts}
            for mu in parts:
                for nu in parts:
                    v = exact_moment(mu, nu, p)
                    assert v == exact_moment(nu, mu, p)
                    assert v * v <= diag[mu] * diag[nu]


def test_ab_bounds_examples():
    assert ab_bounds(3, EnsembleParams(5, 1)) == (1, 1)
    assert ab_bounds(1, EnsembleParams(3, 2)) == (F(3, 4), 1)
    assert ab_bounds(2, EnsembleParams(4, F(1, 2))) == (1, F(36, 25))
    with pytest.raises(DomainError):
        ab_bounds(5, EnsembleParams(2, F(1, 2)))


def test_ab_bounds_warns_below_k(caplog):
    with caplog.at_level("WARNING"):
        ab_bounds(4, EnsembleParams(3, 2))
    assert "not guaranteed" in caplog.text


def test_gamma_bounds_examples():
    for K in range(1, 9):
        assert gamma_bounds(K, EnsembleParams(K + 1, 1)) == (1, 1)
    with pytest.raises(CapacityError):
        gamma_bounds(13, EnsembleParams(20, 1))


def test_sandwich_example():
    rep = sandwich_check((1,), EnsembleParams(3, 2))
    assert rep.normalized == F(3, 4)
    assert rep.bounds.A == F(3, 4) and rep.bounds.B == 1
    assert rep.holds
    with pytest.raises(DomainError):
        sandwich_check((2, 1), EnsembleParams(2, 2))


def test_sandwich_coe_hand_values():
    rep = sandwich_check((2,), P(3, 1))
    b = rep.bounds
    assert (rep.normalized, b.A, b.B, b.Gamma, b.gamma) == (F(7, 12), F(4, 9), 1, F(5, 8), F(1, 2))


def test_cross_moment_examples():
    r = cross_moment_bound_check((2,), (1, 1), P(5, 2))
    assert r.lhs == 0 == r.rhs and r.holds
    r = cross_moment_bound_check((2,), (1, 1), P(4, 1))
    assert r.value == F(8, 35) and r.lhs == F(64, 1225) and r.lhs <= r.rhs
    r = cross_moment_bound_check((3,), (2, 1), P(6, 4))
    assert r.holds
    with pytest.raises(ValueError):
        cross_moment_bound_check((2,), (2,), P(4, 1))


def test_corollary_bound_examples():
    assert corollary_bound(3, EnsembleParams(6, 1)) == 0
    assert corollary_bound(1, EnsembleParams(2, 2)) == 3
    assert abs(sandwich_check((1,), EnsembleParams(2, 2)).normalized - 1) == F(1, 3)
    assert corollary_bound(2, EnsembleParams(4, F(1, 2))) == F(3, 2)
    with pytest.raises(DomainError):
        corollary_bound(3, EnsembleParams(5, 2))


def test_bounds_json_schema():
    doc = moment_report((2, 1), (2, 1), P(6, 1)).to_json()
    assert set(doc) == {"mu", "nu", "n", "alpha", "beta", "value", "value_float", "bounds"}
    assert set(doc["bounds"]) == {"A", "B", "Gamma", "gamma", "corollary"}
    assert doc["alpha"] == "2/1" and doc["beta"] == "1/1"
    assert bounds_for(2, P(3, 1)).corollary is None


def test_cue_expected_examples():
    assert cue_expected((2, 1, 1), (2, 1, 1), 4) == 4
    assert cue_expected((5,), (5,), 3) == 3
    assert cue_expected((2,), (3,), 1) == 0
    assert cue_expected((2, 1), (2, 1), 2) is None


def test_closed_form_examples():
    assert closed_forms(P(3, 1)) == (F(3, 2), F(13, 3), F(7, 3), F(1, 3))
    for n in range(2, 9):
        assert closed_forms(P(n, 2)) == (1, 2, 2, 0)
    assert closed_forms(P(3, 4)) == (F(3, 5), F(11, 15), F(23, 15), F(-1, 15))
    with pytest.raises(DomainError):
        closed_forms(P(1, 1))


@pytest.mark.parametrize("alpha", [F(2), F(1), F(1, 2), F(3), F(2, 5)])
def test_closed_forms_agree_with_exact(alpha):
    for n in range(2, 51):
        p = EnsembleParams(n, alpha)
        for want, (mu, nu) in zip(closed_forms(p), closed_form_partitions()):
            assert exact_moment(mu, nu, p) == want


def test_i_of_examples():
    assert i_of(1, P(3, 2)) == F(-1, 3)
    assert all(i_of(m, P(2, 2)) == 0 for m in range(2, 13))
    assert i_of(1, P(2, 1)) == F(-1, 3)
    with pytest.raises(DomainError):
        i_of(1, P(1, 1))


def test_tail_rate_examples():
    r = tail_rate_check(P(2, 2), range(1, 11))
    assert r.d[0] == 1 and all(d == 0 for d in r.d[1:])
    assert r.fitted_constant == 1
    r = tail_rate_check(P(2, 1), range(1, 11))
    assert all(x > y for x, y in zip(r.d, r.d[1:]))
    assert r.d[:3] == (F(2, 3), F(2, 15), F(2, 35))
    r = tail_rate_check(P(2, 4), range(1, 11))
    assert r.bounded
    r = tail_rate_check(P(2, F(1, 2)), range(1, 11))
    assert isinstance(r.scaled[0], float) and r.bounded


def test_dirichlet_examples():
    for n in (2, 5, 11):
        assert dirichlet_moment([1], n) == F(1, n)
        assert dirichlet_moment([2], 2 * n) == F(3, 2 * n * (2 * n + 2))
        assert dirichlet_moment([1, 1], 2 * n) == F(1, 2 * n * (2 * n + 2))
        assert dirichlet_moment([], n) == 1


def test_dirichlet_against_monte_carlo():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((400_000, 4)) ** 2
    xi = x / x.sum(axis=1, keepdims=True)
    est = (xi[:, 0] ** 2 * xi[:, 1]).mean()
    assert est == pytest.approx(float(dirichlet_moment([2, 1], 4)), rel=0.02)


def test_weingarten_values():
    for n in (2, 3, 7):
        wg = weingarten(2, n)
        assert wg[(0, 1)] == F(1, n * n - 1)
        assert wg[(1, 0)] == F(-1, n * (n * n - 1))
    wg3 = weingarten(3, 4)
    n = 4
    assert wg3[(0, 1, 2)] == F(n * n - 2, n * (n * n - 1) * (n * n - 4))
    assert wg3[(1, 2, 0)] == F(2, n * (n * n - 1) * (n * n - 4))
    with pytest.raises(DomainError):
        weingarten(3, 2)


@pytest.mark.parametrize("n,want", [(2, F(4, 3)), (3, F(3, 2)), (100, F(200, 101))])
def test_coe_three_ways(n, want):
    trio = coe_trace_second_moment(n)
    assert trio.agree and trio.via_jack == want


def test_coe_large_n():
    n = 10**6
    trio = coe_trace_second_moment(n)
    assert trio.via_dirichlet == trio.via_weingarten == F(2000000, 1000001)


def test_limit_examples():
    rep = limit_check((1,), (1,), 2, [2, 5, 10, 100, 1000])
    assert rep.limit == 2
    assert rep.deviations == tuple(F(2, n + 1) for n in rep.ns)
    assert rep.eventually_decreasing and rep.below(F(1, 100))
    rep = limit_check((2,), (1, 1), 2, [1000])
    assert abs(rep.rate_scaled[-1] - 8) <= F(8, 100)
    rep = limit_check((2, 1), (2, 1), 1, [3, 4, 10, 50])
    assert all(d == 0 for d in rep.deviations)


def test_params_validation():
    with pytest.raises(DomainError):
        EnsembleParams(0, 1)
    with pytest.raises(DomainError):
        EnsembleParams(3, 0)
    with pytest.raises(TypeError):
        EnsembleParams(3, 0.5)
    assert P(3, F(2, 3)).alpha == 3 and P(3, 4).beta == 4

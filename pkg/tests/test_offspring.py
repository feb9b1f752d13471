import math

import numpy as np
import pytest
from scipy import integrate, special

from reducedbp import (
    DomainError,
    ParameterError,
    alpha_limit_law,
    binary_law,
    build_heavy_tail,
    pmf_alpha,
    point_mass,
    sibuya_law,
    sibuya_pmf,
    stream,
    zero_limit_law,
)
from reducedbp.offspring import series_constant

from conftest import heavy


def _direct_s1(n_terms=10**8, chunk=10**7):
    """sum_{k>=1} 1/(k ln(e+k)^2): brute-force head plus a bracketed integral remainder."""
    head = 0.0
    for lo in range(1, n_terms + 1, chunk):
        k = np.arange(lo, min(lo + chunk, n_terms + 1), dtype=float)
        head += float(np.sum(1.0 / (k * np.log(math.e + k) ** 2)))

    def rem(a):
        # substitute x = e^y; integrand 1/ln(e + e^y)^2
        val, _ = integrate.quad(lambda y: 1.0 / (y + math.log1p(math.exp(1.0 - y))) ** 2, math.log(a), np.inf,
                                epsabs=1e-15, epsrel=1e-13, limit=200)
        return val

    lower, upper = rem(n_terms + 1), rem(n_terms)
    return head + 0.5 * (lower + upper), 0.5 * (upper - lower)


@pytest.mark.slow
def test_heavy_tail_constant_matches_brute_force_sum():
    s1, half_width = _direct_s1()
    assert half_width < 1e-10
    law = build_heavy_tail(1.0, tol=1e-10)
    assert law.C == pytest.approx(0.5 / s1, rel=2e-10)
    assert series_constant(1.0) == pytest.approx(s1, abs=1e-9)


@pytest.mark.parametrize("beta", [0.2, 1.0, 3.0, 5.0])
def test_heavy_tail_mean_and_normalisation(beta):
    law = heavy(beta)
    k = np.arange(1, 10**6 + 1)
    # sum of tails from 1 equals 1 - T0 up to the analytic remainder
    from reducedbp.offspring import tail_integral

    partial = math.fsum(law.tail(k))
    assert partial + law.C * tail_integral(10**6 + 0.5, beta) == pytest.approx(0.5, abs=1e-6)
    assert law.tail(0) == 0.5
    assert law.mean == 1.0
    kk = np.arange(0, 10**6 + 1)
    assert math.fsum(law.pmf(kk)) + law.tail(10**6) == pytest.approx(1.0, abs=1e-10)


def test_heavy_tail_pmf_zero_and_monotone_tail(heavy1):
    assert heavy1.pmf(0) == 0.5
    t = heavy1.tail(np.arange(0, 5000))
    assert np.all(np.diff(t) <= 0)
    assert heavy1.T0 >= heavy1.tail(1)
    assert np.all(heavy1.pmf(np.arange(0, 5000)) >= 0)


def test_heavy_tail_pmf_is_tail_difference(heavy1):
    k = np.arange(1, 2000)
    assert np.allclose(heavy1.pmf(k), heavy1.tail(k - 1) - heavy1.tail(k), rtol=1e-9, atol=1e-16)


def test_heavy_tail_regular_variation_constant(heavy1):
    k = 1e12
    assert heavy1.tail(np.array([k]))[0] * k * math.log(k) ** 2 == pytest.approx(heavy1.C, rel=1e-2)


@pytest.mark.parametrize("beta,tol", [(0.0, 1e-10), (-1.0, 1e-10), (1.0, 1e-3), (1.0, 0.0)])
def test_heavy_tail_rejects_bad_parameters(beta, tol):
    with pytest.raises(ParameterError):
        build_heavy_tail(beta, tol=tol)


def test_pmf_alpha_examples():
    assert pmf_alpha(1.0, 2) == 1.0
    assert pmf_alpha(1.0, 3) == 0.0
    assert pmf_alpha(0.0, 2) == pytest.approx(0.5)
    assert pmf_alpha(0.0, 3) == pytest.approx(1 / 6)
    assert pmf_alpha(0.5, 2) == pytest.approx(0.75, rel=1e-14)
    with pytest.raises(DomainError):
        pmf_alpha(0.5, 1)


@pytest.mark.parametrize("alpha", [0.0, 0.1, 0.5, 0.9])
def test_pmf_alpha_sums_to_one(alpha):
    k = np.arange(2, 10**6 + 1)
    law = alpha_limit_law(alpha)
    assert math.fsum(pmf_alpha(alpha, k)) + law.tail(10**6) == pytest.approx(1.0, abs=1e-10)
    assert law.pmf(0) == 0.0 and law.pmf(1) == 0.0


def test_pmf_alpha_large_k_is_finite():
    v = pmf_alpha(0.3, np.array([10, 1000, 10**7]))
    assert np.all(np.isfinite(v)) and np.all(v > 0)


def test_stochastic_domination_in_alpha():
    k = np.arange(0, 1001)
    alphas = [0.0, 0.1, 0.3, 0.5, 0.9, 1.0]
    tails = [alpha_limit_law(a).tail(k) for a in alphas]
    for lo, hi in zip(tails, tails[1:]):
        assert np.all(hi <= lo + 1e-15)


def test_sibuya_pmf_examples():
    assert sibuya_pmf(1.0, 1) == 1.0
    assert sibuya_pmf(0.5, 2) == pytest.approx(0.125)
    for g in (0.1, 0.5, 0.9):
        assert sibuya_pmf(g, 1) == pytest.approx(g)
    with pytest.raises(DomainError):
        sibuya_pmf(0.5, 0)


@pytest.mark.parametrize("gamma", [0.05, 0.3, 0.7])
def test_sibuya_recursion_against_rising_factorial_tail(gamma):
    kmax = 5000
    p = sibuya_pmf(gamma, np.arange(1, kmax + 1))
    tail = math.exp(special.gammaln(kmax + 1 - gamma) - special.gammaln(1 - gamma) - special.gammaln(kmax + 1))
    assert math.fsum(p) + tail == pytest.approx(1.0, abs=1e-10)
    assert sibuya_law(gamma).tail(kmax) == pytest.approx(tail, rel=1e-10)


def test_sibuya_generating_function():
    gamma, s = 0.4, 0.6
    k = np.arange(1, 4000)
    assert np.dot(sibuya_pmf(gamma, k), s**k) == pytest.approx(1 - (1 - s) ** gamma, abs=1e-12)


@pytest.mark.parametrize("gamma", [0.2, 0.5, 0.9])
def test_sibuya_sampler_chi_square(gamma):
    from reducedbp.harness import discrete_chi_square

    x = sibuya_law(gamma).sample(stream(21, 0), 10**6)
    assert discrete_chi_square(x, lambda k: sibuya_pmf(gamma, k)).pvalue > 1e-3


def test_point_mass_sampler_is_constant():
    assert np.all(alpha_limit_law(1.0).sample(stream(1, 0), 1000) == 2)
    assert np.all(point_mass(3).sample(stream(1, 1), 1000) == 3)


def test_zero_limit_frequency_of_two():
    n = 10**6
    x = zero_limit_law().sample(stream(11, 0), n)
    assert abs(np.mean(x == 2) - 0.5) < 3 * math.sqrt(0.25 / n)


def test_quantile_tie_breaking_is_strict(heavy1):
    # exactly at u = tail(k) the draw must be k + 1 (smallest k with tail(k) < u)
    for k in (0, 1, 5, 100):
        u = float(heavy1.tail(k))
        assert heavy1.quantile(u) == k + 1
        assert heavy1.quantile(np.nextafter(u, 1.0)) <= k
    assert heavy1.quantile(1.0) == 0


def test_quantile_matches_tail_definition_far_out(heavy1):
    us = np.array([1e-3, 1e-6, 1e-9, 1e-12, 1e-15])
    ks = heavy1.quantile(us)
    assert np.all(heavy1.tail(ks) < us)
    assert np.all(heavy1.tail(ks - 1) >= us)


def test_sampler_determinism(heavy1):
    a = heavy1.sample(stream(3, 7), 1000)
    b = heavy1.sample(stream(3, 7), 1000)
    assert np.array_equal(a, b)


def test_binary_law_mean_and_pmf():
    law = binary_law()
    assert law.mean == pytest.approx(1.0)
    assert law.pmf(np.array([0, 1, 2, 3])).tolist() == [0.5, 0.0, 0.5, 0.0]


def test_bad_uniform_rejected(heavy1):
    with pytest.raises(DomainError):
        heavy1.quantile(0.0)

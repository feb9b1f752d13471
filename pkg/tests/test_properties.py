import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from reducedbp import CoalescentSpec, F_closed, LimitConfig, merger_rate, next_merger_law, pmf_alpha, sibuya_pmf
from reducedbp.harness import binomial_ci, ks_distance
from reducedbp.limit_process import marginal_from_uniform, tau_from_uniform

from conftest import heavy, model

unit = st.floats(min_value=1e-12, max_value=1.0, exclude_min=False)
prob = st.floats(min_value=0.0, max_value=0.999)
times = st.floats(min_value=0.0, max_value=20.0)
betas = st.sampled_from([0.2, 1.0, 5.0])


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-15, max_value=1.0), betas)
def test_heavy_quantile_is_generalised_inverse(u, beta):
    law = heavy(beta)
    k = int(law.quantile(u))
    assert law.tail(k) < u
    assert k == 0 or law.tail(k - 1) >= u


@settings(max_examples=100, deadline=None)
@given(prob, times, times)
def test_flow_semigroup_and_monotonicity(s, t1, t2):
    m = model(1.0)
    a = m.solve_F(s, t1)
    assert s - 1e-12 <= a <= 1.0
    assert abs(m.solve_F(a, t2) - m.solve_F(s, t1 + t2)) < 1e-6


@settings(max_examples=100, deadline=None)
@given(prob, st.floats(min_value=0.01, max_value=20.0))
def test_raz_identity(s, t):
    m = model(1.0)
    assert abs(m.pi_eval(m.solve_F(s, t)) - m.pi_eval(s) - t) < 1e-6


@settings(max_examples=200, deadline=None)
@given(prob, times, st.floats(min_value=0.01, max_value=1.0))
def test_F_closed_alpha_is_pgf_like(s, t, a):
    v = F_closed("alpha", s, t, a)
    assert 0.0 <= v <= 1.0 + 1e-12
    assert v <= F_closed("alpha", min(s + 0.001, 0.999), t, a) + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=1.0), st.integers(min_value=2, max_value=10**6))
def test_pmf_alpha_in_unit_interval(a, k):
    p = float(pmf_alpha(a, k))
    assert 0.0 <= p <= 1.0


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1.0), st.integers(min_value=1, max_value=10**6))
def test_sibuya_pmf_bounded_by_gamma(g, k):
    assert 0.0 <= float(sibuya_pmf(g, k)) <= g + 1e-15


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.0, max_value=0.99), st.integers(min_value=2, max_value=200))
def test_merger_law_is_distribution(a, n):
    p = next_merger_law(CoalescentSpec(a), n)
    assert np.all(p >= 0) and abs(p.sum() - 1) < 1e-12
    r = merger_rate(CoalescentSpec(a), n, np.arange(2, n + 1))
    assert np.all(np.diff(r[: max(1, n // 2)]) <= 1e-300) or n < 4


@settings(max_examples=200, deadline=None)
@given(unit, betas)
def test_tau_in_unit_interval(u, beta):
    t = float(tau_from_uniform(LimitConfig("zero", beta=beta), u))
    assert 0.0 <= t <= 1.0


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-300, max_value=1.0), st.floats(min_value=0.0, max_value=0.99), betas)
def test_zero_marginal_monotone_in_u(u, x, beta):
    cfg = LimitConfig("zero", beta=beta)
    a, b = marginal_from_uniform(cfg, x, [u, min(1.0, 2 * u)])
    assert a >= b >= 1


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=10**6), st.floats(min_value=0.0, max_value=1.0))
def test_binomial_ci_contains_estimate(n, frac):
    k = int(round(frac * n))
    lo, hi = binomial_ci(k, n)
    assert 0.0 <= lo <= k / n <= hi <= 1.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=50))
def test_ks_bounds(xs):
    d = ks_distance(xs, lambda v: np.clip(v, 0, 1))
    assert 0.0 <= d <= 1.0
    assert d >= 1 / (2 * len(xs)) - 1e-12 or math.isclose(d, 0.5 / len(xs))

import math

import numpy as np
import pytest
from scipy import stats

from reducedbp import (
    DomainError,
    LimitConfig,
    ParameterError,
    SamplingError,
    sample_limit_tree,
    sample_marginal,
    sample_tau,
    sibuya_pmf,
    stream,
    trajectory_at,
    tree_block,
)
from reducedbp.harness import chi_square_two_sample, discrete_chi_square, ks_distance
from reducedbp.limit_process import alpha_marginal_tail, marginal_from_uniform, tau_from_uniform


def zero(beta, **kw):
    return LimitConfig("zero", beta=beta, **kw)


def alpha(a, **kw):
    return LimitConfig("alpha", alpha=a, **kw)


def test_config_validation():
    with pytest.raises(ParameterError):
        LimitConfig("zero", beta=0.0)
    with pytest.raises(ParameterError):
        LimitConfig("alpha", alpha=0.0)
    with pytest.raises(ParameterError):
        LimitConfig("alpha", alpha=1.5)
    with pytest.raises(ParameterError):
        LimitConfig("other", beta=1.0)
    with pytest.raises(ParameterError):
        zero(1.0, resolution=0.0)
    assert zero(1.0).exponent == 0.5
    assert alpha(0.5).exponent == 1.0


def test_tau_from_uniform_examples():
    assert float(tau_from_uniform(zero(1.0), 0.25)) == pytest.approx(0.0625)
    assert float(tau_from_uniform(alpha(0.3), 0.25)) == 0.25
    assert float(tau_from_uniform(zero(1.0), 1.0)) == 1.0


@pytest.mark.parametrize("beta", [0.2, 1.0, 5.0])
def test_tau_law_zero_mode(beta):
    n = 10**6
    x = sample_tau(zero(beta), stream(1, 0), n)
    e = beta / (1 + beta)
    assert ks_distance(x, lambda y: y**e) < 0.002
    assert np.all((x > 0) & (x <= 1))


def test_tau_law_alpha_mode_uniform():
    x = sample_tau(alpha(0.5), stream(1, 1), 10**6)
    assert ks_distance(x, lambda y: np.clip(y, 0, 1)) < 0.002


def test_first_split_position():
    # the root splits at 1 - tau; a root beyond the edge leaves an empty tree
    cfg = zero(1.0, resolution=1e-6, node_cap=1)
    trees = [sample_limit_tree(cfg, stream(5, i)) for i in range(20000)]
    first = np.array([t.positions[0] if len(t) else 1.0 for t in trees])
    assert ks_distance(1 - first, np.sqrt) < 0.01


def test_alpha_one_splits_are_binary():
    tree = sample_limit_tree(alpha(1.0), stream(2, 0))
    assert np.all(tree.counts == 2)
    assert len(tree) > 0


def test_tree_structure():
    tree = sample_limit_tree(zero(1.0), stream(3, 0))
    assert tree.parents[0] == -1
    assert np.all(np.diff(tree.positions) >= 0)
    assert np.all(tree.parents[1:] < np.arange(1, len(tree)))
    assert np.all(tree.positions[1:] > tree.positions[tree.parents[1:]])
    assert np.all(tree.counts >= 2)
    assert np.all(tree.positions < 1 - tree.resolution)


def test_trajectory_is_nondecreasing_from_one():
    tree = sample_limit_tree(zero(1.0), stream(3, 1))
    xs = np.linspace(0, 0.99, 100)
    r = trajectory_at(tree, xs)
    assert r[0] == 1
    assert np.all(np.diff(r) >= 0)
    # a step exactly at each split
    x0 = tree.positions[0]
    assert trajectory_at(tree, [np.nextafter(x0, 0), x0]).tolist() == [1, tree.counts[0]]


def test_trajectory_errors():
    tree = sample_limit_tree(zero(1.0), stream(3, 2))
    with pytest.raises(DomainError):
        trajectory_at(tree, [0.5, 0.2])
    with pytest.raises(DomainError):
        trajectory_at(tree, [0.9995])
    with pytest.raises(DomainError):
        trajectory_at(tree, [-0.1])
    with pytest.raises(DomainError):
        tree_block(zero(1.0), 0, 0, 1, [0.2, 0.1])


def test_node_cap_truncates_with_exact_prefix():
    cfg = zero(1.0, node_cap=50, resolution=1e-6)
    full = zero(1.0, resolution=1e-6)
    for i in range(20):
        small = sample_limit_tree(cfg, stream(4, i))
        big = sample_limit_tree(full, stream(4, i))
        if not small.truncated:
            continue
        xs = np.linspace(0, small.exact_below, 30, endpoint=False)
        assert np.array_equal(trajectory_at(small, xs), trajectory_at(big, xs))
        return
    pytest.fail("node cap never reached")


def test_tree_block_determinism_and_split():
    xs = [0.1, 0.5, 0.9]
    a = tree_block(zero(1.0), 7, 0, 40, xs)
    b = tree_block(zero(1.0), 7, 20, 20, xs)
    assert np.array_equal(a.values[20:], b.values)
    ex = a.exact(xs)
    assert np.all(ex[~a.truncated])
    # a truncated tree is exact strictly below its cut
    assert np.array_equal(ex, np.asarray(xs)[None, :] < a.exact_below[:, None])


@pytest.mark.parametrize("beta,x", [(1.0, 0.5), (0.2, 0.9), (5.0, 0.3)])
def test_tree_marginal_is_sibuya(beta, x):
    n = 20000
    blk = tree_block(zero(beta), 11, 0, n, [x])
    g = (1 - x) ** (beta / (1 + beta))
    res = discrete_chi_square(blk.values[:, 0], lambda k: sibuya_pmf(g, k))
    assert res.pvalue > 1e-3


def test_direct_marginal_is_sibuya():
    x, beta = 0.7, 1.0
    r = sample_marginal(zero(beta), x, stream(1, 2), 100000)
    g = math.sqrt(1 - x)
    assert discrete_chi_square(r, lambda k: sibuya_pmf(g, k)).pvalue > 1e-3


def test_direct_and_tree_marginals_agree_alpha_mode():
    cfg, x, n = alpha(0.5), 0.5, 20000
    direct = sample_marginal(cfg, x, stream(2, 0), n)
    trees = tree_block(cfg, 2, 0, n, [x]).values[:, 0]
    assert chi_square_two_sample(direct, trees).pvalue > 1e-3


def test_alpha_one_marginal_geometric():
    x = 1 - math.exp(-1)
    r = sample_marginal(alpha(1.0), x, stream(3, 3), 10**5)
    p = math.exp(-1)
    assert abs(np.mean(r == 1) - p) < 4 * math.sqrt(p * (1 - p) / r.size)
    assert discrete_chi_square(r, lambda k: stats.geom.pmf(k, p)).pvalue > 1e-3


def test_alpha_one_tree_single_branch_probability():
    x = 1 - math.exp(-1)
    n = 20000
    v = tree_block(alpha(1.0), 5, 0, n, [x]).values[:, 0]
    p = math.exp(-1)
    assert abs(np.mean(v == 1) - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_alpha_marginal_tail_properties():
    t = alpha_marginal_tail(0.5, 0.5)
    assert t[0] == 1.0
    assert t[1] == pytest.approx(0.5)  # P(Z > 1) = 1 - e^{-t} = x
    assert np.all(np.diff(t) <= 0)
    assert np.all(t >= 0)


def test_alpha_marginal_cap_raises():
    with pytest.raises(SamplingError):
        marginal_from_uniform(alpha(0.5), 0.7, [1e-300])


def test_marginal_at_zero_is_one():
    assert sample_marginal(zero(1.0), 0.0, stream(0, 0)) == 1
    with pytest.raises(DomainError):
        sample_marginal(zero(1.0), 1.0, stream(0, 0))


def test_single_branch_probability_ordering_in_beta():
    # P(R(x) = 1) = (1 - x)^(beta/(1+beta)) decreases in beta
    x, n = 0.5, 20000
    p1 = [np.mean(tree_block(zero(b), 9, 0, n, [x]).values[:, 0] == 1) for b in (0.2, 1.0, 5.0)]
    assert p1[0] > p1[1] > p1[2]
    for b, p in zip((0.2, 1.0, 5.0), p1):
        e = (1 - x) ** (b / (1 + b))
        assert abs(p - e) < 4 * math.sqrt(e * (1 - e) / n)

import math

import numpy as np
import pytest

from reducedbp import (
    BudgetError,
    DomainError,
    Genealogy,
    ParameterError,
    SimConfig,
    binary_law,
    mrca_sample,
    point_mass,
    reduce,
    run_block,
    simulate,
    simulate_replicate,
    stream,
    table_law,
)
from reducedbp.simulator import lineage_marks

from conftest import model


def test_config_validation():
    for h in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ParameterError):
            SimConfig(horizon=h)
    with pytest.raises(ParameterError):
        SimConfig(horizon=1.0, max_events=0)


def test_point_mass_zero_survival():
    n = 10**5
    res = run_block(point_mass(0), SimConfig(horizon=1.0, seed=5), 0, n)
    p = math.exp(-1)
    assert abs(res.survived.mean() - p) < 4 * math.sqrt(p * (1 - p) / n)
    assert np.all(res.z <= 1)


def test_point_mass_one_single_lineage():
    cfg = SimConfig(horizon=5.0)
    for i in range(20):
        out = simulate_replicate(point_mass(1), cfg, i)
        assert out.survived and out.z_t == 1
        traj = reduce(out.genealogy, cfg.horizon)
        assert traj.mrca_time == 0.0
        assert traj(np.linspace(0, 5, 11)).tolist() == [1] * 11


@pytest.mark.slow
def test_binary_survival_probability():
    n = 10**6
    res = run_block(binary_law(), SimConfig(horizon=8.0, seed=17), 0, n)
    assert abs(res.survived.mean() - 0.2) < 4 * math.sqrt(0.16 / n)


def test_non_critical_law_warns():
    with pytest.warns(UserWarning):
        simulate(table_law([0.2, 0.3, 0.5]), SimConfig(horizon=1.0), stream(0, 0))


def test_reduce_hand_built_genealogy():
    # root dies at 1 into two daughters; daughter 1 dies at 2 into two more;
    # daughter 2 dies childless at 1.5. Survivors 3 and 4 at t = 3.
    gen = Genealogy(
        parent=np.array([-1, 0, 0, 1, 1]),
        birth=np.array([0.0, 1.0, 1.0, 2.0, 2.0]),
        death=np.array([1.0, 2.0, 1.5, 3.0, 3.0]),
        alive=np.array([False, False, False, True, True]),
    )
    traj = reduce(gen, 3.0)
    assert traj.times.tolist() == [0.0, 2.0]
    assert traj.values.tolist() == [1, 2]
    assert traj.mrca_time == pytest.approx(1.0)
    assert traj(1.999) == 1 and traj(2.0) == 2 and traj(3.0) == 2
    assert lineage_marks(gen).tolist() == [True, True, False, True, True]
    with pytest.raises(DomainError):
        traj(3.5)


def test_reduce_rejects_extinct():
    gen = Genealogy(np.array([-1]), np.array([0.0]), np.array([0.5]), np.array([False]))
    with pytest.raises(DomainError):
        reduce(gen, 1.0)


def _survivor(law, cfg, start=0):
    i = start
    while True:
        out = simulate_replicate(law, cfg, i)
        if out.survived:
            return out
        i += 1


def test_genealogy_invariants(heavy1):
    cfg = SimConfig(horizon=10.0, seed=3)
    for start in (0, 1000, 5000):
        out = _survivor(heavy1, cfg, start)
        g = out.genealogy
        assert g.parent[0] == -1
        assert np.all(g.parent[1:] < np.arange(1, len(g)))
        assert np.all(g.birth[1:] == g.death[g.parent[1:]])
        assert np.all(g.death >= g.birth)
        assert np.all(g.death[g.alive] == cfg.horizon)
        assert int(g.alive.sum()) == out.z_t
        traj = reduce(g, cfg.horizon)
        # non-decreasing, starts at one, ends at Z(t)
        assert traj.values[0] == 1 and traj.values[-1] == out.z_t
        assert np.all(np.diff(traj.values) > 0)
        assert 0 <= traj.mrca_time <= cfg.horizon


def test_simulate_determinism(heavy1):
    cfg = SimConfig(horizon=10.0, seed=9)
    a = simulate_replicate(heavy1, cfg, 42)
    b = simulate_replicate(heavy1, cfg, 42)
    assert a.z_t == b.z_t and a.events == b.events
    assert np.array_equal(a.genealogy.death, b.genealogy.death)


def test_run_block_matches_single_runs(heavy1):
    cfg = SimConfig(horizon=8.0, seed=2)
    res = run_block(heavy1, cfg, 100, 300, query_us=[2.0, 6.0])
    for j in np.flatnonzero(res.survived)[:10]:
        out = simulate_replicate(heavy1, cfg, 100 + j)
        assert out.z_t == res.z[j]
        traj = reduce(out.genealogy, cfg.horizon)
        assert traj.mrca_time == pytest.approx(res.tau[j])
        assert traj([2.0, 6.0]).tolist() == res.zq[j].tolist()
    assert np.all(np.isnan(res.tau[~res.survived]))


def test_run_block_rejects_bad_queries(heavy1):
    with pytest.raises(DomainError):
        run_block(heavy1, SimConfig(horizon=1.0), 0, 1, query_us=[2.0])


def test_censoring_flags_outcome(heavy1):
    cfg = SimConfig(horizon=20.0, max_events=5)
    res = run_block(heavy1, cfg, 0, 2000)
    assert res.censored.any()
    assert not np.any(res.survived & res.censored)
    i = int(np.flatnonzero(res.censored)[0])
    out = simulate_replicate(heavy1, cfg, i)
    assert out.censored and not out.survived


def test_single_ancestor_frequencies_match_oracle(model1, heavy1):
    n, t = 2000, 15.0
    us = (3.0, 7.5, 12.0)
    cfg = SimConfig(horizon=t, seed=101)
    z1 = np.zeros(len(us))
    got, start = 0, 0
    while got < n:
        res = run_block(heavy1, cfg, start, 4096, query_us=us)
        rows = res.zq[res.survived][: n - got]
        z1 += (rows == 1).sum(axis=0)
        got += rows.shape[0]
        start += 4096
    for k, u in enumerate(us):
        p = model1.single_ancestor_prob(u, t)
        assert abs(z1[k] / n - p) / math.sqrt(p * (1 - p) / n) < 3.5


def test_mean_events_bounded(heavy1):
    res = run_block(heavy1, SimConfig(horizon=20.0, seed=4), 0, 20000)
    assert res.events.mean() <= 42


def test_mrca_sample_accepts_survivor(heavy1):
    cfg = SimConfig(horizon=10.0, seed=8)
    draw = mrca_sample(heavy1, cfg, start_index=0)
    out = simulate_replicate(heavy1, cfg, draw.index)
    assert out.survived
    assert reduce(out.genealogy, cfg.horizon).mrca_time == pytest.approx(draw.tau)
    assert draw.attempts == draw.index + 1


@pytest.mark.filterwarnings("ignore:offspring mean")
def test_mrca_sample_budget_error():
    with pytest.raises(BudgetError) as err:
        mrca_sample(point_mass(0), SimConfig(horizon=50.0), budget=100)
    assert err.value.attempts == 100


def test_binary_mrca_sample_with_rng():
    draw = mrca_sample(binary_law(), SimConfig(horizon=5.0), rng=stream(1, 0))
    assert 0 <= draw.tau <= 5.0


@pytest.mark.slow
def test_criticality_mean_population():
    # E Z(t) = 1 for the binary law, whose variance sigma^2 t is finite; with
    # infinite offspring variance the sample mean is useless, see the next test
    n = 200000
    res = run_block(binary_law(), SimConfig(horizon=10.0, seed=6), 0, n)
    sd = math.sqrt(10.0 * 1.0 / n)
    assert abs(res.z.mean() - 1.0) < 4 * sd


def test_population_generating_function(heavy1, model1):
    # E s^Z(t) = F(s, t) for the heavy law; bounded summands, so a plain CLT bound
    n, t = 100000, 5.0
    res = run_block(heavy1, SimConfig(horizon=t, seed=13), 0, n)
    assert not res.censored.any()
    for s in (0.0, 0.5, 0.9):
        v = s ** res.z.astype(float)
        assert abs(v.mean() - model1.solve_F(s, t)) < 4 * v.std() / math.sqrt(n)


def test_survival_matches_analytic(heavy1):
    n, t = 200000, 10.0
    res = run_block(heavy1, SimConfig(horizon=t, seed=12), 0, n)
    q = model(1.0).Q(t)
    assert abs(res.survived.mean() - q) < 4 * math.sqrt(q * (1 - q) / n)

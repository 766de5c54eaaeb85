import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stablewalk import steplaw as sl
from stablewalk.dilation import ExponentStructure, NormalizationSequence
from stablewalk.occupation import (
    CapExceeded, OccupationRecord, ProfileF, Restriction, bridge_laplace, bridge_range_distribution,
    enumerate_paths, estimate_laplace, functional, occupation_from_path, range_dp,
    range_laplace_confinement, replica_rng, simulate,
)

LAZY = sl.lazy_nearest_neighbor(0.5)
SRW = sl.simple_random_walk()


def brute_force(law, n):
    """Every step sequence with its probability, as explicit paths."""
    steps = [(int(p[0]), q) for p, q in zip(law.points, law.probs)]
    for seq in itertools.product(steps, repeat=n):
        pos = np.concatenate([[0], np.cumsum([s for s, _ in seq])]).astype(int)
        yield pos, math.prod(q for _, q in seq)


def test_functional_examples():
    rec = OccupationRecord(3, {(0,): 2, (1,): 2}, (1,))
    assert functional(rec, ProfileF.power(0.5)) == pytest.approx(2 * math.sqrt(2), abs=1e-15)
    hold = simulate(sl.point_mass(), 50, replica_rng(1, 0))
    assert hold.counts == {(0,): 51} and hold.range == 1
    assert functional(hold, ProfileF.indicator(0.7)) == 0.7


def test_simulate_zero_steps():
    rec = simulate(LAZY, 0, replica_rng(3, 3))
    assert rec.counts == {(0,): 1} and rec.range == 1 and rec.endpoint == (0,)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 300), st.integers(0, 2**32 - 1), st.floats(0.01, 3.0))
def test_linear_profile_mass_identity(n, seed, theta):
    rec = simulate(sl.axis_product([0.8, 1.5]), n, replica_rng(seed, 0))
    assert sum(rec.counts.values()) == n + 1
    assert functional(rec, ProfileF.linear(theta)) == pytest.approx(theta * (n + 1), rel=1e-14)


def test_lazy_range_bounds_and_seed_agreement():
    n, reps = 2000, 200
    def ranges(seed):
        return np.array([simulate(LAZY, n, replica_rng(seed, r)).range for r in range(reps)])
    a, b = ranges(11), ranges(12)
    assert a.min() > 0 and a.max() <= n + 1
    se = math.sqrt(a.var(ddof=1) / reps + b.var(ddof=1) / reps)
    assert abs(a.mean() - b.mean()) <= 4 * se


def test_replica_streams_are_keyed():
    x = replica_rng(5, 9).random(4)
    assert np.array_equal(x, replica_rng(5, 9).random(4))
    assert not np.array_equal(x, replica_rng(5, 10).random(4))
    assert not np.array_equal(x, replica_rng(6, 9).random(4))


def test_estimate_linear_is_exact():
    res = estimate_laplace(sl.radial(1.0), 40, ProfileF.linear(0.05), replicas=64, seed=1)
    assert res.mean == math.exp(-0.05 * 41) and res.stderr == 0.0


def test_estimate_matches_enumeration_n12():
    F = ProfileF.indicator(0.3)
    exact = enumerate_paths(LAZY, 12, F).value
    res = estimate_laplace(LAZY, 12, F, replicas=20_000, seed=2024)
    assert abs(res.mean - exact) <= 3 * res.stderr


def test_restriction_huge_radius_is_identity():
    F = ProfileF.power(0.5, 0.2)
    ns = NormalizationSequence(ExponentStructure.diagonal([2.0]))
    base = estimate_laplace(LAZY, 50, F, replicas=500, seed=9)
    wide = estimate_laplace(LAZY, 50, F, replicas=500, seed=9, restrict=Restriction(1e12, ns, 7))
    assert wide.mean == base.mean and wide.stderr == base.stderr
    assert wide.restricted_domain == 1e12
    tight = estimate_laplace(LAZY, 50, F, replicas=500, seed=9, restrict=Restriction(0.0, ns, 7))
    assert tight.mean < base.mean


def test_chunking_and_workers_do_not_change_results():
    F = ProfileF.indicator(0.1)
    ref = estimate_laplace(LAZY, 30, F, replicas=300, seed=4)
    assert estimate_laplace(LAZY, 30, F, replicas=300, seed=4, chunk=7) == ref
    assert estimate_laplace(LAZY, 30, F, replicas=300, seed=4, chunk=50, workers=2) == ref


def test_enumerate_small_cases():
    nu = 0.8
    F = ProfileF.indicator(nu)
    assert enumerate_paths(LAZY, 1, F).value == pytest.approx(0.5 * math.exp(-nu) + 0.5 * math.exp(-2 * nu), abs=1e-15)
    G = ProfileF.power(0.5, 1.3)
    assert enumerate_paths(LAZY, 0, G).value == pytest.approx(math.exp(-float(G(1))), abs=1e-15)
    with pytest.raises(CapExceeded):
        enumerate_paths(LAZY, 30, F, cap=1e6)


@pytest.mark.parametrize("law,n", [(LAZY, 7), (sl.lazy_nearest_neighbor(0.2), 6),
                                   (sl.one_dim_general([1, 2], [0.3, 0.2], p0=0.0), 6)])
def test_enumerate_against_brute_force(law, n):
    F = ProfileF.power(0.5, 0.4)
    total, by_end, dist = 0.0, {}, {}
    for pos, pr in brute_force(law, n):
        _, cnt = np.unique(pos, return_counts=True)
        w = pr * math.exp(-F(cnt).sum())
        total += w
        by_end[int(pos[-1])] = by_end.get(int(pos[-1]), 0.0) + w
        dist[len(cnt)] = dist.get(len(cnt), 0.0) + pr
    en = enumerate_paths(law, n, F)
    assert en.value == pytest.approx(total, abs=1e-14)
    for g, v in by_end.items():
        assert en.by_endpoint[(g,)] == pytest.approx(v, abs=1e-14)
    for m, p in dist.items():
        assert en.range_distribution[m] == pytest.approx(p, abs=1e-14)


def test_occupation_from_path():
    rec = occupation_from_path(np.array([[0], [1], [0], [-1], [0]]))
    assert rec.counts == {(-1,): 1, (0,): 3, (1,): 1} and rec.endpoint == (0,) and rec.n == 4


def test_range_dp_first_step():
    d = range_dp(SRW, 1).d_distribution()
    assert d[2] == 1.0 and d.sum() == 1.0


@pytest.mark.parametrize("law,n", [(SRW, 16), (LAZY, 10), (sl.lazy_nearest_neighbor(0.1), 9)])
def test_range_dp_matches_brute_force(law, n):
    dist = np.zeros(n + 2)
    bridge = np.zeros(n + 2)
    for pos, pr in brute_force(law, n):
        m = len(set(pos.tolist()))
        dist[m] += pr
        if pos[-1] == 0:
            bridge[m] += pr
    np.testing.assert_allclose(range_dp(law, n).d_distribution(), dist, atol=1e-12)
    bd = bridge_range_distribution(law, n)
    for m in range(1, n + 2):
        assert bd.get(m, 0.0) == pytest.approx(bridge[m], abs=1e-12)
    nu = 0.6
    expect = float(np.sum(bridge * np.exp(-nu * np.arange(n + 2))))
    assert bridge_laplace(law, n, nu) == pytest.approx(expect, abs=1e-14)


def test_confinement_route_matches_dp():
    for nu in (0.2, 1.0):
        assert range_laplace_confinement(LAZY, 300, nu) == pytest.approx(range_dp(LAZY, 300).laplace(nu), rel=1e-11)


def test_bridge_edge_cases():
    assert bridge_laplace(SRW, 7, 1.0) == 0.0
    assert bridge_laplace(SRW, 0, 0.4) == math.exp(-0.4)
    with pytest.raises(ValueError):
        range_dp(sl.one_dim_general([2], [1.0]), 3)


def test_range_laplace_monotone_in_n():
    vals = [range_dp(SRW, n).laplace(1.0) for n in (50, 100, 200, 400)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_profile_validate_and_gamma():
    assert all(ProfileF.power(0.5).validate(2000).values())
    assert all(ProfileF.log_profile(1.0).validate(2000).values())
    bad = ProfileF.table([0.0, 1.0, 1.2, 3.0])
    assert not bad.validate(10)["concave"]
    assert ProfileF.indicator().gamma == 0.0 and ProfileF.linear(1).gamma == 1.0
    assert ProfileF.power(0.3).gamma == 0.3
    with pytest.raises(ValueError):
        ProfileF.table([1.0, 2.0])
    with pytest.raises(ValueError):
        ProfileF("quadratic")

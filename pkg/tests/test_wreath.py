import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stablewalk import steplaw as sl
from stablewalk.occupation import OccupationRecord, enumerate_states, replica_rng, simulate
from stablewalk.wreath import (
    LampGroupModel, ReturnProfile, lamp_factor, lamp_power_at_identity, lamp_return, lstar_counts,
    surrogate_factor, wreath_exact_enum, wreath_exact_z2z, wreath_return_estimate,
)

LAZY = sl.lazy_nearest_neighbor(0.5)
SRW = sl.simple_random_walk()
Z3 = LampGroupModel.cyclic(3, [0.5, 0.25, 0.25])


def brute_force_return(base, model, n, g):
    """Sum over every (switch, move, switch)^n sequence on the cyclic lamp group."""
    order = model.order
    moves = [(int(p[0]), q) for p, q in zip(base.points, base.probs)]
    lamps = list(enumerate(model.nu))
    total = 0.0
    for seq in itertools.product(itertools.product(lamps, moves, lamps), repeat=n):
        conf, pos, pr = {}, 0, 1.0
        for (k1, p1), (s, q), (k2, p2) in seq:
            conf[pos] = (conf.get(pos, 0) + k1) % order
            pos += s
            conf[pos] = (conf.get(pos, 0) + k2) % order
            pr *= p1 * q * p2
        if pos == g and not any(conf.values()):
            total += pr
    return total


def test_lamp_return_examples():
    z2 = LampGroupModel.z2_uniform()
    assert lamp_return(z2, 0) == 1.0
    assert all(lamp_return(z2, m) == 0.5 for m in range(1, 6))
    assert lamp_return(LampGroupModel.lattice(LAZY), 1) == pytest.approx(3 / 8, abs=1e-15)
    assert lamp_return(LampGroupModel.lattice(LAZY), 0) == 1.0


def test_lattice_lamp_powers_match_binomial():
    # nu^(k)(0) for the lazy walk is C(2k, k) / 4^k
    lat = LampGroupModel.lattice(LAZY)
    for k in (1, 2, 5, 9):
        assert lamp_power_at_identity(lat, k) == pytest.approx(math.comb(2 * k, k) / 4**k, rel=1e-12)


def test_parametric_model_half_arguments():
    par = LampGroupModel.parametric(lambda m: m ** (1 / 3), 0.2)
    assert lamp_power_at_identity(par, 3) == pytest.approx(math.exp(-(1.5 ** (1 / 3))))
    assert lamp_return(par, 4) == pytest.approx(math.exp(-(4 ** (1 / 3))))
    assert par.epsilon == 0.2


def test_model_validation():
    with pytest.raises(ValueError):
        LampGroupModel.cyclic(3, [0.5, 0.4, 0.1])  # not symmetric
    with pytest.raises(ValueError):
        LampGroupModel.cyclic(2, [0.0, 1.0])  # nu(e) = 0
    with pytest.raises(ValueError):
        LampGroupModel("parametric")


def test_lstar_hold_only():
    rec = simulate(sl.point_mass(), 2, replica_rng(0, 0))
    assert rec.counts == {(0,): 3}
    assert lstar_counts(rec, (0,)) == {(0,): 2.0}


def test_lstar_single_move():
    rec = OccupationRecord(1, {(0,): 1, (1,): 1}, (1,))
    ls = lstar_counts(rec, (1,))
    assert ls == {(0,): 0.5, (1,): 0.5}
    # one switch at each end: nu(e)^2
    assert lamp_factor(Z3, ls) == pytest.approx(0.25, abs=1e-15)
    other = OccupationRecord(4, {(0,): 2, (1,): 2, (2,): 1}, (1,))
    assert lstar_counts(other, (1,))[(2,)] == 1.0
    with pytest.raises(ValueError):
        lstar_counts(other, (0,))


def test_lstar_switch_count_matches_exact_group_law():
    # E[prod nu^(2 l*)(e) 1{X_n = g}] over the exact path law equals the enumerated q^(n)
    n = 5
    states = enumerate_states(LAZY, n)
    for g in (0, 1, -2):
        via_lstar = 0.0
        for (pos, occ), pr in states.items():
            if pos == (g,):
                rec = OccupationRecord(n, dict(occ), pos)
                via_lstar += pr * lamp_factor(Z3, lstar_counts(rec, (g,)))
        assert via_lstar == pytest.approx(wreath_exact_enum(LAZY, Z3, n, g), abs=1e-15)


@pytest.mark.parametrize("base,model,n,g", [
    (LAZY, Z3, 3, 0), (LAZY, Z3, 3, 1), (SRW, LampGroupModel.z2_uniform(), 4, 0),
    (SRW, LampGroupModel.cyclic(4, [0.4, 0.2, 0.2, 0.2]), 3, 1),
])
def test_enum_matches_brute_force(base, model, n, g):
    assert wreath_exact_enum(base, model, n, g) == pytest.approx(brute_force_return(base, model, n, g), abs=1e-15)


def test_z2z_small_cases():
    z2 = LampGroupModel.z2_uniform()
    assert wreath_exact_enum(SRW, z2, 1) == 0.0
    assert wreath_exact_enum(SRW, z2, 2) == pytest.approx(1 / 8, abs=1e-16)
    assert wreath_exact_z2z(SRW, 2) == pytest.approx(1 / 8, abs=1e-16)
    assert wreath_exact_z2z(SRW, 11) == 0.0
    assert wreath_exact_z2z(LAZY, 0) == 1.0


@pytest.mark.parametrize("base", [SRW, LAZY, sl.lazy_nearest_neighbor(0.3)])
def test_z2z_formula_matches_enum(base):
    z2 = LampGroupModel.z2_uniform()
    for n in range(1, 11):
        assert wreath_exact_z2z(base, n) == pytest.approx(wreath_exact_enum(base, z2, n), abs=1e-15)


def test_mc_no_holding_odd_return():
    res = wreath_return_estimate(SRW, LampGroupModel.z2_uniform(), 1, 0, replicas=100, seed=1)
    assert res.mean == 0.0 and res.stderr == 0.0


@pytest.mark.parametrize("base,model,n,g", [
    (SRW, LampGroupModel.z2_uniform(), 2, 0),
    (LAZY, Z3, 4, 0),
    (LAZY, Z3, 4, 1),
])
def test_mc_matches_enum(base, model, n, g):
    exact = wreath_exact_enum(base, model, n, g)
    res = wreath_return_estimate(base, model, n, g, replicas=40_000, seed=77)
    assert abs(res.mean - exact) <= 3 * res.stderr


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(0, 10**6))
def test_surrogate_comparison_bounds(n, seed):
    rec = simulate(LAZY, n, replica_rng(seed, 0))
    eps = Z3.epsilon
    ratio = lamp_factor(Z3, lstar_counts(rec, rec.endpoint)) / surrogate_factor(Z3, rec)
    assert eps**3 <= ratio <= eps**-3


def test_return_profile():
    z2 = ReturnProfile.build(LampGroupModel.z2_uniform(), cap=16)
    assert z2.values[0] == 0.0 and np.allclose(z2.values[1:], math.log(2))
    assert z2(np.array([100.0]))[0] == pytest.approx(math.log(2))
    lat = ReturnProfile.build(LampGroupModel.lattice(LAZY), cap=256)
    assert lat.monotone_within(1e-12)
    # F(m) = -log nu^(2m)(0) ~ (1/2) log m for a 1-D lattice lamp
    assert lat.ell == pytest.approx(0.5, abs=0.01)
    assert lat(np.array([256.0]))[0] == pytest.approx(lat.values[-1])

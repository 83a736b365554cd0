import math

import numpy as np
import pytest

import weylrods as w
from weylrods.asymptotics import far_field_gauge
from weylrods.errors import InputError


# --- exponent algebra ---------------------------------------------------------------

@pytest.mark.parametrize("amps,C,exps", [
    ((1.0, 1.0), -0.25, (-1 / 3, 2 / 3, 2 / 3)),
    ((2 / 3, 2 / 3, 2 / 3), -1 / 3, (-1 / 2, 1 / 2, 1 / 2, 1 / 2)),
    ((0.5, 0.5, 0.5, 0.5), -3 / 8, (-3 / 5, 2 / 5, 2 / 5, 2 / 5, 2 / 5)),
])
def test_kasner_exact_triples(amps, C, exps):
    kd = w.kasner_from_amplitudes(amps)
    assert kd.C == pytest.approx(C, abs=1e-15)
    for got, want in zip(kd.exponents, exps):
        assert got == pytest.approx(want, abs=1e-14)
    assert kd.sum_residual < 1e-14
    assert kd.square_residual < 1e-14


def test_kasner_identities_random_amplitudes():
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        raw = rng.uniform(0.1, 1.0, n)
        amps = tuple(2.0 * raw / raw.sum())
        kd = w.kasner_from_amplitudes(amps)
        assert kd.sum_residual < 1e-12
        assert kd.square_residual < 1e-12


def test_kasner_rejects_bad_amplitudes():
    with pytest.raises(InputError):
        w.kasner_from_amplitudes((1.0, 0.5))  # sum != 2
    with pytest.raises(InputError):
        w.kasner_from_amplitudes((2.5, -0.5))


def test_kasner_q_constants():
    kd = w.kasner_from_amplitudes((1.0, 1.0), lapse_constant=-2.0 * math.log(4.0))
    assert kd.q0 == pytest.approx(16.0, rel=1e-12)  # e^{-c} = (2L)^2 with L = 2
    assert kd.q1 == pytest.approx(1.0 / 0.75**2, rel=1e-12)


# --- far-field fits -------------------------------------------------------------------

def test_verify_kasner_n2(n2_balanced):
    fit = w.verify_kasner(n2_balanced)
    assert abs(fit.data.exponents[0] + 1 / 3) < 1e-4
    assert abs(fit.data.exponents[1] - 2 / 3) < 1e-4
    assert abs(fit.data.exponents[2] - 2 / 3) < 1e-4
    assert fit.c_gap < 1e-4
    assert fit.data.sum_residual < 1e-6
    assert fit.data.square_residual < 1e-6


def test_verify_kasner_uneven(uneven_solution):
    fit = w.verify_kasner(uneven_solution)
    # amplitudes follow rod-length shares: (1, 1/2, 1/2)
    assert abs(fit.data.amplitudes[0] - 1.0) < 1e-6
    assert abs(fit.data.amplitudes[1] - 0.5) < 1e-6
    assert fit.c_gap < 1e-6


def test_far_field_gauge_kills_offsets(n2_balanced):
    norm = far_field_gauge(n2_balanced)
    L = norm.period
    rhos = np.geomspace(10 * L, 100 * L, 6)
    for i in (1, 2):
        fit = w.far_field_fit(norm.potentials, i, rhos)
        assert abs(fit.offset) < 1e-8


# --- wick rotation ---------------------------------------------------------------------

def test_wick_n2_gives_s2_horizons(n2_balanced):
    bh = w.wick_rotate(n2_balanced, 2)
    assert bh.spacetime_dimension == 4
    assert bh.torus_rank == 1
    assert len(bh.horizon_rods) == 1
    assert [t.render() for t in bh.horizon_topologies] == ["S^2"]
    assert all(r.kind == "horizon" for r in bh.horizon_rods)


def test_wick_four_rod_distinct_neighbors(four_rod_solution):
    balanced, _ = w.balance_solution(four_rod_solution)
    bh = w.wick_rotate(balanced, 1)
    # two former e1 rods; each has neighbors e2 and e3 (distinct): S^3
    assert len(bh.horizon_rods) == 2
    assert [t.render() for t in bh.horizon_topologies] == ["S^3", "S^3"]


def test_wick_four_rod_equal_neighbors(four_rod_solution):
    balanced, _ = w.balance_solution(four_rod_solution)
    bh = w.wick_rotate(balanced, 2)
    # the e2 rod sits between the two e1 rods: ring topology
    assert [t.render() for t in bh.horizon_topologies] == ["S^1 x S^2"]


def test_wick_lapse_vanishes_quadratically(n2_balanced):
    bh = w.wick_rotate(n2_balanced, 2)
    mid = float(bh.horizon_rods[0].midpoint)
    v1 = bh.lapse_squared(1e-3, mid)
    v2 = bh.lapse_squared(5e-4, mid)
    assert v1 / 1e-6 == pytest.approx(v2 / 2.5e-7, rel=1e-4)
    assert bh.lapse_squared(0.0, mid) == 0.0


def test_wick_lapse_identity(n2_balanced):
    # e^{u_i} = rho^2 e^{-sum_{j != i} u_j + c}
    bh = w.wick_rotate(n2_balanced, 1)
    pots = n2_balanced.potentials
    rho, z = 0.8, 0.9
    lhs = bh.lapse_squared(rho, z)
    rhs = rho**2 * math.exp(-pots.value(2, rho, z) + pots.lapse_constant)
    assert lhs == pytest.approx(rhs, rel=1e-11)


def test_wick_roundtrip(n3_balanced):
    bh = w.wick_rotate(n3_balanced, 2)
    for (rho, z) in [(0.9, 0.2), (1.7, 0.8)]:
        back = bh.unrotated_diag(rho, z)
        orig = n3_balanced.metric_diag(rho, z)
        assert np.max(np.abs(back - orig)) == 0.0


def test_wick_ricci_flat(n2_balanced):
    bh = w.wick_rotate(n2_balanced, 2)
    assert w.wick_ricci_check(bh, 1.5, 0.4, 1e-3) < 1e-4


def test_wick_ricci_second_order(n2_balanced):
    bh = w.wick_rotate(n2_balanced, 2)
    r1 = w.wick_ricci_check(bh, 1.5, 0.4, 0.04)
    r2 = w.wick_ricci_check(bh, 1.5, 0.4, 0.02)
    assert 3.0 < r1 / r2 < 5.0


def test_wick_rotated_metric_keeps_kasner(n2_balanced):
    # the rotated solution shares the u_i and alpha, so its far field satisfies
    # the same Kasner identities
    bh = w.wick_rotate(n2_balanced, 1)
    fit = w.verify_kasner(bh.base)
    assert fit.data.sum_residual < 1e-6
    assert fit.data.square_residual < 1e-6


def test_wick_horizon_count_matches_family(five_rod_solution):
    balanced, _ = w.balance_solution(five_rod_solution)
    bh = w.wick_rotate(balanced, 1)
    assert len(bh.horizon_rods) == len(balanced.diagram.rods_of_family(1))
    # n=4 rotation: horizons are S^3 x T^1 or ring x T^1
    assert [t.render() for t in bh.horizon_topologies] == ["S^3 x T^1", "S^3 x T^1"]


def test_wick_input_errors(n2_balanced, flat_solution):
    with pytest.raises(InputError):
        w.wick_rotate(n2_balanced, 3)
    with pytest.raises(InputError):
        w.wick_rotate(flat_solution, 1)

import math

import pytest

import weylrods as w
from weylrods.errors import InputError, UnbalanceableError


def test_flat_space_balances_with_half_lapse_constant():
    # b = alpha0 - c/2 for the full-axis diagnostic, so alpha0 = c/2 kills it
    d = w.full_axis_diagram(2)
    c = w.build_solution(d).lapse_constant
    sol = w.build_solution(d, alpha0=0.5 * c)
    assert abs(w.angle_defect(sol, 0)) < 1e-9


def test_balance_n2(n2_solution, n2_balanced):
    pre = w.compute_defects(n2_solution)
    assert pre.max_abs_defect > 0.1  # genuinely unbalanced before the solve
    post = w.compute_defects(n2_balanced)
    assert post.max_abs_defect < 1e-8
    assert post.balanced


def test_balance_n3(n3_balanced):
    post = w.compute_defects(n3_balanced)
    assert post.max_abs_defect < 1e-8


def test_three_constants_balance_four_rods(four_rod_solution):
    balanced, before = w.balance_solution(four_rod_solution)
    post = w.compute_defects(balanced)
    assert len(post.rod_defects) == 4
    assert post.max_abs_defect < 1e-8


def test_four_constants_balance_five_rods(five_rod_solution):
    balanced, _ = w.balance_solution(five_rod_solution)
    post = w.compute_defects(balanced)
    assert len(post.rod_defects) == 5
    assert post.max_abs_defect < 1e-8


def test_symmetric_pair_agrees_before_balancing(four_rod_solution):
    # the two e1 rods are exchanged by the involution
    b0 = w.angle_defect(four_rod_solution, 0)
    b2 = w.angle_defect(four_rod_solution, 2)
    assert abs(b0 - b2) < 1e-8


def test_defect_linearity_in_constants(n2_solution):
    kappa = (0.3, -0.1)
    alpha0 = 0.2
    shifted = n2_solution.with_constants(kappa, alpha0)
    for rod, fam in ((0, 1), (1, 2)):
        b0 = w.angle_defect(n2_solution, rod)
        b1 = w.angle_defect(shifted, rod)
        assert abs((b1 - b0) - (alpha0 - 0.5 * kappa[fam - 1])) < 1e-9


def test_already_balanced_keeps_constants(n2_balanced):
    kappa, alpha0 = w.balance_constants(n2_balanced)
    assert alpha0 == 0.0
    for k_new, k_old in zip(kappa, n2_balanced.potentials.constants):
        assert abs(k_new - k_old) < 1e-8


def test_defect_constancy_along_rod(n2_balanced):
    assert w.defect_constancy(n2_balanced, 0) < 1e-8


def test_defect_constancy_flat_is_noise_only(flat_solution):
    assert w.defect_constancy(flat_solution, 0) < 1e-10


def test_constancy_unaffected_by_constant_shifts(n2_solution):
    shifted = n2_solution.with_constants((0.7, -0.2), 0.1)
    s0 = w.defect_constancy(n2_solution, 0)
    s1 = w.defect_constancy(shifted, 0)
    assert abs(s0 - s1) < 1e-9


def test_defect_periodic_under_rod_translation(n2_balanced):
    sol = n2_balanced
    L = sol.period
    for z in (0.5,):
        b_here = sol.alpha.axis_limit(z) - 0.5 * sol.potentials.reduced_value(1, 0.0, z)
        b_shift = sol.alpha.axis_limit(z + L) - 0.5 * sol.potentials.reduced_value(1, 0.0, z + L)
        assert abs(b_here - b_shift) < 1e-8


def test_unbalanceable_diagram_refused():
    # two e1 rods with different lengths and environments: unequal defects
    d = w.diagram_from_families(3, 1, [1, 2, 1, 3],
                                ["1/5", "3/10", "3/10", "1/5"])
    assert w.validate(d).ok
    assert w.detect_reflection_symmetry(d) is None
    sol = w.build_solution(d)
    with pytest.raises(UnbalanceableError):
        w.balance_constants(sol)


def test_angle_defect_input_errors(n2_solution):
    with pytest.raises(InputError):
        w.angle_defect(n2_solution, 7)
    with pytest.raises(InputError):
        w.angle_defect(n2_solution, 0, position=1.5)


def test_defect_report_grouping(four_rod_solution):
    report = w.compute_defects(four_rod_solution)
    assert report.rod_families == (1, 2, 1, 3)
    assert len(report.family_means) == 3
    # family-1 spread is tiny by symmetry, so its mean is either rod's defect
    assert report.family_spreads[0] < 1e-8

import math

import numpy as np
import pytest

from firstloss import CaseTag, HaraParams, PreferenceError, classify_case, hara_utility, manager_composite_utility
from firstloss.contract import manager_kinks
from firstloss.preferences import fee_admissible, hara_marginal, sweep_admissible

from conftest import fee_pct


def test_hara_examples():
    assert hara_utility(HaraParams(0.3, 0.65), 0.7) == pytest.approx(1.0 / 0.35, rel=1e-14)
    assert hara_utility(HaraParams(0.3, 0.65), -0.3) == 0.0
    assert hara_utility(HaraParams(0.0, 0.5), 4.0) == pytest.approx(4.0, rel=1e-14)


def test_hara_domain_errors():
    with pytest.raises(PreferenceError):
        hara_utility(HaraParams(0.3, 0.65), -0.31)
    with pytest.raises(PreferenceError):
        hara_utility(HaraParams(0.3, 2.5), -0.3)
    with pytest.raises(PreferenceError):
        HaraParams(0.3, 1.0)
    with pytest.raises(PreferenceError):
        HaraParams(0.3, 1.0 + 1e-10)
    with pytest.raises(PreferenceError):
        HaraParams(0.3, -0.2)


def test_hara_finite_difference_derivative():
    p = HaraParams(0.3, 0.65)
    h = 1e-6
    for wealth in np.linspace(-0.2, 5.0, 200):
        fd = (hara_utility(p, wealth + h) - hara_utility(p, wealth - h)) / (2 * h)
        assert fd == pytest.approx(hara_marginal(p, wealth), rel=1e-6)


def test_composite_utility_flat_then_continuous(base_manager):
    fee = fee_pct(2, 40, 10)
    v0 = 1.0
    k1, k2 = manager_kinks(fee, v0)
    flat_val = manager_composite_utility(fee, base_manager, v0, 0.0)
    for v in np.linspace(0.0, k1 - 1e-9, 50):
        assert manager_composite_utility(fee, base_manager, v0, v) == flat_val
    for kink in (k1, k2):
        left = manager_composite_utility(fee, base_manager, v0, kink - 1e-9)
        right = manager_composite_utility(fee, base_manager, v0, kink + 1e-9)
        assert left == pytest.approx(right, abs=1e-8)
        assert abs(
            manager_composite_utility(fee, base_manager, v0, kink) - right
        ) <= 1e-8


def test_composite_utility_frozen_value(base_manager):
    # fee (0, 20, 0): payoff below v0 is zero, so the utility is the constant
    # 0.3^0.35 / 0.35 = 1.874668123554 (30-digit arithmetic oracle)
    val = manager_composite_utility(fee_pct(0, 20, 0), base_manager, 1.0, 0.5)
    assert val == pytest.approx(1.874668123554, abs=1e-12)


def test_composite_concave_kink(base_manager):
    # middle-piece slope at the upper kink dominates the last-piece slope
    fee = fee_pct(2, 40, 10)
    v0 = 1.0
    _, k2 = manager_kinks(fee, v0)
    eps = 1e-7
    left = (
        manager_composite_utility(fee, base_manager, v0, k2 - eps)
        - manager_composite_utility(fee, base_manager, v0, k2 - 2 * eps)
    ) / eps
    right = (
        manager_composite_utility(fee, base_manager, v0, k2 + 2 * eps)
        - manager_composite_utility(fee, base_manager, v0, k2 + eps)
    ) / eps
    assert left >= right


def test_classify_examples(base_manager):
    assert classify_case(fee_pct(3, 20, 0), base_manager, 1.0) is CaseTag.A
    assert classify_case(fee_pct(5, 37.5, 26), base_manager, 1.0) is CaseTag.A
    assert classify_case(fee_pct(5, 10, 26), base_manager, 1.0) is CaseTag.B
    # high manager risk aversion with high coverage reaches the third regime
    assert classify_case(fee_pct(0, 10, 25), HaraParams(0.3, 5.0), 1.0) is CaseTag.C


def test_cases_partition_admissible_box(base_manager):
    # exactly one region predicate holds per fee; enum membership is the proof
    from firstloss import FeeStructure

    for m in np.linspace(0.0, 0.05, 6):
        for alpha in np.linspace(0.001, 0.5, 12):
            for c in np.linspace(0.0, 0.3, 7):
                tag = classify_case(FeeStructure(m, alpha, c), base_manager, 1.0)
                assert tag in (CaseTag.A, CaseTag.B, CaseTag.C)


def test_admissibility_checks():
    man_ok = HaraParams(0.3, 0.65)
    man_strict = HaraParams(0.3, 2.5)
    inv = HaraParams(0.3, 0.65)
    edge = fee_pct(0, 20, 30)           # c - m hits the shift exactly
    assert fee_admissible(edge, man_ok, inv, 1.0)
    assert not fee_admissible(edge, man_strict, inv, 1.0)
    assert sweep_admissible(man_ok, inv, 1.0)
    assert not sweep_admissible(man_strict, inv, 1.0)

"""HARA utilities, the manager's composite (non-concave) utility, and the
classification of a fee structure into the three concavification regimes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .contract import C_MAX, M_MAX, FeeStructure, manager_payoff

_TINY_BASE = 1e-300


class PreferenceError(ValueError):
    """Utility parameters incompatible with the wealth they must evaluate."""


@dataclass(frozen=True)
class HaraParams:
    """Shifted power utility u(v) = (v + a)^(1-b) / (1-b).

    b > 0 is the risk-aversion exponent (b = 1, log utility, is out of scope);
    a shifts the domain so that the worst contractual payoff stays inside it.
    """

    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.b > 0.0:
            raise PreferenceError(f"risk aversion b must be > 0 (got {self.b})")
        if abs(self.b - 1.0) < 1e-9:
            raise PreferenceError("b = 1 (log utility) is not supported")


class CaseTag(enum.Enum):
    """Shape regime of the concave envelope of the manager's utility.

    A -- the envelope's line is tangent beyond the upper payoff kink
    B -- the line ends exactly at the upper kink
    C -- the line is tangent between the two kinks
    """

    A = "A"
    B = "B"
    C = "C"


def _power(base: float, exponent: float) -> float:
    # exp(e*log(base)) with a guard: a tiny base with a negative exponent
    # signals an inadmissible wealth, not an infinite utility.
    if base < 0.0:
        raise PreferenceError(f"negative utility base {base}")
    if base == 0.0:
        if exponent > 0.0:
            return 0.0
        raise PreferenceError("zero utility base with non-positive exponent")
    if base < _TINY_BASE and exponent < 0.0:
        raise PreferenceError(f"utility base {base} too small for exponent {exponent}")
    return math.exp(exponent * math.log(base))


def hara_utility(p: HaraParams, wealth: float) -> float:
    """(wealth + a)^(1-b) / (1-b); requires wealth + a > 0 (= 0 only if b < 1)."""
    base = wealth + p.a
    if base < 0.0:
        raise PreferenceError(f"wealth {wealth} below the utility domain (-{p.a})")
    if base == 0.0:
        if p.b > 1.0:
            raise PreferenceError("utility is -inf at the domain edge for b > 1")
        return 0.0
    return _power(base, 1.0 - p.b) / (1.0 - p.b)


def hara_marginal(p: HaraParams, wealth: float) -> float:
    """u'(wealth) = (wealth + a)^(-b)."""
    return _power(wealth + p.a, -p.b)


def hara_inverse_marginal(p: HaraParams, y: float) -> float:
    """Solves u'(v) = y for v."""
    if y <= 0.0:
        raise PreferenceError(f"marginal utility must be > 0 (got {y})")
    return _power(y, -1.0 / p.b) - p.a


def fee_admissible(fee: FeeStructure, manager: HaraParams, investor: HaraParams, v0: float) -> bool:
    """Whether both utilities are finite at the parties' minimal payoffs.

    Manager needs a_M >= (c - m) v0 (strict for b_M > 1); investor the mirror
    image with m - c.
    """
    worst_m = (fee.c - fee.m) * v0
    worst_i = (fee.m - fee.c) * v0
    tol = 1e-12 * v0
    ok_m = manager.a > worst_m if manager.b > 1.0 else manager.a >= worst_m - tol
    ok_i = investor.a > worst_i if investor.b > 1.0 else investor.a >= worst_i - tol
    return ok_m and ok_i


def require_admissible(fee: FeeStructure, manager: HaraParams, investor: HaraParams, v0: float) -> None:
    if not fee_admissible(fee, manager, investor, v0):
        raise PreferenceError(
            f"HARA shifts (a_M={manager.a}, a_I={investor.a}) leave a party's worst payoff "
            f"outside the utility domain for fee {fee}"
        )


def sweep_admissible(manager: HaraParams, investor: HaraParams, v0: float) -> bool:
    """Admissibility against the worst corner of the whole fee box.

    Used before sweeps; per-fee checks still run because b > 1 excludes only
    a sliver of the box rather than all of it.
    """
    worst_m = C_MAX * v0            # c - m maximal at (m, c) = (0, C_MAX)
    worst_i = M_MAX * v0            # m - c maximal at (m, c) = (M_MAX, 0)
    ok_m = manager.a > worst_m if manager.b > 1.0 else manager.a >= worst_m
    ok_i = investor.a > worst_i if investor.b > 1.0 else investor.a >= worst_i
    return ok_m and ok_i


def manager_composite_utility(fee: FeeStructure, p: HaraParams, v0: float, vT: float) -> float:
    """Manager's utility of her payoff at fund value vT.

    Constant below (1+m-c)v0, then two increasing concave pieces joined
    continuously; the middle/last pieces meet with a concave kink.
    """
    return hara_utility(p, manager_payoff(fee, v0, vT))


def chord_slope_h(fee: FeeStructure, p: HaraParams, v0: float) -> float:
    """Average utility slope of the manager from 0 to the upper kink (1+m)v0."""
    top = _power(fee.m * v0 + p.a, 1.0 - p.b)
    bottom = _power(v0 * (fee.m - fee.c) + p.a, 1.0 - p.b)
    return (top - bottom) / ((1.0 - p.b) * (1.0 + fee.m) * v0)


def classify_case(fee: FeeStructure, p: HaraParams, v0: float) -> CaseTag:
    """Concavification regime of (fee, utility): compares the chord slope H
    with the one-sided marginal utilities at the upper kink.

    Ties (H equal to either bound) belong to B.
    """
    h = chord_slope_h(fee, p, v0)
    upper_after = fee.alpha * _power(fee.m * v0 + p.a, -p.b)
    upper_before = _power(fee.m * v0 + p.a, -p.b)
    if h < upper_after:
        return CaseTag.A
    if h <= upper_before:
        return CaseTag.B
    return CaseTag.C

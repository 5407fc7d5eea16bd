"""Optimal terminal fund value: budget multiplier, closed-form evaluator,
moments and Sharpe ratio.

The dual maximizer maps the kernel into bands (power branch, flat band,
second power branch, ruin) whose edges are marginal slopes divided by the
multiplier y.  The budget h(y) = E[Z V(y, Z)] is strictly decreasing, so the
multiplier solving h(y) = v0 is found by bracketed root finding, and every
expectation is a sum of truncated power moments of the kernel over the bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .concavify import ConcaveEnvelope, build_envelope, inverse_marginal_last, inverse_marginal_middle
from .contract import FeeStructure
from .market import MarketParams, partial_power_expectation
from .preferences import CaseTag, HaraParams, _power

_EXPAND = 16.0
_MAX_EXPANSIONS = 16          # 16 x factor-16 steps ~ 2^64 range each way
_BUDGET_RTOL = 1e-11
_VAR_FLOOR = 1e-16


class SolveError(RuntimeError):
    """Budget equation could not be bracketed or met its tolerance."""


@dataclass(frozen=True)
class OptimalWealthSolution:
    """Solved optimal terminal value for one (fee, manager utility, market).

    z_power_end  -- kernel value where the performance-fee power branch ends
    z_flat_end   -- end of the flat band (case C only; equals z_support in B)
    z_support    -- kernel value beyond which the fund is worth 0
    """

    envelope: ConcaveEnvelope
    market: MarketParams
    y_star: float
    z_power_end: float
    z_flat_end: float | None
    z_support: float

    @property
    def case_tag(self) -> CaseTag:
        return self.envelope.case_tag

    @property
    def fee(self) -> FeeStructure:
        return self.envelope.fee

    @property
    def theta1(self) -> float:
        return self.envelope.theta1

    def thresholds(self) -> tuple[float, ...]:
        if self.case_tag is CaseTag.A:
            return (self.z_support,)
        if self.case_tag is CaseTag.B:
            return (self.z_power_end, self.z_support)
        return (self.z_power_end, self.z_flat_end, self.z_support)


def _power_coefs(fee: FeeStructure, p: HaraParams, v0: float) -> tuple[float, float]:
    # Last-piece inverse marginal I3(u) = A0 * u^(-1/b) + L with the
    # multiplier folded in later; A0 excludes y.
    A0 = _power(fee.alpha, (1.0 - p.b) / p.b)
    L = (1.0 + fee.m - fee.m / fee.alpha) * v0 - p.a / fee.alpha
    return A0, L


def budget(envelope: ConcaveEnvelope, market: MarketParams, y: float) -> float:
    """h(y) = E[Z V(y, Z)] assembled from truncated kernel moments."""
    fee, p, v0 = envelope.fee, envelope.hara, envelope.v0
    b = p.b
    case = envelope.case_tag
    A0, L = _power_coefs(fee, p, v0)
    z_support = envelope.slope / y
    z_power = z_support if case is CaseTag.A else envelope.slope_i3 / y

    ppe = lambda k, lo, hi: partial_power_expectation(market, k, lo, hi)
    out = A0 * _power(y, -1.0 / b) * ppe(1.0 - 1.0 / b, 0.0, z_power) + L * ppe(1.0, 0.0, z_power)
    if case is not CaseTag.A:
        z_flat = z_support if case is CaseTag.B else envelope.slope_i2 / y
        out += (1.0 + fee.m) * v0 * ppe(1.0, z_power, z_flat)
        if case is CaseTag.C:
            out += _power(y, -1.0 / b) * ppe(1.0 - 1.0 / b, z_flat, z_support)
            out += (v0 - p.a) * ppe(1.0, z_flat, z_support)
    return out


def solve_y_star(fee: FeeStructure, manager: HaraParams, market: MarketParams) -> OptimalWealthSolution:
    """Find the unique multiplier with E[Z V] = v0 and package the solution."""
    env = build_envelope(fee, manager, market.v0)
    return solve_from_envelope(env, market)


def solve_from_envelope(env: ConcaveEnvelope, market: MarketParams) -> OptimalWealthSolution:
    v0 = market.v0
    h = lambda y: budget(env, market, y)

    lo, hi = 1e-2, 1e2
    for _ in range(_MAX_EXPANSIONS):
        if h(lo) >= v0:
            break
        lo /= _EXPAND
    else:
        raise SolveError(f"budget bracket expansion failed below y={lo} for fee {env.fee}")
    for _ in range(_MAX_EXPANSIONS):
        if h(hi) <= v0:
            break
        hi *= _EXPAND
    else:
        raise SolveError(f"budget bracket expansion failed above y={hi} for fee {env.fee}")

    y = brentq(lambda t: h(t) - v0, lo, hi, xtol=1e-300, rtol=4.0 * math.ulp(1.0))
    if abs(h(y) - v0) > _BUDGET_RTOL * v0:
        raise SolveError(f"budget residual {abs(h(y) - v0):.3e} above tolerance for fee {env.fee}")

    case = env.case_tag
    z_support = env.slope / y
    z_power = z_support if case is CaseTag.A else env.slope_i3 / y
    z_flat = None if case is CaseTag.A else (z_support if case is CaseTag.B else env.slope_i2 / y)
    return OptimalWealthSolution(
        envelope=env, market=market, y_star=y,
        z_power_end=z_power, z_flat_end=z_flat, z_support=z_support,
    )


def optimal_terminal_value(sol: OptimalWealthSolution, z: float) -> float:
    """Closed-form V(z): nonincreasing in z, supported on {0} u [theta1, inf).

    Bands are closed on the right at the support edge (the tie is a null
    event under the continuous kernel law either way).
    """
    if z <= 0.0:
        raise ValueError(f"kernel value must be > 0 (got {z})")
    env, y = sol.envelope, sol.y_star
    case = env.case_tag
    if z > sol.z_support:
        return 0.0
    if case is CaseTag.A:
        return inverse_marginal_last(env, y * z)
    if z < sol.z_power_end:
        return inverse_marginal_last(env, y * z)
    if case is CaseTag.B or z <= sol.z_flat_end:
        return (1.0 + env.fee.m) * env.v0
    return inverse_marginal_middle(env, y * z)


def terminal_value_array(sol: OptimalWealthSolution, z: np.ndarray) -> np.ndarray:
    """Vectorized V(z) for Monte Carlo work."""
    env, y = sol.envelope, sol.y_star
    fee, p, v0 = env.fee, env.hara, env.v0
    A0, L = _power_coefs(fee, p, v0)
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    on_power = z <= sol.z_power_end if env.case_tag is CaseTag.A else z < sol.z_power_end
    zp = z[on_power]
    out[on_power] = A0 * (y * zp) ** (-1.0 / p.b) + L
    if env.case_tag is not CaseTag.A:
        flat_hi = sol.z_support if env.case_tag is CaseTag.B else sol.z_flat_end
        on_flat = (z >= sol.z_power_end) & (z <= flat_hi)
        out[on_flat] = (1.0 + fee.m) * v0
        if env.case_tag is CaseTag.C:
            on_mid = (z > sol.z_flat_end) & (z <= sol.z_support)
            zm = z[on_mid]
            out[on_mid] = (y * zm) ** (-1.0 / p.b) + v0 - p.a
    return out


def moments(sol: OptimalWealthSolution) -> tuple[float, float]:
    """(E[V], E[V^2]) in closed form from truncated kernel moments."""
    env, market, y = sol.envelope, sol.market, sol.y_star
    fee, p, v0 = env.fee, env.hara, env.v0
    b = p.b
    A0, L = _power_coefs(fee, p, v0)
    A = A0 * _power(y, -1.0 / b)
    ppe = lambda k, lo, hi: partial_power_expectation(market, k, lo, hi)

    zp = sol.z_power_end
    ev = A * ppe(-1.0 / b, 0.0, zp) + L * ppe(0.0, 0.0, zp)
    ev2 = A * A * ppe(-2.0 / b, 0.0, zp) + 2.0 * A * L * ppe(-1.0 / b, 0.0, zp) + L * L * ppe(0.0, 0.0, zp)
    if env.case_tag is not CaseTag.A:
        z_flat = sol.z_support if env.case_tag is CaseTag.B else sol.z_flat_end
        flat = (1.0 + fee.m) * v0
        ev += flat * ppe(0.0, zp, z_flat)
        ev2 += flat * flat * ppe(0.0, zp, z_flat)
        if env.case_tag is CaseTag.C:
            B = _power(y, -1.0 / b)
            K = v0 - p.a
            ev += B * ppe(-1.0 / b, z_flat, sol.z_support) + K * ppe(0.0, z_flat, sol.z_support)
            ev2 += (B * B * ppe(-2.0 / b, z_flat, sol.z_support)
                    + 2.0 * B * K * ppe(-1.0 / b, z_flat, sol.z_support)
                    + K * K * ppe(0.0, z_flat, sol.z_support))
    return ev, ev2


def sharpe_ratio(sol: OptimalWealthSolution) -> float:
    """(E[V] - v0 (1+r)) / std(V); rejects a numerically deterministic fund."""
    ev, ev2 = moments(sol)
    var = ev2 - ev * ev
    if var <= _VAR_FLOOR:
        raise SolveError(f"fund value variance {var:.3e} is numerically degenerate")
    market = sol.market
    return (ev - market.v0 * (1.0 + market.r)) / math.sqrt(var)

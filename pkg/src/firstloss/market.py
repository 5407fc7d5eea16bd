"""Black-Scholes market primitives: pricing kernel and its truncated power moments.

Everything downstream (budget equations, value functions, fund moments) is
assembled from a single closed-form primitive, ``partial_power_expectation``,
so that only one formula needs independent verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr


class MarketError(ValueError):
    """Invalid market parameters or arguments."""


@dataclass(frozen=True)
class MarketParams:
    """Constant-coefficient market over a fixed horizon.

    r         -- risk-free rate per year (may be negative)
    gamma     -- market price of risk per sqrt(year), strictly positive
    horizon_T -- investment horizon in years
    v0        -- initial fund capital
    sigma     -- annual volatility of the risky asset; only the constant-mix
                 benchmark needs it, so it is optional
    """

    r: float = 0.02
    gamma: float = 0.40
    horizon_T: float = 1.0
    v0: float = 1.0
    sigma: float | None = None

    def __post_init__(self) -> None:
        if not self.gamma > 0.0:
            raise MarketError(f"gamma must be > 0 (got {self.gamma}); a riskless market is out of scope")
        if not self.horizon_T > 0.0:
            raise MarketError(f"horizon_T must be > 0 (got {self.horizon_T})")
        if not self.v0 > 0.0:
            raise MarketError(f"v0 must be > 0 (got {self.v0})")
        if self.sigma is not None and not self.sigma > 0.0:
            raise MarketError(f"sigma must be > 0 when present (got {self.sigma})")

    @property
    def log_drift(self) -> float:
        """(r + gamma^2/2) * T, the negated drift of log Z_T."""
        return (self.r + 0.5 * self.gamma**2) * self.horizon_T

    @property
    def log_vol(self) -> float:
        """gamma * sqrt(T), the standard deviation of log Z_T."""
        return self.gamma * math.sqrt(self.horizon_T)


def state_price_density(params: MarketParams, w: float) -> float:
    """Terminal pricing kernel Z_T for a Brownian endpoint W_T = w.

    Z_T = exp(-(r + gamma^2/2) T - gamma w); strictly positive.
    """
    return math.exp(-params.log_drift - params.gamma * w)


def _d_bound(params: MarketParams, x: float) -> float:
    # d_x = (log(1/x) - (r + g^2/2)T) / (g sqrt(T)); explicit branches so that
    # x = 0 and x = +inf never reach log().
    if x < 0.0:
        raise MarketError(f"kernel bound must be >= 0 (got {x})")
    if x == 0.0:
        return math.inf
    if math.isinf(x):
        return -math.inf
    return (-math.log(x) - params.log_drift) / params.log_vol


def _phi(d: float) -> float:
    # Normal CDF with Phi(+inf)=1, Phi(-inf)=0; ndtr is erfc-based with
    # absolute error below 1e-15.
    if math.isinf(d):
        return 1.0 if d > 0 else 0.0
    return float(ndtr(d))


def partial_power_expectation(params: MarketParams, k: float, a: float, b: float) -> float:
    """E[Z_T^k 1{a < Z_T < b}] at time zero, in closed form.

    Z_T is lognormal, so the truncated power moment reduces to two normal CDF
    evaluations.  a = 0 and b = +inf are legal; a > b is rejected.
    """
    if a < 0.0:
        raise MarketError(f"lower bound must be >= 0 (got {a})")
    if a > b:
        raise MarketError(f"empty kernel interval: a={a} > b={b}")
    if a == b:
        return 0.0
    mu, sig = params.log_drift, params.log_vol
    d_a = _d_bound(params, a)
    d_b = _d_bound(params, b)
    scale = math.exp(-k * mu + 0.5 * (k * sig) ** 2)
    lo = _phi(d_a + k * sig) if math.isfinite(d_a) else 1.0
    hi = _phi(d_b + k * sig) if math.isfinite(d_b) else 0.0
    return scale * (lo - hi)


def band_probability(params: MarketParams, a: float, b: float) -> float:
    """P(a < Z_T < b); the k = 0 special case kept for readability."""
    return partial_power_expectation(params, 0.0, a, b)


def sample_z(params: MarketParams, seed: int, n: int) -> np.ndarray:
    """n i.i.d. draws of Z_T, deterministic given the seed."""
    if n < 1:
        raise MarketError(f"need at least one draw (got n={n})")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(n) * math.sqrt(params.horizon_T)
    return np.exp(-params.log_drift - params.gamma * w)


def kernel_to_normal(params: MarketParams, z: float) -> float:
    """The standardized normal coordinate w with Z_T(w * sqrt(T) ... ) = z.

    Inverse of z = exp(-(r+g^2/2)T - g sqrt(T) w); bands (z_lo, z_hi) on the
    kernel map to (d(z_hi), d(z_lo)) in w, which is what the quadrature uses.
    """
    return _d_bound(params, z)

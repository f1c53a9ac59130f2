"""Market and contract data, the put payoff and the analytic European put."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr


@dataclass(frozen=True)
class ModelParams:
    """Black-Scholes put data plus the time-scheme weight.

    Attributes
    ----------
    sigma : float
        Volatility in year^-1/2.
    r : float
        Risk-free rate in year^-1.
    strike : float
        Strike price E.
    maturity : float
        Time to expiry T in years.
    s_max : float
        Truncation of the asset axis. Must exceed the strike.
    xi : float
        Intensity of the sinh stretching around the strike.
    theta : float
        Weight on the already known time level (0 is implicit Euler,
        0.5 is Crank-Nicolson).
    """

    sigma: float
    r: float
    strike: float
    maturity: float
    s_max: float
    xi: float
    theta: float = 0.5

    def __post_init__(self) -> None:
        checks = {
            "sigma": self.sigma > 0,
            "r": self.r >= 0,
            "strike": self.strike > 0,
            "maturity": self.maturity > 0,
            "s_max": self.s_max > self.strike,
            "xi": self.xi > 0,
            "theta": 0.0 <= self.theta <= 1.0,
        }
        for name, ok in checks.items():
            if not ok:
                raise ValueError(f"invalid {name}={getattr(self, name)!r}")

    @classmethod
    def test_case_1(cls, **overrides) -> "ModelParams":
        """European benchmark: sigma=0.2, r=0.05, E=10, T=0.5, xi=1, S_max=5E."""
        base = cls(sigma=0.2, r=0.05, strike=10.0, maturity=0.5, s_max=50.0, xi=1.0)
        return replace(base, **overrides)

    @classmethod
    def test_case_2(cls, **overrides) -> "ModelParams":
        """American benchmark: sigma=0.3, r=0.1, E=100, T=1, xi=0.1, S_max=5E."""
        base = cls(sigma=0.3, r=0.1, strike=100.0, maturity=1.0, s_max=500.0, xi=0.1)
        return replace(base, **overrides)


def norm_cdf(x):
    """Standard normal distribution function.

    Backed by ``scipy.special.ndtr`` (erf/erfc based, ~1e-16 absolute).
    """
    return ndtr(x)


def put_payoff(s, strike: float):
    """Put payoff max(strike - s, 0); negative prices are rejected."""
    s_arr = np.asarray(s, dtype=float)
    if strike <= 0:
        raise ValueError("strike must be positive")
    if np.any(s_arr < 0):
        raise ValueError("asset price must be non-negative")
    out = np.maximum(strike - s_arr, 0.0)
    return out if out.ndim else float(out)


def bs_put_exact(s, t: float, p: ModelParams):
    """Analytic Black-Scholes European put value at time ``t``.

    Parameters
    ----------
    s : float or array_like
        Asset prices, ``s >= 0``.
    t : float
        Calendar time with ``0 <= t < T``.
    p : ModelParams
        Model data; only sigma, r, strike and maturity are used.
    """
    if not 0.0 <= t < p.maturity:
        raise ValueError("t must satisfy 0 <= t < maturity; use put_payoff at expiry")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("asset price must be non-negative")
    tau = p.maturity - t
    discount = p.strike * np.exp(-p.r * tau)
    vol = p.sigma * np.sqrt(tau)
    with np.errstate(divide="ignore"):
        d1 = (np.log(s_arr / p.strike) + (p.r + 0.5 * p.sigma**2) * tau) / vol
    d2 = d1 - vol
    # at s = 0 the log is -inf so both cdfs are 1 and the s-term vanishes
    value = discount * norm_cdf(-d2) - np.where(s_arr > 0, s_arr * norm_cdf(-d1), 0.0)
    value = np.maximum(value, 0.0)
    return value if value.ndim else float(value)

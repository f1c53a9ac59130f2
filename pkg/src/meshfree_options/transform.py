"""Sinh stretching of the asset axis onto [0, 1] and the transformed PDE coefficients.

With ``b = asinh(xi*E)`` and ``c = asinh(xi*(S_max - E)) + b`` the map is

    x(s) = (asinh(xi*(s - E)) + b) / c,      s(x) = sinh(c*x - b)/xi + E,

so nodes uniformly spaced in ``x`` cluster around the strike. The put PDE
in ``x`` reads ``V_t + alpha V_xx + beta V_x - r V = 0`` with

    alpha = sigma^2/2 * (s/s')^2,   beta = -alpha * s''/s' + r * s/s'.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams


@dataclass(frozen=True)
class TransformCoefficients:
    """Diffusion/convection coefficients at ``x`` and the two reaction constants."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma1: float
    gamma2: float


@dataclass(frozen=True)
class CoefficientValues:
    """alpha, beta and the derivatives the weak-form kernels need, at a set of points."""

    alpha: np.ndarray
    alpha_x: np.ndarray
    alpha_xx: np.ndarray
    beta: np.ndarray
    beta_x: np.ndarray


class SinhTransform:
    """Closed-form stretching map, its derivatives and the PDE coefficients."""

    def __init__(self, p: ModelParams):
        self.params = p
        self.b = float(np.arcsinh(p.xi * p.strike))
        self.c = float(np.arcsinh(p.xi * (p.s_max - p.strike)) + self.b)

    def x_of_s(self, s):
        s = np.asarray(s, dtype=float)
        p = self.params
        if np.any(s < 0) or np.any(s > p.s_max * (1 + 1e-14)):
            raise ValueError("s must lie in [0, s_max]")
        x = (np.arcsinh(p.xi * (s - p.strike)) + self.b) / self.c
        return np.clip(x, 0.0, 1.0)

    def s_of_x(self, x):
        x = self._checked_x(x)
        p = self.params
        return np.sinh(self.c * x - self.b) / p.xi + p.strike

    def ds(self, x):
        """First derivative s'(x)."""
        x = self._checked_x(x)
        return self.c * np.cosh(self.c * x - self.b) / self.params.xi

    def d2s(self, x):
        """Second derivative s''(x)."""
        x = self._checked_x(x)
        return self.c**2 * np.sinh(self.c * x - self.b) / self.params.xi

    def coefficient_values(self, x) -> CoefficientValues:
        """alpha, alpha', alpha'', beta, beta' at ``x`` in closed form.

        Writing ``q = s/s'`` and ``g = s''/s' = c tanh(z)`` with ``z = c x - b``:
        ``q' = 1 - q g``, ``q'' = -(q' g + q g')``, ``g' = c^2 sech^2 z``.
        """
        x = self._checked_x(x)
        p = self.params
        c = self.c
        z = c * x - self.b
        q = (np.sinh(z) + p.xi * p.strike) / (c * np.cosh(z))
        g = c * np.tanh(z)
        dg = c**2 / np.cosh(z) ** 2
        dq = 1.0 - q * g
        d2q = -(dq * g + q * dg)
        var = p.sigma**2
        alpha = 0.5 * var * q**2
        alpha_x = var * q * dq
        alpha_xx = var * (dq**2 + q * d2q)
        beta = -alpha * g + p.r * q
        beta_x = -alpha_x * g - alpha * dg + p.r * dq
        return CoefficientValues(alpha, alpha_x, alpha_xx, beta, beta_x)

    __call__ = coefficient_values

    @staticmethod
    def _checked_x(x):
        x = np.asarray(x, dtype=float)
        if np.any(x < -1e-14) or np.any(x > 1 + 1e-14):
            raise ValueError("x must lie in [0, 1]")
        return x


@dataclass(frozen=True)
class ConstantCoefficients:
    """Frozen alpha, beta (all derivatives zero); used for verification runs."""

    alpha: float
    beta: float = 0.0

    def __call__(self, x) -> CoefficientValues:
        x = np.asarray(x, dtype=float)
        zero = np.zeros_like(x)
        return CoefficientValues(zero + self.alpha, zero, zero, zero + self.beta, zero)


def reaction_constants(r: float, theta: float, dt: float) -> tuple[float, float]:
    """Return ``(gamma1, gamma2) = (-theta r + 1/dt, -(theta - 1) r + 1/dt)``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return -theta * r + 1.0 / dt, -(theta - 1.0) * r + 1.0 / dt


def x_of_s(s, p: ModelParams):
    return SinhTransform(p).x_of_s(s)


def s_of_x(x, p: ModelParams):
    return SinhTransform(p).s_of_x(x)


def coefficients_at(x, dt: float, p: ModelParams) -> TransformCoefficients:
    """alpha(x), beta(x) and the reaction constants for step ``dt``."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0) or np.any(x_arr >= 1):
        raise ValueError("x must be interior to (0, 1)")
    vals = SinhTransform(p).coefficient_values(x_arr)
    g1, g2 = reaction_constants(p.r, p.theta, dt)
    return TransformCoefficients(vals.alpha, vals.beta, g1, g2)

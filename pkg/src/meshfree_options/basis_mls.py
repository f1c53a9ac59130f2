"""Moving least squares shape functions with a linear basis and cubic spline weight."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ShapeEval, ShapeTable, candidate_window, uniform_spacing


class SupportDeficiencyError(ValueError):
    """The MLS moment matrix is singular or too ill-conditioned at a point."""


@dataclass(frozen=True)
class MlsConfig:
    """MLS settings.

    Attributes
    ----------
    rw : float
        Support radius of the weight function, in x units.
    m : int
        Size of the polynomial basis; only the linear basis (2) is supported.
    det_tol : float
        A point is rejected when ``det(A) <= det_tol * trace(A)**2``.
    """

    rw: float
    m: int = 2
    det_tol: float = 1e-14

    def __post_init__(self) -> None:
        if self.m != 2:
            raise ValueError("only the linear basis m=2 is implemented")
        if self.rw <= 0:
            raise ValueError("rw must be positive")


def cubic_spline_weight(d, rw: float):
    """Cubic spline weight and its first two derivatives with respect to ``d``.

    Parameters
    ----------
    d : array_like
        Non-negative distances.
    rw : float
        Support radius.

    Returns
    -------
    w, dw, d2w : ndarray
        Weight, d w/d d and d^2 w/d d^2. All vanish for ``d >= rw``.
    """
    r = np.asarray(d, dtype=float) / rw
    inner = r <= 0.5
    outer = (r > 0.5) & (r < 1.0)
    w = np.where(inner, 2 / 3 - 4 * r**2 + 4 * r**3, 0.0)
    w = np.where(outer, 4 / 3 - 4 * r + 4 * r**2 - 4 / 3 * r**3, w)
    dw = np.where(inner, -8 * r + 12 * r**2, 0.0)
    dw = np.where(outer, -4 + 8 * r - 4 * r**2, dw)
    d2w = np.where(inner, -8 + 24 * r, 0.0)
    d2w = np.where(outer, 8 - 8 * r, d2w)
    return w, dw / rw, d2w / rw**2


def _inv2(a: np.ndarray) -> np.ndarray:
    det = a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
    out = np.empty_like(a)
    out[:, 0, 0] = a[:, 1, 1]
    out[:, 1, 1] = a[:, 0, 0]
    out[:, 0, 1] = -a[:, 0, 1]
    out[:, 1, 0] = -a[:, 1, 0]
    return out / det[:, None, None]


class MlsBasis:
    """MLS shape functions on an equispaced node set.

    Everything is evaluated in a frame centred at the evaluation point and
    scaled by the spacing, so the moment matrix stays O(1).
    """

    def __init__(self, nodes: np.ndarray, cfg: MlsConfig):
        self.nodes = np.asarray(nodes, dtype=float)
        self.h = uniform_spacing(self.nodes)
        self.cfg = cfg

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    def evaluate(self, x) -> ShapeTable:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        h, rw = self.h, self.cfg.rw
        index, inside = candidate_window(x, h, self.n_nodes, rw)
        offset = self.nodes[index] - x[:, None]
        w, dw, d2w = cubic_spline_weight(np.abs(offset), rw)
        valid = inside & (w > 0)
        w = np.where(valid, w, 0.0)
        # x-derivatives of w(|x - x_j|)
        w_x = np.where(valid, dw * np.sign(-offset), 0.0)
        w_xx = np.where(valid, d2w, 0.0)
        d = offset / h

        def moments(v):
            s0, s1, s2 = v.sum(1), (v * d).sum(1), (v * d * d).sum(1)
            return np.stack([np.stack([s0, s1], -1), np.stack([s1, s2], -1)], -2)

        def rhs(v):
            return np.stack([v, v * d], 1)

        a = moments(w)
        det = a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] ** 2
        trace = a[:, 0, 0] + a[:, 1, 1]
        bad = ~(det > self.cfg.det_tol * trace**2)
        if np.any(bad):
            raise SupportDeficiencyError(f"MLS moment matrix singular at x={x[bad][0]!r}")
        a_x, a_xx = moments(w_x), moments(w_xx)
        b, b_x, b_xx = rhs(w), rhs(w_x), rhs(w_xx)

        ainv = _inv2(a)
        ainv_x = -ainv @ a_x @ ainv
        ainv_xx = -ainv_x @ a_x @ ainv - ainv @ a_xx @ ainv - ainv @ a_x @ ainv_x
        ab = ainv @ b
        t1 = ainv @ b_x + ainv_x @ b
        t2 = 2 * ainv_x @ b_x + ainv @ b_xx + ainv_xx @ b
        # p(x) = [1, 0] and p_x = [0, 1/h] in the local frame
        phi = ab[:, 0]
        dphi = t1[:, 0] + ab[:, 1] / h
        d2phi = 2 * t1[:, 1] / h + t2[:, 0]
        return ShapeTable(index, valid, phi, dphi, d2phi)

    def shape(self, x: float) -> ShapeEval:
        return self.evaluate([x]).point(0)


def mls_shape(x: float, nodes: np.ndarray, cfg: MlsConfig) -> ShapeEval:
    """MLS shape functions and derivatives at a single point."""
    return MlsBasis(nodes, cfg).shape(x)

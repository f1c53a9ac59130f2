"""Radial point interpolation with Wu's C4 compactly supported functions plus a linear basis."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .grid import ShapeEval, ShapeTable, candidate_window, uniform_spacing

# R(r) = (1 - r)^6 q(r); kept factored so values near r = 1 stay accurate
_Q = np.array([6.0, 36.0, 82.0, 72.0, 30.0, 5.0])
_Q_D1 = P.polyder(_Q)
_Q_D2 = P.polyder(_Q, 2)

# nodes closer than rw*(1 - _EDGE) are members of a support set
_EDGE = 1e-9


class SingularInterpolationError(ValueError):
    """The local interpolation matrix is singular for a set of centres."""


@dataclass(frozen=True)
class RpiConfig:
    """RPI settings: radial support radius ``rw`` and monomial count ``m`` (2)."""

    rw: float
    m: int = 2
    pivot_tol: float = 1e-13

    def __post_init__(self) -> None:
        if self.m != 2:
            raise ValueError("only constant + linear monomials (m=2) are implemented")
        if self.rw <= 0:
            raise ValueError("rw must be positive")


def wu_csrbf(d, rw: float):
    """Wu's C4 function and its first two derivatives with respect to ``d``."""
    r = np.asarray(d, dtype=float) / rw
    u = np.clip(1.0 - r, 0.0, None)
    q, q1, q2 = P.polyval(r, _Q), P.polyval(r, _Q_D1), P.polyval(r, _Q_D2)
    R = u**6 * q
    dR = u**5 * (u * q1 - 6 * q)
    d2R = u**4 * (30 * q - 12 * u * q1 + u**2 * q2)
    return R, dR / rw, d2R / rw**2


class RpiBasis:
    """RPI shape functions on an equispaced node set.

    The centre set at a point is every node strictly inside the radial
    support. Factorizations of the interpolation matrix are cached per
    contiguous index window ``(lo, hi)``; the cache belongs to the instance.
    """

    def __init__(self, nodes: np.ndarray, cfg: RpiConfig):
        self.nodes = np.asarray(nodes, dtype=float)
        self.h = uniform_spacing(self.nodes)
        self.cfg = cfg
        self._factor = lru_cache(maxsize=None)(self._factorize)

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    def interpolation_matrix(self, lo: int, hi: int) -> np.ndarray:
        """The block matrix [[R, P], [P^T, 0]] for centres ``lo..hi``."""
        centres = self.nodes[lo : hi + 1]
        n = centres.size
        g = np.zeros((n + 2, n + 2))
        g[:n, :n] = wu_csrbf(np.abs(centres[:, None] - centres[None, :]), self.cfg.rw)[0]
        g[:n, n] = 1.0
        g[:n, n + 1] = (centres - centres[0]) / self.h
        g[n:, :n] = g[:n, n:].T
        return g

    def _factorize(self, lo: int, hi: int):
        g = self.interpolation_matrix(lo, hi)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            lu, piv = lu_factor(g, check_finite=False)
        diag = np.abs(np.diag(lu))
        if hi - lo < 1 or diag.min() <= self.cfg.pivot_tol * diag.max():
            raise SingularInterpolationError(f"interpolation matrix singular for centres {lo}..{hi}")
        return lu, piv

    def evaluate(self, x) -> ShapeTable:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        index, inside = candidate_window(x, self.h, self.n_nodes, self.cfg.rw)
        dist = np.abs(self.nodes[index] - x[:, None])
        member = inside & (dist < self.cfg.rw * (1 - _EDGE))
        if not np.all(member.any(1)):
            raise SingularInterpolationError("point without any centre in its support")
        width = index.shape[1]
        first = np.argmax(member, 1)
        last = width - 1 - np.argmax(member[:, ::-1], 1)
        lo = index[np.arange(x.size), first]
        hi = index[np.arange(x.size), last]

        phi = np.zeros(index.shape)
        dphi = np.zeros(index.shape)
        d2phi = np.zeros(index.shape)
        keys = lo * self.n_nodes + hi
        for key in np.unique(keys):
            pts = np.flatnonzero(keys == key)
            a, b = divmod(int(key), self.n_nodes)
            factor = self._factor(a, b)
            centres = self.nodes[a : b + 1]
            n = centres.size
            dx = x[pts, None] - centres[None, :]
            R, dR, d2R = wu_csrbf(np.abs(dx), self.cfg.rw)
            ones, zeros = np.ones((pts.size, 1)), np.zeros((pts.size, 1))
            rows = [
                np.hstack([R, ones, (x[pts, None] - centres[0]) / self.h]),
                np.hstack([dR * np.sign(dx), zeros, ones / self.h]),
                np.hstack([d2R, zeros, zeros]),
            ]
            # G is symmetric, so shape rows are G^{-1} applied to each row vector
            cols = first[pts, None] + np.arange(n)[None, :]
            for target, row in zip((phi, dphi, d2phi), rows):
                target[pts[:, None], cols] = lu_solve(factor, row.T, check_finite=False)[:n].T
        return ShapeTable(index, member, phi, dphi, d2phi)

    def shape(self, x: float) -> ShapeEval:
        return self.evaluate([x]).point(0)


def rpi_shape(x: float, centers: np.ndarray, cfg: RpiConfig) -> ShapeEval:
    """RPI shape functions and derivatives at a single point."""
    return RpiBasis(centers, cfg).shape(x)

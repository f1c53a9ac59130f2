"""Local integrals over the sub-domains [x_i - r_Q, x_i + r_Q].

Every integral is taken separately over the left and right halves of the
sub-domain with a composite Simpson rule, so kernels with a kink at x_i
(|x - x_i| and sgn(x - x_i)) are integrated as smooth functions, using the
one-sided value of sgn on each half. Boundary terms are evaluated at the two
endpoints, right minus left.

Heaviside test function (LRPI), for trial function phi_j:

    A = int (alpha'' - beta') phi_j          B = int phi_j
    C = [(beta - alpha') phi_j]              D = [alpha phi_j']

Fundamental-solution test function u* = |x - x_i|/2 (LBIE):

    Atil = 1/2 int [(alpha'' - beta') |x - x_i| + (alpha' - beta) sgn] phi_j
    Btil = 1/2 int |x - x_i| phi_j
    Ctil = 1/2 int alpha sgn phi_j'
    Dtil = 1/2 [|x - x_i| (beta - alpha') phi_j]
    Etil = 1/2 [|x - x_i| alpha phi_j']
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .grid import Grid, ShapeTable
from .transform import CoefficientValues

LRPI_KINDS = ("A", "B", "C", "D")
LBIE_KINDS = ("Atil", "Btil", "Ctil", "Dtil", "Etil")

# composite Simpson panels per half sub-domain; see quadrature tests for the
# agreement with a 1024-panel refinement
DEFAULT_PANELS = 32


class ShapeProvider(Protocol):
    def evaluate(self, x) -> ShapeTable: ...


Coefficients = Callable[[np.ndarray], CoefficientValues]


@dataclass
class LocalIntegralRow:
    """One kernel row: node ``center``, kernel ``kind``, entries keyed by node index."""

    center: int
    kind: str
    entries: dict[int, float] = field(default_factory=dict)

    def dense(self, n_nodes: int) -> np.ndarray:
        out = np.zeros(n_nodes)
        for j, v in self.entries.items():
            out[j] = v
        return out


def simpson_rule(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Simpson points and weights on [a, b] with ``panels`` panels."""
    if panels < 1:
        raise ValueError("need at least one panel")
    x = np.linspace(a, b, 2 * panels + 1)
    w = np.ones(2 * panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return x, w * (b - a) / (6 * panels)


def kernel_bands(
    scheme: str,
    grid: Grid,
    basis: ShapeProvider,
    coefficients: Coefficients,
    panels: int = DEFAULT_PANELS,
    centers: np.ndarray | None = None,
) -> dict[str, np.ndarray]:
    """Kernel rows for the given centres in band layout.

    Returns a mapping kind -> array ``(len(centers), 2p + 1)`` with
    ``out[k, o + p]`` the coefficient of node ``centers[k] + o``.
    """
    if scheme not in ("LRPI", "LBIE"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if centers is None:
        centers = np.arange(1, grid.n_intervals)
    centers = np.asarray(centers, dtype=int)
    if np.any(centers <= 0) or np.any(centers >= grid.n_intervals):
        raise ValueError("kernel rows exist only for interior nodes")
    p = grid.half_bandwidth
    rq = grid.rq
    xc = grid.nodes[centers]

    t, wt = simpson_rule(0.0, 1.0, panels)
    # points: (rows, half, q); left half runs from x_i - r_Q up to x_i
    offsets = np.stack([rq * (t - 1.0), rq * t])
    xq = np.clip(xc[:, None, None] + offsets[None], 0.0, 1.0)
    sign = np.array([-1.0, 1.0])[None, :, None]
    dist = np.abs(offsets)[None]
    weight = (rq * wt)[None, None, :]

    shapes = basis.evaluate(xq.ravel())
    co = coefficients(xq.ravel())
    n_rows = centers.size
    per_row = xq[0].size
    row_of_point = np.repeat(np.arange(n_rows), per_row)

    def integrate(factor: np.ndarray, values: np.ndarray) -> np.ndarray:
        contrib = (weight * factor).ravel()[:, None] * values
        return _scatter(contrib, shapes, row_of_point, centers, p, n_rows)

    def reshape(v):
        return np.asarray(v).reshape(xq.shape)

    alpha, alpha_x, alpha_xx = reshape(co.alpha), reshape(co.alpha_x), reshape(co.alpha_xx)
    beta, beta_x = reshape(co.beta), reshape(co.beta_x)

    xe = np.clip(np.stack([xc - rq, xc + rq], 1), 0.0, 1.0)
    edge = basis.evaluate(xe.ravel())
    ce = coefficients(xe.ravel())
    edge_sign = np.tile([-1.0, 1.0], n_rows)
    edge_rows = np.repeat(np.arange(n_rows), 2)

    def boundary(factor: np.ndarray, values: np.ndarray) -> np.ndarray:
        contrib = (edge_sign * factor)[:, None] * values
        return _scatter(contrib, edge, edge_rows, centers, p, n_rows)

    out: dict[str, np.ndarray] = {}
    if scheme == "LRPI":
        out["A"] = integrate(alpha_xx - beta_x, shapes.phi)
        out["B"] = integrate(np.ones_like(alpha), shapes.phi)
        out["C"] = boundary(ce.beta - ce.alpha_x, edge.phi)
        out["D"] = boundary(ce.alpha, edge.dphi)
    else:
        out["Atil"] = integrate(0.5 * ((alpha_xx - beta_x) * dist + (alpha_x - beta) * sign), shapes.phi)
        out["Btil"] = integrate(0.5 * dist * np.ones_like(alpha), shapes.phi)
        out["Ctil"] = integrate(0.5 * alpha * sign, shapes.dphi)
        out["Dtil"] = boundary(0.5 * rq * (ce.beta - ce.alpha_x), edge.phi)
        out["Etil"] = boundary(0.5 * rq * ce.alpha, edge.dphi)
    return out


def _scatter(contrib, shapes: ShapeTable, row_of_point, centers, p, n_rows) -> np.ndarray:
    col = shapes.index - centers[row_of_point][:, None] + p
    keep = shapes.valid & (contrib != 0.0)
    if np.any(keep & ((col < 0) | (col > 2 * p))):
        raise AssertionError("kernel entry outside the declared bandwidth")
    out = np.zeros((n_rows, 2 * p + 1))
    rows = np.broadcast_to(row_of_point[:, None], col.shape)
    np.add.at(out, (rows[keep], col[keep]), contrib[keep])
    return out


def _rows(scheme, i, grid, basis, coefficients, panels) -> dict[str, LocalIntegralRow]:
    bands = kernel_bands(scheme, grid, basis, coefficients, panels, centers=np.array([i]))
    p = grid.half_bandwidth
    rows = {}
    for kind, band in bands.items():
        entries = {i + o: float(band[0, o + p]) for o in range(-p, p + 1) if 0 <= i + o <= grid.n_intervals and band[0, o + p] != 0.0}
        rows[kind] = LocalIntegralRow(i, kind, entries)
    return rows


def lrpi_rows(i: int, grid: Grid, basis: ShapeProvider, coefficients: Coefficients, panels: int = DEFAULT_PANELS) -> dict[str, LocalIntegralRow]:
    """A, B, C, D rows of the Heaviside-test weak form for interior node ``i``."""
    return _rows("LRPI", i, grid, basis, coefficients, panels)


def lbie_rows(i: int, grid: Grid, basis: ShapeProvider, coefficients: Coefficients, panels: int = DEFAULT_PANELS) -> dict[str, LocalIntegralRow]:
    """Atil .. Etil rows of the fundamental-solution weak form for interior node ``i``."""
    return _rows("LBIE", i, grid, basis, coefficients, panels)

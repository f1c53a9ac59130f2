"""Banded time-stepping systems for both schemes.

LBIE (unknowns: all N+1 fictitious values)
    P U^k = Q U^{k+1} + H^k, with interior rows
    P_i = (theta-1) Atil + g2 Btil - (theta-1) Ctil + (theta-1)(Dtil + Etil)
    Q_i = theta Atil + g1 Btil - theta Ctil + theta (Dtil + Etil)
    and collocation rows phi_j(0), phi_j(1) in P (Q rows zero, H carries
    the boundary value).

LRPI (unknowns: the N-1 interior nodal values)
    F V^k = G V^{k+1} + boundary terms, with
    F_i = (theta-1)(A + C + D) + g2 B,  G_i = theta (A + C + D) + g1 B,
    and the known boundary values folded into the right-hand side.

``g1 = -theta r + 1/dt`` and ``g2 = -(theta-1) r + 1/dt``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis_mls import MlsBasis, MlsConfig
from .basis_rpi import RpiBasis, RpiConfig
from .grid import Grid
from .linalg import BandedMatrix
from .model import ModelParams
from .quadrature import DEFAULT_PANELS, Coefficients, kernel_bands
from .transform import SinhTransform, reaction_constants


@dataclass(frozen=True)
class AssembledSystem:
    """Time-invariant matrices of one scheme for a fixed (grid, dt, theta).

    Attributes
    ----------
    left, right : BandedMatrix
        ``P, Q`` (LBIE) or ``F, G`` restricted to interior nodes (LRPI).
    boundary : ndarray
        LBIE: unit vector e_0; the step's boundary value scales it into H.
        LRPI: empty.
    scheme : str
        "LBIE" or "LRPI".
    left_edges, right_edges : ndarray
        LRPI only: columns of F and G for nodes 0 and N, shape ``(N-1, 2)``,
        which multiply the known boundary values.
    """

    left: BandedMatrix
    right: BandedMatrix
    boundary: np.ndarray
    scheme: str
    grid: Grid
    basis: object
    left_edges: np.ndarray | None = None
    right_edges: np.ndarray | None = None

    @property
    def dims(self) -> int:
        return self.left.n

    def boundary_vector(self, left_value: float) -> np.ndarray:
        return self.boundary * left_value


def make_basis(scheme: str, grid: Grid):
    """The trial-function family used by ``scheme`` on ``grid``."""
    if scheme == "LBIE":
        return MlsBasis(grid.nodes, MlsConfig(rw=grid.rw))
    if scheme == "LRPI":
        return RpiBasis(grid.nodes, RpiConfig(rw=grid.rw))
    raise ValueError(f"unknown scheme {scheme!r}")


def assemble_lbie(
    grid: Grid,
    p: ModelParams,
    dt: float,
    *,
    coefficients: Coefficients | None = None,
    panels: int = DEFAULT_PANELS,
    basis: MlsBasis | None = None,
) -> AssembledSystem:
    """Assemble ``P``, ``Q`` and the boundary template for the LBIE scheme."""
    basis = basis or make_basis("LBIE", grid)
    coefficients = coefficients or SinhTransform(p)
    g1, g2 = reaction_constants(p.r, p.theta, dt)
    th = p.theta
    k = kernel_bands("LBIE", grid, basis, coefficients, panels)
    flux = k["Dtil"] + k["Etil"] - k["Ctil"]
    n = grid.n_nodes
    width = 2 * grid.half_bandwidth + 1
    left = np.zeros((n, width))
    right = np.zeros((n, width))
    left[1:-1] = (th - 1) * (k["Atil"] + flux) + g2 * k["Btil"]
    right[1:-1] = th * (k["Atil"] + flux) + g1 * k["Btil"]

    ends = basis.evaluate(np.array([0.0, 1.0])).dense(n)
    pb = grid.half_bandwidth
    if np.any(ends[0, pb + 1 :] != 0) or np.any(ends[1, : n - pb - 1] != 0):
        raise AssertionError("boundary collocation row wider than the band")
    left[0, pb:] = ends[0, : pb + 1]
    left[-1, :pb + 1] = ends[1, n - pb - 1 :]
    boundary = np.zeros(n)
    boundary[0] = 1.0
    return AssembledSystem(BandedMatrix(left), BandedMatrix(right), boundary, "LBIE", grid, basis)


def assemble_lrpi(
    grid: Grid,
    p: ModelParams,
    dt: float,
    *,
    coefficients: Coefficients | None = None,
    panels: int = DEFAULT_PANELS,
    basis: RpiBasis | None = None,
) -> AssembledSystem:
    """Assemble interior ``F``, ``G`` and their boundary columns for the LRPI scheme."""
    basis = basis or make_basis("LRPI", grid)
    coefficients = coefficients or SinhTransform(p)
    g1, g2 = reaction_constants(p.r, p.theta, dt)
    th = p.theta
    k = kernel_bands("LRPI", grid, basis, coefficients, panels)
    stiff = k["A"] + k["C"] + k["D"]
    f_rows = (th - 1) * stiff + g2 * k["B"]
    g_rows = th * stiff + g1 * k["B"]

    pb = grid.half_bandwidth
    m = grid.n_intervals - 1
    # rows are centred on node i = row + 1; band column o + pb is node i + o
    node = np.arange(1, m + 1)[:, None] + np.arange(-pb, pb + 1)[None, :]
    edges = []
    for rows in (f_rows, g_rows):
        e = np.stack([np.where(node == 0, rows, 0.0).sum(1), np.where(node == grid.n_intervals, rows, 0.0).sum(1)], 1)
        edges.append(e)
        rows[(node <= 0) | (node >= grid.n_intervals)] = 0.0
    return AssembledSystem(
        BandedMatrix(f_rows),
        BandedMatrix(g_rows),
        np.zeros(0),
        "LRPI",
        grid,
        basis,
        left_edges=edges[0],
        right_edges=edges[1],
    )


def assemble(scheme: str, grid: Grid, p: ModelParams, dt: float, **kwargs) -> AssembledSystem:
    if scheme == "LBIE":
        return assemble_lbie(grid, p, dt, **kwargs)
    if scheme == "LRPI":
        return assemble_lrpi(grid, p, dt, **kwargs)
    raise ValueError(f"unknown scheme {scheme!r}")

"""Uniform node set on [0, 1] with its local integration and support radii."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# radii below are expressed as multiples of the spacing h
DEFAULT_RQ_FACTOR = 0.5
DEFAULT_RW_OVER_RQ = 4.0


@dataclass(frozen=True)
class Grid:
    """``N + 1`` equispaced nodes on [0, 1].

    Attributes
    ----------
    n_intervals : int
        Number of intervals N.
    rq_factor : float
        Sub-domain half-width r_Q in units of h.
    rw_over_rq : float
        Support radius r_w in units of r_Q.
    """

    n_intervals: int
    rq_factor: float = DEFAULT_RQ_FACTOR
    rw_over_rq: float = DEFAULT_RW_OVER_RQ

    def __post_init__(self) -> None:
        if self.n_intervals < 4:
            raise ValueError("need at least N=4 intervals")
        if not 0 < self.rq_factor <= 1.0:
            raise ValueError("rq_factor must lie in (0, 1]")
        if self.rw_over_rq <= 0:
            raise ValueError("rw_over_rq must be positive")

    @property
    def n_nodes(self) -> int:
        return self.n_intervals + 1

    @property
    def h(self) -> float:
        return 1.0 / self.n_intervals

    @property
    def rq(self) -> float:
        return self.rq_factor * self.h

    @property
    def rw(self) -> float:
        return self.rw_over_rq * self.rq

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_nodes) / self.n_intervals

    @property
    def support_reach(self) -> int:
        """Largest index distance at which a node can have nonzero weight."""
        return math.ceil(self.rw / self.h - 1e-9) - 1

    @property
    def half_bandwidth(self) -> int:
        """Largest |j - i| coupling node j to the sub-domain around node i."""
        span = (self.rq + self.rw) / self.h
        return math.ceil(span - 1e-9) - 1



@dataclass(frozen=True)
class ShapeEval:
    """Shape functions at a single point, restricted to the supporting nodes."""

    support: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    d2phi: np.ndarray


@dataclass(frozen=True)
class ShapeTable:
    """Shape functions at many points laid out on per-point index windows.

    ``index[k, j]`` is the node index of column ``j`` for point ``k``; columns
    whose index falls outside the grid or the support carry zero values and
    ``valid`` is False there.
    """

    index: np.ndarray
    valid: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    d2phi: np.ndarray

    def point(self, k: int) -> ShapeEval:
        keep = self.valid[k]
        return ShapeEval(self.index[k, keep], self.phi[k, keep], self.dphi[k, keep], self.d2phi[k, keep])

    def dense(self, n_nodes: int, which: str = "phi") -> np.ndarray:
        """Scatter one of the value arrays into an ``(n_points, n_nodes)`` matrix."""
        values = getattr(self, which)
        out = np.zeros((self.index.shape[0], n_nodes))
        rows = np.broadcast_to(np.arange(self.index.shape[0])[:, None], self.index.shape)
        out[rows[self.valid], self.index[self.valid]] = values[self.valid]
        return out


def uniform_spacing(nodes: np.ndarray) -> float:
    """Spacing of an equispaced node array starting at 0; raises otherwise."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2:
        raise ValueError("need a 1-D array of at least two nodes")
    h = (nodes[-1] - nodes[0]) / (nodes.size - 1)
    if abs(nodes[0]) > 1e-14 or np.max(np.abs(np.diff(nodes) - h)) > 1e-12 * max(1.0, abs(nodes[-1])):
        raise ValueError("nodes must be equispaced and start at 0")
    return h


def candidate_window(x: np.ndarray, h: float, n_nodes: int, reach: float) -> tuple[np.ndarray, np.ndarray]:
    """Index windows wide enough to hold every node within ``reach`` of each x.

    Returns the index array ``(n_points, width)`` and a mask of in-grid entries.
    """
    k = math.ceil(reach / h) + 1
    base = np.clip(np.floor(x / h).astype(int), 0, n_nodes - 1)
    index = base[:, None] + np.arange(-k, k + 2)[None, :]
    inside = (index >= 0) & (index < n_nodes)
    return np.clip(index, 0, n_nodes - 1), inside

"""Error norms, convergence ratios and the spectral stability diagnostic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import make_basis
from .grid import Grid
from .linalg import SingularMatrixError, dense_lu_solve, eigenvalues_dense
from .model import ModelParams
from .quadrature import DEFAULT_PANELS, kernel_bands
from .transform import SinhTransform

STABILITY_SLACK = 1e-10


@dataclass(frozen=True)
class ErrorReport:
    """Maximum and normalized RMS error over the sample points.

    ``rms`` is ``sqrt(sum diff^2) / n``, the normalization used by the
    benchmark tables (the prefactor sits outside the root).
    """

    rms: float
    max: float
    sample_points: np.ndarray | None = None
    ratio: float | None = None
    runtime: float | None = None


@dataclass(frozen=True)
class StabilityReport:
    """Spectrum summary of the interior stability matrix Upsilon."""

    upsilon_dim: int
    max_real_part: float
    amplification_bound: float
    eigenvalues: np.ndarray
    stable: bool


def error_metrics(approx, exact, sample_points=None) -> ErrorReport:
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if approx.shape != exact.shape or approx.ndim != 1:
        raise ValueError("approx and exact must be 1-D vectors of equal length")
    diff = approx - exact
    return ErrorReport(
        rms=float(np.sqrt(np.sum(diff**2)) / diff.size),
        max=float(np.max(np.abs(diff))),
        sample_points=None if sample_points is None else np.asarray(sample_points, dtype=float),
    )


def convergence_ratio(previous_max: float, current_max: float) -> float:
    """log2 of the error reduction between successive refinements."""
    if previous_max <= 0 or current_max <= 0:
        return math.nan
    return math.log2(previous_max / current_max)


def amplification_bound(eigenvalues, theta: float, dt: float) -> float:
    """max |(theta dt lam + 1) / ((theta - 1) dt lam + 1)| over the spectrum."""
    lam = np.asarray(eigenvalues, dtype=complex)
    return float(np.max(np.abs((theta * dt * lam + 1) / ((theta - 1) * dt * lam + 1))))


def stability_operators(scheme: str, p: ModelParams, n_intervals: int, *, panels: int = DEFAULT_PANELS, grid: Grid | None = None):
    """Interior mass matrix and spatial operator ``(mass, S)`` as dense arrays.

    LBIE: ``S = Atil - r Btil - Ctil + Dtil + Etil``; LRPI: ``S = A - r B + C + D``.
    The time-stepping matrices are ``left = (theta-1) S + mass/dt`` and
    ``right = theta S + mass/dt``.
    """
    grid = grid or Grid(n_intervals)
    basis = make_basis(scheme, grid)
    k = kernel_bands(scheme, grid, basis, SinhTransform(p), panels)
    if scheme == "LBIE":
        mass = k["Btil"]
        op = k["Atil"] - p.r * mass - k["Ctil"] + k["Dtil"] + k["Etil"]
    else:
        mass = k["B"]
        op = k["A"] - p.r * mass + k["C"] + k["D"]
    return _interior_dense(mass, grid), _interior_dense(op, grid)


def _interior_dense(band: np.ndarray, grid: Grid) -> np.ndarray:
    m = grid.n_intervals - 1
    pb = grid.half_bandwidth
    out = np.zeros((m, m))
    for row in range(m):
        for o in range(-pb, pb + 1):
            col = row + o
            if 0 <= col < m:
                out[row, col] = band[row, o + pb]
    return out


def stability_diagnostic(p: ModelParams, n_intervals: int, steps: int, scheme: str, *, panels: int = DEFAULT_PANELS) -> StabilityReport:
    """Eigen-analysis of ``Upsilon = mass^{-1} S`` on the interior nodes."""
    if n_intervals > 1024:
        raise ValueError("stability diagnostic is capped at N = 1024")
    mass, op = stability_operators(scheme, p, n_intervals, panels=panels)
    try:
        upsilon = dense_lu_solve(mass, op)
    except SingularMatrixError as exc:
        raise SingularMatrixError("interior mass matrix is singular") from exc
    eig = eigenvalues_dense(upsilon)
    dt = p.maturity / steps
    bound = amplification_bound(eig, p.theta, dt)
    return StabilityReport(
        upsilon_dim=upsilon.shape[0],
        max_real_part=float(np.max(eig.real)),
        amplification_bound=bound,
        eigenvalues=eig,
        stable=bound <= 1 + STABILITY_SLACK,
    )

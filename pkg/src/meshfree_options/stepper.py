"""Backward time marching: European, Bermudan and Richardson-extrapolated American puts."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .assembly import AssembledSystem, assemble
from .grid import Grid
from .linalg import BandedMatrix, ConvergenceError, SolverConfig, bicgstab
from .model import ModelParams, put_payoff
from .quadrature import DEFAULT_PANELS
from .transform import SinhTransform


class Scheme(str, Enum):
    LBIE = "LBIE"
    LRPI = "LRPI"


@dataclass(frozen=True)
class TimeScheme:
    """Uniform theta-weighted time stepping with ``steps`` steps over ``maturity``."""

    theta: float
    steps: int
    maturity: float

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("need at least one time step")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.theta not in (0.0, 0.5):
            warnings.warn(f"theta={self.theta} is outside the unconditionally stable set {{0, 0.5}}", stacklevel=2)

    @property
    def dt(self) -> float:
        return self.maturity / self.steps


@dataclass
class Solution:
    """Solver output at t = 0.

    ``values`` are fictitious nodal values (LBIE) or nodal prices (LRPI), with
    boundary nodes included in both cases.
    """

    scheme: str
    params: ModelParams
    grid: Grid
    steps: int
    values: np.ndarray
    basis: object
    iterations: list[int] = field(default_factory=list)
    american: bool = False

    @property
    def nodal_prices(self) -> np.ndarray:
        """Physical prices at the nodes."""
        if self.scheme == "LRPI":
            return self.values.copy()
        return self.basis.evaluate(self.grid.nodes).dense(self.grid.n_nodes) @ self.values


StepCallback = Callable[[int, np.ndarray], None]


def _left_boundary(p: ModelParams, t: float, american: bool) -> float:
    return p.strike if american else p.strike * math.exp(-p.r * (p.maturity - t))


class PayoffFit:
    """Payoff in the scheme's unknowns plus the map between unknowns and nodal prices.

    For LRPI the unknowns are nodal prices. For LBIE they are fictitious
    values ``U`` with nodal prices ``Phi U``, ``Phi[i, j] = phi_j(x_i)``; the
    payoff representation solves ``Phi U = payoff`` once.
    """

    def __init__(self, scheme: str, grid: Grid, basis, p: ModelParams):
        self.scheme = scheme
        self.nodal = put_payoff(SinhTransform(p).s_of_x(grid.nodes), p.strike)
        if scheme == "LRPI":
            self.collocation = None
            self.values = self.nodal.copy()
        else:
            table = basis.evaluate(grid.nodes)
            self.collocation = BandedMatrix.from_dense(table.dense(grid.n_nodes), grid.half_bandwidth)
            self.values = self.collocation.solve_direct(self.nodal)

    def constrain(self, values: np.ndarray, space: str = "physical") -> np.ndarray:
        """Early-exercise projection of the scheme's unknowns."""
        if self.collocation is None or space == "fictitious":
            return np.maximum(values, self.values)
        shortfall = np.maximum(self.nodal - self.collocation @ values, 0.0)
        if not shortfall.any():
            return values
        return values + self.collocation.solve_direct(shortfall)


def payoff_representation(scheme: str, grid: Grid, basis, p: ModelParams) -> np.ndarray:
    """Payoff in the scheme's unknowns: nodal samples (LRPI) or the MLS collocation fit (LBIE)."""
    return PayoffFit(scheme, grid, basis, p).values


def march(
    scheme: str,
    p: ModelParams,
    n_intervals: int,
    steps: int,
    *,
    american: bool = False,
    grid: Grid | None = None,
    solver: SolverConfig = SolverConfig(),
    panels: int = DEFAULT_PANELS,
    system: AssembledSystem | None = None,
    on_step: StepCallback | None = None,
    constraint_space: str = "physical",
) -> Solution:
    """Run the theta scheme from maturity back to t = 0.

    With ``american`` the early-exercise constraint is applied after every
    step (a Bermudan put with ``steps`` exercise dates). For LBIE,
    ``constraint_space="physical"`` floors the nodal prices ``Phi U`` at the
    payoff and maps back; ``"fictitious"`` floors ``U`` at the fitted payoff
    coefficients instead.
    """
    if constraint_space not in ("physical", "fictitious"):
        raise ValueError("constraint_space must be 'physical' or 'fictitious'")
    scheme = Scheme(scheme).value
    if n_intervals < 8:
        raise ValueError("need N >= 8")
    if steps < 1:
        raise ValueError("need M >= 1")
    grid = grid or Grid(n_intervals)
    if grid.n_intervals != n_intervals:
        raise ValueError("grid does not match N")
    ts = TimeScheme(p.theta, steps, p.maturity)
    dt = ts.dt
    system = system or assemble(scheme, grid, p, dt, panels=panels)
    basis = system.basis
    fit = PayoffFit(scheme, grid, basis, p)
    iterations: list[int] = []

    values = fit.values.copy()
    previous = None
    if on_step is not None:
        on_step(steps, values)
    for k in range(steps - 1, -1, -1):
        t_new = k * dt
        try:
            if scheme == "LBIE":
                rhs = system.right @ values + system.boundary_vector(_left_boundary(p, t_new, american))
                res = bicgstab(system.left, rhs, solver, x0=_guess(values, previous))
                previous, values = values, res.x
            else:
                known = np.array([_left_boundary(p, t_new + dt, american), 0.0])
                new_edges = np.array([_left_boundary(p, t_new, american), 0.0])
                rhs = system.right @ values[1:-1] + system.right_edges @ known - system.left_edges @ new_edges
                res = bicgstab(system.left, rhs, solver, x0=_guess(values, previous)[1:-1])
                previous, values = values, np.concatenate([[new_edges[0]], res.x, [new_edges[1]]])
        except ConvergenceError as exc:
            raise ConvergenceError(f"time step {k}: {exc.args[0]}", exc.residual, exc.iterations) from exc
        iterations.append(res.iterations)
        if american:
            values = fit.constrain(values, constraint_space)
        if on_step is not None:
            on_step(k, values)
    return Solution(scheme, p, grid, steps, values, basis, iterations, american)


def _guess(current: np.ndarray, previous: np.ndarray | None) -> np.ndarray:
    # linear extrapolation in time from the two latest levels
    return current if previous is None else 2.0 * current - previous


def price_european(scheme: str, p: ModelParams, n_intervals: int, steps: int, **kwargs) -> Solution:
    """European put on ``N`` intervals with ``M`` time steps."""
    return march(scheme, p, n_intervals, steps, american=False, **kwargs)


def price_bermudan(scheme: str, p: ModelParams, n_intervals: int, steps: int, **kwargs) -> Solution:
    """Put exercisable at each of the ``M`` time levels; approximates the American put."""
    return march(scheme, p, n_intervals, steps, american=True, **kwargs)


def price_american_richardson(scheme: str, p: ModelParams, n_intervals: int, steps: int, **kwargs) -> Solution:
    """Two-point extrapolation ``2 V_{2M} - V_M`` of Bermudan prices."""
    coarse = price_bermudan(scheme, p, n_intervals, steps, **kwargs)
    fine = price_bermudan(scheme, p, n_intervals, 2 * steps, **kwargs)
    out = Solution(
        coarse.scheme,
        p,
        coarse.grid,
        2 * steps,
        2.0 * fine.values - coarse.values,
        coarse.basis,
        coarse.iterations + fine.iterations,
        True,
    )
    return out


def evaluate_at(solution: Solution, s_points) -> np.ndarray:
    """Prices at asset values ``s_points`` from the scheme's own expansion."""
    s = np.atleast_1d(np.asarray(s_points, dtype=float))
    p = solution.params
    if np.any(s < 0) or np.any(s > p.s_max):
        raise ValueError("evaluation points must lie in [0, s_max]")
    x = SinhTransform(p).x_of_s(s)
    table = solution.basis.evaluate(x)
    coeffs = np.where(table.valid, solution.values[table.index], 0.0)
    return (table.phi * coeffs).sum(1)

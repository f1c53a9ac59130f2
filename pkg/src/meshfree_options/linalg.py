"""Banded storage, BiCGSTAB, and dense helpers used as oracles and for diagnostics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

BREAKDOWN = 1e-300
EIG_DIMENSION_CAP = 1100


class ConvergenceError(RuntimeError):
    """An iterative solve broke down or ran out of iterations."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations

    def __str__(self) -> str:
        return f"{self.args[0]} (residual {self.residual:.3e} after {self.iterations} iterations)"


class SingularMatrixError(np.linalg.LinAlgError):
    """A dense matrix is singular to working precision."""


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule for BiCGSTAB: ``||b - A x|| <= tolerance * ||b||``."""

    tolerance: float = 1e-10
    max_iterations: int = 200

    def __post_init__(self) -> None:
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


class BandedMatrix:
    """Square matrix stored by rows as ``data[i, o + p] = A[i, i + o]``.

    Entries whose column falls outside ``[0, n)`` are kept at zero.
    """

    def __init__(self, data: np.ndarray):
        data = np.array(data, dtype=float)
        if data.ndim != 2 or data.shape[1] % 2 == 0 or data.shape[0] < 1:
            raise ValueError("band data must have shape (n, 2p+1)")
        self.data = data
        self.n = data.shape[0]
        self.half_bandwidth = data.shape[1] // 2
        data[~self._in_range()] = 0.0

    def _in_range(self) -> np.ndarray:
        p = self.half_bandwidth
        cols = np.arange(self.n)[:, None] + np.arange(-p, p + 1)[None, :]
        return (cols >= 0) & (cols < self.n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def bands(self) -> np.ndarray:
        """Diagonals as rows, ``bands[o + p, i] = A[i, i + o]`` (read-only view)."""
        return self.data.T

    @classmethod
    def zeros(cls, n: int, half_bandwidth: int) -> "BandedMatrix":
        return cls(np.zeros((n, 2 * half_bandwidth + 1)))

    @classmethod
    def identity(cls, n: int) -> "BandedMatrix":
        return cls(np.ones((n, 1)))

    @classmethod
    def from_dense(cls, a: np.ndarray, half_bandwidth: int) -> "BandedMatrix":
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        p = half_bandwidth
        rows = np.arange(n)[:, None]
        cols = rows + np.arange(-p, p + 1)[None, :]
        ok = (cols >= 0) & (cols < n)
        data = np.where(ok, a[rows, np.clip(cols, 0, n - 1)], 0.0)
        outside = a.copy()
        outside[np.broadcast_to(rows, cols.shape)[ok], cols[ok]] = 0.0
        if np.any(outside != 0.0):
            raise ValueError("matrix has entries outside the declared band")
        return cls(data)

    def to_dense(self) -> np.ndarray:
        p = self.half_bandwidth
        out = np.zeros((self.n, self.n))
        rows = np.broadcast_to(np.arange(self.n)[:, None], self.data.shape)
        cols = rows + np.arange(-p, p + 1)[None, :]
        ok = self._in_range()
        out[rows[ok], cols[ok]] = self.data[ok]
        return out

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return band_matvec(self, v)

    __matmul__ = matvec

    def solve_direct(self, b: np.ndarray) -> np.ndarray:
        """Banded LU solve (LAPACK gbsv)."""
        p = self.half_bandwidth
        ab = np.zeros((2 * p + 1, self.n))
        for o in range(-p, p + 1):
            # LAPACK layout: ab[p + i - j, j] = A[i, j]
            i = np.arange(max(0, -o), min(self.n, self.n - o))
            ab[p - o, i + o] = self.data[i, o + p]
        return scipy.linalg.solve_banded((p, p), ab, b)


def band_matvec(a: BandedMatrix, v: np.ndarray) -> np.ndarray:
    """Product ``A v`` touching only the stored diagonals."""
    v = np.asarray(v, dtype=float)
    if v.shape != (a.n,):
        raise ValueError(f"dimension mismatch: matrix {a.n}, vector {v.shape}")
    p = a.half_bandwidth
    padded = np.concatenate([np.zeros(p), v, np.zeros(p)])
    out = np.zeros(a.n)
    for k in range(2 * p + 1):
        out += a.data[:, k] * padded[k : k + a.n]
    return out


class BicgstabResult(NamedTuple):
    x: np.ndarray
    iterations: int
    residual: float


def bicgstab(a: BandedMatrix, b: np.ndarray, cfg: SolverConfig = SolverConfig(), x0: np.ndarray | None = None) -> BicgstabResult:
    """Unpreconditioned BiCGSTAB with shadow residual equal to the initial residual.

    Convergence is declared on the true residual ``||b - A x||``, which is
    recomputed whenever the recursive residual passes the test; on a
    mismatch the iteration restarts from the current iterate.

    Returns
    -------
    BicgstabResult
        Solution, iteration count and the true residual norm.

    Raises
    ------
    ConvergenceError
        On breakdown or when ``cfg.max_iterations`` is exhausted.
    """
    b = np.asarray(b, dtype=float)
    x = np.zeros(a.n) if x0 is None else np.array(x0, dtype=float)
    target = cfg.tolerance * np.linalg.norm(b)
    r = b - a.matvec(x)
    res = np.linalg.norm(r)
    if res <= target:
        return BicgstabResult(x, 0, float(res))
    it = 0
    while it < cfg.max_iterations:
        shadow = r.copy()
        rho = alpha = omega = 1.0
        v = np.zeros(a.n)
        p = np.zeros(a.n)
        while it < cfg.max_iterations:
            it += 1
            rho_new = shadow @ r
            if abs(rho_new) < BREAKDOWN or abs(omega) < BREAKDOWN:
                raise ConvergenceError("BiCGSTAB breakdown", float(res), it)
            beta = (rho_new / rho) * (alpha / omega)
            rho = rho_new
            p = r + beta * (p - omega * v)
            v = a.matvec(p)
            denom = shadow @ v
            if abs(denom) < BREAKDOWN:
                raise ConvergenceError("BiCGSTAB breakdown", float(res), it)
            alpha = rho / denom
            s = r - alpha * v
            if np.linalg.norm(s) <= target:
                x = x + alpha * p
                r = s
            else:
                t = a.matvec(s)
                tt = t @ t
                if tt < BREAKDOWN:
                    raise ConvergenceError("BiCGSTAB breakdown", float(res), it)
                omega = (t @ s) / tt
                x = x + alpha * p + omega * s
                r = s - omega * t
            if np.linalg.norm(r) <= target:
                r = b - a.matvec(x)
                res = np.linalg.norm(r)
                if res <= target:
                    return BicgstabResult(x, it, float(res))
                break  # recursive residual drifted; restart from x
            res = np.linalg.norm(r)
    raise ConvergenceError("BiCGSTAB did not converge", float(np.linalg.norm(b - a.matvec(x))), it)


def dense_lu_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting (LAPACK getrf/getrs)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    diag = np.abs(np.diag(lu))
    if diag.min() <= np.finfo(float).eps * max(diag.max(), 1e-300) * a.shape[0]:
        raise SingularMatrixError("matrix is singular to working precision")
    return scipy.linalg.lu_solve((lu, piv), np.asarray(b, dtype=float))


def eigenvalues_dense(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense matrix (LAPACK geev: Hessenberg + shifted QR)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if a.shape[0] > EIG_DIMENSION_CAP:
        raise ValueError(f"dimension {a.shape[0]} exceeds the cap of {EIG_DIMENSION_CAP}")
    try:
        return np.linalg.eigvals(a).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError("eigenvalue iteration did not converge", float("nan"), 0) from exc

"""Meshless local weak-form pricing of European and American puts.

Two schemes are provided on a sinh-stretched uniform grid:

* ``LBIE`` - local boundary integral equations with moving least squares
  trial functions and the 1-D Laplace fundamental solution as test function.
* ``LRPI`` - local radial point interpolation with Wu's C4 compactly
  supported radial functions and a Heaviside test function.
"""

from .model import ModelParams, bs_put_exact, norm_cdf, put_payoff
from .transform import SinhTransform, TransformCoefficients, coefficients_at, s_of_x, x_of_s
from .grid import Grid
from .basis_mls import MlsBasis, MlsConfig, ShapeEval, SupportDeficiencyError, cubic_spline_weight, mls_shape
from .basis_rpi import RpiBasis, RpiConfig, SingularInterpolationError, rpi_shape, wu_csrbf
from .linalg import (
    BandedMatrix,
    BicgstabResult,
    ConvergenceError,
    SolverConfig,
    band_matvec,
    bicgstab,
    dense_lu_solve,
    eigenvalues_dense,
)
from .assembly import AssembledSystem, assemble_lbie, assemble_lrpi
from .stepper import (
    Scheme,
    Solution,
    TimeScheme,
    evaluate_at,
    price_american_richardson,
    price_bermudan,
    price_european,
)
from .analysis import ErrorReport, StabilityReport, amplification_bound, convergence_ratio, error_metrics, stability_diagnostic

__all__ = [
    "AssembledSystem",
    "BandedMatrix",
    "BicgstabResult",
    "ConvergenceError",
    "ErrorReport",
    "Grid",
    "MlsBasis",
    "MlsConfig",
    "ModelParams",
    "RpiBasis",
    "RpiConfig",
    "Scheme",
    "ShapeEval",
    "SingularInterpolationError",
    "SinhTransform",
    "Solution",
    "SolverConfig",
    "StabilityReport",
    "SupportDeficiencyError",
    "TimeScheme",
    "TransformCoefficients",
    "amplification_bound",
    "assemble_lbie",
    "assemble_lrpi",
    "band_matvec",
    "bicgstab",
    "bs_put_exact",
    "coefficients_at",
    "convergence_ratio",
    "cubic_spline_weight",
    "dense_lu_solve",
    "eigenvalues_dense",
    "error_metrics",
    "evaluate_at",
    "mls_shape",
    "norm_cdf",
    "price_american_richardson",
    "price_bermudan",
    "price_european",
    "put_payoff",
    "rpi_shape",
    "s_of_x",
    "stability_diagnostic",
    "wu_csrbf",
    "x_of_s",
]

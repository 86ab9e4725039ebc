"""Linearized quantum optomechanics with radiation pressure and a delayed photothermal force.

Typical use::

    from photomech import baseline_fig2, operating_point, steady_covariance, cooling_report
    sys = baseline_fig2().with_normalized(gamma1=0.1, power_mW=15)
    op = operating_point(sys)
    print(cooling_report(op, sys).n_eff)
"""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .covariance import CovarianceMatrix, steady_covariance, transfer_matrix
from .errors import NumericError, ParameterError, PhotomechError, StabilityError
from .observables import (
    CoolingReport,
    EntanglementReport,
    cooling_report,
    effective_temperature,
    entanglement_report,
    log_negativity,
    phonon_number_exact,
)
from .params import MaterialParams, SystemParams, baseline_fig2, derive_couplings, load_params
from .stability import characteristic_coefficients, is_stable
from .steady_state import OperatingPoint, operating_point, solve_operating_points

__all__ = [
    "BACKEND",
    "CoolingReport",
    "CovarianceMatrix",
    "EntanglementReport",
    "MaterialParams",
    "NumericError",
    "OperatingPoint",
    "ParameterError",
    "PhotomechError",
    "StabilityError",
    "SystemParams",
    "baseline_fig2",
    "characteristic_coefficients",
    "cooling_report",
    "derive_couplings",
    "effective_temperature",
    "entanglement_report",
    "is_stable",
    "load_params",
    "log_negativity",
    "operating_point",
    "phonon_number_exact",
    "solve_operating_points",
    "steady_covariance",
    "transfer_matrix",
]

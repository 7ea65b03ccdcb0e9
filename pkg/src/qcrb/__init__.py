"""Holevo bounds, Gaussian limits and asymptotic risk for finite-dimensional quantum models."""
from .core import ParametricModel, Povm, QuantumState, fidelity
from .errors import QcrbError
from .fisher import fisher_info, helstrom_info, sld
from .gaussian import GaussianShift, LinearMeasurement, SymplecticForm, multimode_minimax, single_mode_minimax
from .holevo import HolevoSolution, dual_from_primal, holevo_bound, verify_dual_bound
from .models import bloch_line, diagonal, equatorial, full_bloch, model_from_name, pure_state
from .qlan import clt_basis, clt_empirical_check, l_map, limit_model
from .simulate import MeasurementScheme, risk_experiment, sample_outcomes, two_step_scheme
from .vantrees import asymptotic_bound, fidelity_loss, quadratic_loss, van_trees_rhs

__version__ = "0.1.0"

__all__ = [
    "GaussianShift", "HolevoSolution", "LinearMeasurement", "MeasurementScheme", "ParametricModel", "Povm",
    "QcrbError", "QuantumState", "SymplecticForm", "asymptotic_bound", "bloch_line", "clt_basis",
    "clt_empirical_check", "diagonal", "dual_from_primal", "equatorial", "fidelity", "fidelity_loss",
    "fisher_info", "full_bloch", "helstrom_info", "holevo_bound", "l_map", "limit_model", "model_from_name",
    "multimode_minimax", "pure_state", "quadratic_loss", "risk_experiment", "sample_outcomes",
    "single_mode_minimax", "sld", "two_step_scheme", "van_trees_rhs", "verify_dual_bound",
]

from .model import FluxModel, get_model, polynomial_model, check_assumptions, endstate_spectrum, classify
from .profile import ProfileOptions, Profile, solve_profile, profile_family, connection_indices, FamilyChart
from .spectral import EvansOptions, linearized_coefficients, evans_evaluate, winding_count, check_condition_D
from .templates import (
    TemplateParams, template_params, errfn, theta, psi1, psi2, source_psi, phi1, phi2,
    excited_kernel, ExcitedKernel, e_derivative_envelopes, green_envelope,
)
from .lemma_verify import (
    LemmaId, LemmaGrid, QuadratureCheck, interaction1_residual, interaction2_residual,
    hz_bound_check, linear_convolution_check, nonlinear_convolution_check,
    auxiliary_convolution_check, verify_all,
)
from .evolve import (
    EvolveControls, evolution_grid, initial_perturbation, evolve_nonlinear, evolve_linearized,
    green_probe, track_phase, track_phase_oc, asymptotic_location, bound_report, compare_horizons,
)
from .config import RunConfig, load_config
__all__ = [
    "FluxModel", "get_model", "polynomial_model", "check_assumptions", "endstate_spectrum", "classify",
    "ProfileOptions", "Profile", "solve_profile", "profile_family", "connection_indices", "FamilyChart",
    "EvansOptions", "linearized_coefficients", "evans_evaluate", "winding_count", "check_condition_D",
    "TemplateParams", "template_params", "errfn", "theta", "psi1", "psi2", "source_psi", "phi1", "phi2",
    "excited_kernel", "ExcitedKernel", "e_derivative_envelopes", "green_envelope",
    "LemmaId", "LemmaGrid", "QuadratureCheck", "interaction1_residual", "interaction2_residual",
    "hz_bound_check", "linear_convolution_check", "nonlinear_convolution_check",
    "auxiliary_convolution_check", "verify_all",
    "EvolveControls", "evolution_grid", "initial_perturbation", "evolve_nonlinear",
    "evolve_linearized", "green_probe", "track_phase", "track_phase_oc", "asymptotic_location",
    "bound_report", "compare_horizons",
    "RunConfig", "load_config",
]

#%%
from VS_StabCert import (
    EvolveControls, ExcitedKernel, bound_report, check_condition_D, evolution_grid, evolve_nonlinear,
    get_model, initial_perturbation, linearized_coefficients, solve_profile, template_params,
    track_phase, verify_all,
)
from VS_StabCert.profile import rest_point_data
from VS_StabCert.templates import decaying_shape
import numpy as np

#%% Profile and Evans condition for Burgers
model = get_model("burgers")
profile = solve_profile(model)
record = check_condition_D(linearized_coefficients(model, profile), profile.ell)
print(f"residual {profile.residual:.2e}, eta {profile.eta:.3f}, winding {record.winding}, "
      f"origin winding {record.inner_winding}")

#%% Perturbation run and shock tracking
params = template_params(model)
controls = EvolveControls(T=50.0)
x = evolution_grid(model, profile, controls)
u0 = initial_perturbation("algebraic", 0.01, x, profile=profile)
field = evolve_nonlinear(model, profile, u0, controls=controls, x=x)
track = track_phase(field, ExcitedKernel(params), model, profile, controls)
print(f"delta(T) {track.delta[-1, 0]:.6f}, delta_inf {track.delta_infinity[0]:.6f}, "
      f"fit gap {track.disagreement():.2e}")

#%% Bound ratios and decay rates
report = bound_report(field, track, params, profile)
print(report.ceilings)
print(report.lp_slopes)

#%% Algebraic identities and Gaussian smoothing
uc = get_model("coupled_quadratic")
eta = rest_point_data(uc).eta_estimate
p_uc = template_params(uc, eta=eta, l_shape=decaying_shape(eta))
checks = verify_all(params, p_uc, only=["interaction1", "interaction2", "gaussian_tail"])
for check in checks:
    print(f"{check.lemma_id}.{check.bound}: C = {check.fitted_C:.3g}, verdict {check.verdict}")
print(f"all pass: {np.all([c.verdict for c in checks])}")

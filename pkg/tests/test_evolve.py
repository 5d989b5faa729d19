import json
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import trapezoid

from VS_StabCert.errors import BlowUp, ConfigError, DomainError, UnsupportedShockKind
from VS_StabCert.evolve import (
    BoundReport, EvolveControls, GreenProbe, ShockTrack, asymptotic_location, bound_report,
    compare_horizons, envelope_amplitude, evolution_grid, evolve_linearized, evolve_nonlinear,
    fit_translation, green_probe, initial_perturbation, lp_norms, snapshot_times, track_phase,
)
from VS_StabCert.model import LAX, get_model
from VS_StabCert.profile import solve_profile
from VS_StabCert.templates import ExcitedKernel, template_params


@pytest.fixture(scope="module")
def short():
    return EvolveControls(T=2.0, dt=0.05, n_snapshots=10, margin=15.0, progress=False)


@pytest.fixture(scope="module")
def grid(burgers, burgers_profile, short):
    return evolution_grid(burgers, burgers_profile, short)


@pytest.fixture(scope="module")
def algebraic_run(burgers, burgers_profile, short, grid):
    u0 = initial_perturbation("algebraic", 0.01, grid, profile=burgers_profile)
    return evolve_nonlinear(burgers, burgers_profile, u0, controls=short, x=grid)


@pytest.fixture(scope="module")
def algebraic_track(algebraic_run, burgers, burgers_profile, p_lax, short):
    return track_phase(algebraic_run, ExcitedKernel(p_lax), burgers, burgers_profile, short)


def test_controls_validation():
    with pytest.raises(ConfigError):
        EvolveControls(E0=0.5)
    with pytest.raises(ConfigError):
        EvolveControls(shape="square")
    with pytest.raises(ConfigError):
        EvolveControls(T=1.0, dt=2.0)
    with pytest.raises(ConfigError):
        EvolveControls(margin=-1.0)
    assert EvolveControls().replace(T=5.0).T == 5.0


def test_snapshot_times():
    times = snapshot_times(10.0, 0.1, 20)
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(10.0)
    assert np.all(np.diff(times) > 0)
    assert np.allclose(np.round(times / 0.1), times / 0.1)


def test_grid_is_uniform_and_symmetric(grid, short):
    assert grid[0] == pytest.approx(-grid[-1])
    assert np.allclose(np.diff(grid), short.dx)
    assert grid[-1] >= 2.0 + 15.0


def test_initial_shapes(grid, burgers, burgers_profile):
    u0 = initial_perturbation("algebraic", 0.01, grid, profile=burgers_profile)
    assert envelope_amplitude(u0, grid) == pytest.approx(0.01)
    assert np.all(initial_perturbation("zero", 0.01, grid, model=burgers) == 0.0)
    with pytest.raises(UnsupportedShockKind):
        initial_perturbation("outgoing", 0.01, grid, model=burgers)
    with pytest.raises(ValueError):
        initial_perturbation("square", 0.01, grid, model=burgers)


def test_zero_perturbation_stays_zero(burgers, burgers_profile, short, grid):
    run = evolve_nonlinear(burgers, burgers_profile, np.zeros((1, grid.size)), controls=short, x=grid)
    assert np.all(run.values == 0.0)
    assert run.conservation_error == 0.0


def test_nonlinear_run_conserves_mass(algebraic_run, short, tmp_path):
    assert algebraic_run.conservation_error <= short.tol_cons
    assert algebraic_run.times[-1] == pytest.approx(2.0)
    assert algebraic_run.values.shape == (algebraic_run.times.size, 1, algebraic_run.grid.size)
    algebraic_run.write(tmp_path, short.tol_cons)
    payload = json.loads((tmp_path / "trajectory.json").read_text())
    assert payload["verdict"] is True
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == "x,t,w_1"


def test_translation_mode_is_stationary(burgers, burgers_profile, short, grid):
    v0 = burgers_profile.interpolate_derivative(grid)
    run = evolve_linearized(burgers, burgers_profile, v0, controls=short, x=grid)
    assert np.max(np.abs(run.values[-1] - v0)) <= 0.02
    assert run.linear


def test_amplitude_above_cap_is_rejected(burgers, burgers_profile, short, grid):
    u0 = initial_perturbation("algebraic", 0.5, grid, profile=burgers_profile)
    with pytest.raises(DomainError):
        evolve_nonlinear(burgers, burgers_profile, u0, controls=short, x=grid)
    with pytest.raises(DomainError):
        evolve_nonlinear(burgers, burgers_profile, np.zeros((1, 5)), controls=short, x=grid)


def test_growth_past_the_ceiling_raises(burgers, burgers_profile, short, grid):
    u0 = initial_perturbation("algebraic", 0.01, grid, profile=burgers_profile)
    with pytest.raises(BlowUp):
        evolve_nonlinear(burgers, burgers_profile, u0, controls=short.replace(blowup_factor=0.05),
                         x=grid)


def test_burgers_location_is_half_the_mass(burgers, grid, burgers_profile):
    u0 = initial_perturbation("gaussian", 0.01, grid, profile=burgers_profile, center=1.0)
    delta, masses = asymptotic_location(burgers, u0, grid, burgers_profile)
    assert delta[0] == pytest.approx(0.5 * trapezoid(u0[0], grid))
    assert masses.size == 0


def test_location_needs_a_mass_relation(coupled):
    with pytest.raises(UnsupportedShockKind):
        asymptotic_location(coupled, np.array([0.1, 0.0]))


def test_overcompressive_location_without_profile():
    model = get_model("burgers2x2")
    delta, masses = asymptotic_location(model, np.array([0.3, -0.2]), ell=2)
    assert np.allclose(delta, [0.3, -0.2])
    assert masses.size == 0


def test_fit_recovers_a_translation(burgers, burgers_profile, short, grid):
    u0 = initial_perturbation("translation", 0.01, grid, profile=burgers_profile)
    run = evolve_nonlinear(burgers, burgers_profile, u0, controls=short, x=grid)
    fit = fit_translation(run, burgers_profile)
    assert fit[0, 0] == pytest.approx(-0.01, abs=1e-4)
    delta, _ = asymptotic_location(burgers, u0, grid, burgers_profile)
    assert delta[0] == pytest.approx(-0.01, abs=1e-4)


def test_short_track(algebraic_track, algebraic_run, tmp_path):
    track = algebraic_track
    assert track.method == "mass"
    assert track.delta.shape == (algebraic_run.times.size, 1)
    assert np.all(np.isfinite(track.delta))
    assert track.delta[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert track.delta_infinity[0] == pytest.approx(0.5 * trapezoid(algebraic_run.initial[0],
                                                                     algebraic_run.grid))
    track.write(tmp_path)
    header = (tmp_path / "track.csv").read_text().splitlines()[0]
    assert header == "t,delta_1,delta_dot_1,delta_fit_1"


def test_track_without_fit_passes():
    track = ShockTrack(times=np.array([0.0, 1.0]), delta=np.zeros((2, 1)), delta_dot=np.zeros((2, 1)),
                       delta_fit=None, delta_infinity=np.zeros(1), method="final", kind="undercompressive")
    assert track.disagreement() is None
    assert track.verdict


def test_track_tolerance_has_quadratic_term():
    times = np.linspace(0.0, 4.0, 5)
    delta = np.full((5, 1), 0.0105)
    delta[0] = 0.5
    track = ShockTrack(times=times, delta=delta, delta_dot=np.zeros((5, 1)), delta_fit=np.zeros((5, 1)),
                       delta_infinity=np.zeros(1), method="mass", kind=LAX, E0=0.01, tol_track=1.0)
    assert track.tolerance == pytest.approx(0.011)
    assert track.disagreement() == pytest.approx(0.0105)
    assert track.verdict
    assert not replace(track, delta=delta + 0.001).verdict
    assert track.to_dict()["tolerance"] == pytest.approx(0.011)


def report_from(pointwise, delta):
    times = np.linspace(0.0, 10.0, pointwise.size)
    return BoundReport(times=times, pointwise_ratio=pointwise, delta_dot_ratio=np.zeros(times.size),
                       delta_ratio=delta, zeta=np.maximum.accumulate(pointwise), lp_slopes={},
                       derivative_ratio=0.0, E0=0.01)


def test_horizon_comparison():
    settled = report_from(np.array([1.0, 2.0, 1.5, 1.2, 1.1, 1.05, 1.0, 1.0, 1.0, 1.0, 1.0]),
                          np.full(11, 0.02))
    comparison = compare_horizons(settled)
    assert comparison.t_short == 5.0
    assert comparison.growth == {"pointwise": 1.0, "delta": 1.0}
    assert comparison.verdict
    assert comparison.to_dict()["verdict"] is True

    growing = compare_horizons(report_from(np.linspace(1.0, 2.0, 11), np.full(11, 0.02)))
    assert growing.growth["pointwise"] == pytest.approx(2.0 / 1.5)
    assert not growing.verdict
    with pytest.raises(DomainError):
        compare_horizons(settled, t_short=10.0)


def test_green_verdict_needs_raw_column_to_fail_envelope():
    times = np.linspace(0.0, 20.0, 5)
    common = dict(y0=-5.0, widths=(0.5, 0.25), fitted_C=[1.0, 1.02], refinement_ratio=1.02,
                  times=times, remainder_sup=np.ones(5), raw_sup=np.ones(5))
    growing = GreenProbe(raw_fitted_C=[3.0, 3.0], raw_ratio=np.array([0.0, 1.0, 1.0, 2.0, 3.0]), **common)
    assert growing.raw_growth == pytest.approx(3.0)
    assert growing.verdict
    flat = GreenProbe(raw_fitted_C=[1.5, 1.5], raw_ratio=np.array([0.0, 1.5, 1.5, 1.5, 1.5]), **common)
    assert not flat.raw_rejected
    assert not flat.verdict
    large = GreenProbe(raw_fitted_C=[20.0, 20.0], raw_ratio=np.full(5, 20.0), **common)
    assert large.verdict
    assert large.to_dict()["raw_rejected"] is True


def test_bound_report_is_finite(algebraic_run, algebraic_track, p_lax, burgers_profile, tmp_path):
    report = bound_report(algebraic_run, algebraic_track, p_lax, burgers_profile)
    assert report.verdict
    assert np.all(np.diff(report.zeta) >= 0)
    assert report.lp_slopes == {"1": None, "2": None, "inf": None}
    report.write(tmp_path)
    assert json.loads((tmp_path / "bounds.json").read_text())["verdict"] is True


def test_lp_norm_table(algebraic_run, algebraic_track, burgers_profile):
    norms = lp_norms(algebraic_run, algebraic_track, burgers_profile)
    assert list(norms.columns) == ["t", "L1", "L2", "Linf"]
    assert len(norms) == algebraic_run.times.size
    assert np.all(norms[["L1", "L2", "Linf"]].to_numpy() >= 0)


@pytest.mark.slow
def test_long_burgers_run_decays(burgers, burgers_profile, p_lax):
    controls = EvolveControls(T=50.0, dt=0.05, progress=False)
    x = evolution_grid(burgers, burgers_profile, controls)
    u0 = initial_perturbation("algebraic", 0.01, x, profile=burgers_profile)
    run = evolve_nonlinear(burgers, burgers_profile, u0, controls=controls, x=x)
    track = track_phase(run, ExcitedKernel(p_lax), burgers, burgers_profile, controls)
    assert track.verdict
    report = bound_report(run, track, p_lax, burgers_profile)
    assert report.verdict
    assert report.lp_slopes["inf"] <= -0.4


@pytest.mark.slow
def test_green_probe_for_burgers(burgers, burgers_profile, p_lax):
    probe = green_probe(burgers, burgers_profile, p_lax.replace(C=5.0), T=20.0)
    assert len(probe.fitted_C) == 2
    assert probe.verdict
    assert len(probe.raw_fitted_C) == 2
    assert probe.raw_rejected
    assert probe.to_dict()["raw_fitted_C"] == probe.raw_fitted_C


@pytest.mark.slow
def test_burgers_location_matches_fit(burgers, burgers_profile, p_lax):
    controls = EvolveControls(T=30.0, dt=0.05, progress=False)
    x = evolution_grid(burgers, burgers_profile, controls)
    u0 = initial_perturbation("gaussian", 0.01, x, profile=burgers_profile, center=-2.0)
    run = evolve_nonlinear(burgers, burgers_profile, u0, controls=controls, x=x)
    track = track_phase(run, ExcitedKernel(p_lax), burgers, burgers_profile, controls)
    assert track.delta_infinity[0] == pytest.approx(0.5 * trapezoid(u0[0], x))
    assert abs(track.delta_infinity[0] - track.delta_fit[-1, 0]) <= 0.05 * 0.01
    assert track.delta[-1, 0] == pytest.approx(track.delta_infinity[0], rel=0.2)
    assert track.verdict


@pytest.fixture(scope="module")
def burgers_pair():
    # first component shocked, second constant with speed 1: one outgoing field
    return get_model("burgers2x2", u_minus=(1.0, 1.0), u_plus=(-1.0, 1.0))


@pytest.mark.slow
def test_lax_pair_decay_rates_and_horizons(burgers_pair):
    profile = solve_profile(burgers_pair)
    assert profile.shock.kind == LAX
    params = template_params(burgers_pair)
    controls = EvolveControls(T=200.0, dt=0.05, progress=False)
    x = evolution_grid(burgers_pair, profile, controls)
    u0 = initial_perturbation("gaussian", 0.01, x, profile=profile, direction=[0.2, 1.0])
    run = evolve_nonlinear(burgers_pair, profile, u0, controls=controls, x=x)
    track = track_phase(run, ExcitedKernel(params), burgers_pair, profile, controls)
    report = bound_report(run, track, params, profile)
    assert report.lp_slopes["inf"] == pytest.approx(-0.5, abs=0.1)
    assert report.lp_slopes["2"] == pytest.approx(-0.25, abs=0.1)
    assert report.lp_slopes["1"] == pytest.approx(0.0, abs=0.1)
    assert abs(track.delta_infinity[0] - track.delta_fit[-1, 0]) <= 0.05 * 0.01
    assert compare_horizons(report).verdict

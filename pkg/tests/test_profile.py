import json

import numpy as np
import pytest

from VS_StabCert.errors import ConfigError
from VS_StabCert.model import LAX, OVERCOMPRESSIVE, UNDERCOMPRESSIVE, get_model
from VS_StabCert.profile import (
    FamilyChart, ProfileOptions, connection_indices, profile_family, rest_point_data, solve_profile,
    tangent_masses,
)


def test_burgers_profile_matches_tanh(burgers_profile):
    x = burgers_profile.grid
    inside = np.abs(x) <= 20
    exact = -np.tanh(x[inside] / 2)
    assert np.max(np.abs(burgers_profile.values[0, inside] - exact)) <= 1e-8
    assert burgers_profile.residual <= 1e-8
    assert burgers_profile.eta == pytest.approx(1.0, rel=0.2)
    assert burgers_profile.ell == 1
    assert burgers_profile.shock.kind == LAX


def test_rest_point_data_of_burgers(burgers):
    rest = rest_point_data(burgers)
    assert rest.dim_unstable == 1
    assert rest.dim_stable == 1
    assert rest.ell_formula == 1
    assert rest.eta_estimate == pytest.approx(1.0)


def test_interpolation_extends_by_endstates(burgers_profile):
    far = np.array([-1e3, 1e3])
    assert np.allclose(burgers_profile.interpolate(far), [[1.0, -1.0]])
    assert np.allclose(burgers_profile.interpolate_derivative(far), 0.0)
    assert burgers_profile.interpolate_derivative(np.array([0.0]))[0, 0] == pytest.approx(-0.5, abs=1e-6)


def test_connection_is_transverse(burgers, burgers_profile):
    assert connection_indices(burgers, burgers_profile) == 1


def test_translation_chart(burgers, burgers_profile):
    chart = FamilyChart(burgers, burgers_profile)
    x = np.linspace(-5, 5, 41)
    assert np.allclose(chart.evaluate([0.3], x), burgers_profile.interpolate(x - 0.3))
    assert np.allclose(chart.tangent([0.0], x)[0], -burgers_profile.interpolate_derivative(x))
    shifted = profile_family(burgers, burgers_profile, [0.3])
    assert np.allclose(shifted.values, burgers_profile.interpolate(burgers_profile.grid - 0.3))


def test_translation_tangent_mass_is_the_jump(burgers, burgers_profile):
    masses = tangent_masses(burgers, burgers_profile)
    assert masses.shape == (1, 1)
    assert masses[0, 0] == pytest.approx(2.0, rel=1e-6)


def test_undercompressive_profile_on_invariant_line(coupled):
    profile = solve_profile(coupled)
    x = profile.grid
    inside = np.abs(x) <= 15
    assert profile.shock.kind == UNDERCOMPRESSIVE
    assert profile.unfolding_defect <= 1e-8
    assert np.max(np.abs(profile.values[1])) <= 1e-6
    assert np.max(np.abs(profile.values[0, inside] + np.tanh(x[inside] / 2))) <= 1e-6


def test_profile_writers(tmp_path, burgers_profile):
    burgers_profile.write(tmp_path)
    payload = json.loads((tmp_path / "profile.json").read_text())
    assert payload["verdict"] is True
    assert payload["shock"]["kind"] == LAX
    header = (tmp_path / "profile.csv").read_text().splitlines()[0]
    assert header == "x,u_1,du_1"


def test_profile_options_validation():
    with pytest.raises(ConfigError):
        ProfileOptions(n_points=5)
    with pytest.raises(ConfigError):
        ProfileOptions(tol_profile=2.0)


@pytest.mark.slow
def test_overcompressive_chart_masses():
    model = get_model("burgers2x2")
    profile = solve_profile(model)
    assert profile.shock.kind == OVERCOMPRESSIVE
    assert profile.ell == 2
    assert np.allclose(tangent_masses(model, profile), np.eye(2), atol=1e-3)

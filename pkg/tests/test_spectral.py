import json

import numpy as np
import pytest

from VS_StabCert import spectral
from VS_StabCert.errors import ConfigError, EssentialSpectrum, PhaseJump
from VS_StabCert.spectral import (
    Contour, EvansOptions, check_condition_D, discretized_spectrum, essential_spectrum_curves,
    essential_spectrum_margin, evans_evaluate, linearized_coefficients, ray_crossings,
    winding_count, winding_numbers,
)


@pytest.fixture(scope="module")
def burgers_system(burgers, burgers_profile):
    return linearized_coefficients(burgers, burgers_profile)


def circle_samples(windings):
    """Stand-in for sample_contour returning D = exp(2 pi i w s) per contour kind."""
    def sample(sys, contour, options=None):
        s = np.linspace(0.0, 1.0, 65)
        return s, contour(s), np.exp(2j * np.pi * windings[contour.kind] * s)
    return sample


def test_linearized_coefficients_of_burgers(burgers_system, burgers_profile):
    assert np.allclose(burgers_system.A_values[0, 0], burgers_profile.values[0])
    assert np.allclose(burgers_system.B_values, 1.0)
    assert burgers_system.A(np.array([-1e3]))[0, 0, 0] == pytest.approx(1.0)


def test_ray_crossings_counts_windings():
    z = np.exp(2j * np.pi * np.linspace(0, 1, 64, endpoint=False))
    z = np.append(z, z[0])
    assert ray_crossings(z) == 1
    assert ray_crossings(z ** 2) == 2
    assert ray_crossings(np.conj(z)) == -1
    assert ray_crossings(2.0 + 0.5 * z) == 0


def test_contours_close_and_split():
    circle = Contour.circle(1.0, 2.0)
    assert circle(np.array([0.0]))[0] == pytest.approx(3.0)
    shape = Contour.d_shape(8.0, 0.01)
    ends = shape(np.array([0.0, 0.999999]))
    assert abs(ends[0] - ends[1]) < 1e-3
    left, right = Contour.rectangle(-1, 1, -1, 1).split()
    assert left.params["re_max"] == right.params["re_min"] == 0.0
    with pytest.raises(ValueError):
        circle.split()


def test_evans_function_is_real_symmetric(burgers_system):
    lam = 0.7 + 0.4j
    D = evans_evaluate(burgers_system, lam)
    D_conj = evans_evaluate(burgers_system, np.conj(lam))
    assert D_conj == pytest.approx(np.conj(D), rel=1e-6)


def test_essential_spectrum_is_rejected(burgers_system):
    with pytest.raises(EssentialSpectrum):
        evans_evaluate(burgers_system, -5.0)


def test_dispersion_curves_are_stable(burgers_system):
    assert np.max(essential_spectrum_curves(burgers_system).real) <= 1e-12


def test_condition_D_for_burgers(tmp_path, burgers_system):
    record = check_condition_D(burgers_system, 1)
    assert record.winding == 0
    assert record.inner_winding == 1
    assert record.verdict
    record.write(tmp_path)
    assert json.loads((tmp_path / "evans.json").read_text())["verdict"] is True


def test_winding_around_origin(burgers_system):
    options = EvansOptions(r0=0.05)
    assert winding_count(burgers_system, Contour.circle(0.0, 0.05), options) == 1


def test_discretized_spectrum_has_no_unstable_eigenvalue(burgers_system):
    values = discretized_spectrum(burgers_system, n_points=400)
    assert np.max(values.real) <= 1e-3


@pytest.mark.slow
def test_discretized_spectrum_fine_grid(burgers_system):
    values = discretized_spectrum(burgers_system, n_points=2000)
    assert np.max(values.real) <= 1e-3


def test_options_validation():
    with pytest.raises(ConfigError):
        EvansOptions(r0=10.0, outer_radius=8.0)
    with pytest.raises(ConfigError):
        EvansOptions(threads=0)


def test_winding_numbers_of_sampled_circle():
    z = np.exp(2j * np.pi * np.linspace(0, 1, 33))
    count, phase = winding_numbers(z ** 3)
    assert count == 3
    assert phase == pytest.approx(3.0)


def test_margin_near_dispersion_curve(burgers_system):
    curves = essential_spectrum_curves(burgers_system)
    on_curve = curves[np.argmin(np.abs(curves - (-1.0 - 1.0j)))]
    assert essential_spectrum_margin(burgers_system, [on_curve + 1e-3]) < 2e-3
    assert essential_spectrum_margin(burgers_system, [0.01 + 0.0j]) is None
    assert essential_spectrum_margin(burgers_system, [4.0 + 0.0j], relative=True) > 0.5


def test_contour_grazing_dispersion_curve_fails(burgers_system, monkeypatch):
    monkeypatch.setattr(spectral, "sample_contour", circle_samples({"d_shape": 0, "circle": 1}))
    clear = check_condition_D(burgers_system, 1)
    assert clear.verdict
    assert clear.margin_ratio > 0.05
    # a small gap disk exposes the imaginary axis where the curves touch 0
    grazing = check_condition_D(burgers_system, 1, EvansOptions(gap_factor=0.1))
    assert grazing.verdict is False
    assert grazing.margin_ratio < 0.05
    assert "essential spectrum" in grazing.message
    assert grazing.to_dict()["margin_ratio"] == grazing.margin_ratio


def test_ray_and_phase_disagreement_fails(burgers_system, monkeypatch):
    monkeypatch.setattr(spectral, "sample_contour", circle_samples({"d_shape": 0, "circle": 1}))
    monkeypatch.setattr(spectral, "winding_numbers", lambda values: (0, 1.0))
    record = check_condition_D(burgers_system, 0)
    assert record.verdict is False
    assert "disagree" in record.message
    assert record.to_dict()["phase_windings"] == [1.0, 1.0]
    with pytest.raises(PhaseJump):
        winding_count(burgers_system, Contour.circle(0.0, 0.05))


def test_planted_unstable_eigenvalue_fails_condition_D(burgers_system):
    planted = burgers_system.with_reaction(lambda x: 2.0 * np.exp(-x ** 2))
    assert discretized_spectrum(planted, n_points=400)[0].real > 0.1
    record = check_condition_D(planted, 1)
    assert record.winding != 0
    assert record.verdict is False
    assert "nonstable half-plane" in record.message

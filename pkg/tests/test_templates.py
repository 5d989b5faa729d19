import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings
from scipy.integrate import trapezoid
from scipy.special import erf

from VS_StabCert.errors import DomainError
from VS_StabCert.templates import (
    ExcitedKernel, LShape, TemplateParams, e_derivative_envelopes, errfn, excited_kernel,
    excited_kernel_derivatives, excited_limit, green_envelope, phi1, phi2, psi1, psi2, source_psi,
    template_field, template_total, theta,
)


def scalar_params(a_minus, a_plus, L=5.0, weight=1.0, **changes):
    a_minus, a_plus = np.atleast_1d(np.asarray(a_minus, float)), np.atleast_1d(np.asarray(a_plus, float))
    n = a_minus.size
    W = np.zeros((1, n, n))
    W[0, :, :] = weight * np.eye(n)
    values = dict(a_minus=a_minus, a_plus=a_plus, beta_minus=np.ones(n), beta_plus=np.ones(n),
                  L=L, M=2 * L, eta=1.0, gamma=0, weights_minus=W, weights_plus=W.copy())
    values.update(changes)
    return TemplateParams(**values)


def test_errfn_normalization():
    assert errfn(0.0) == pytest.approx(0.5)
    assert errfn(-np.inf) == 0.0
    assert errfn(np.inf) == 1.0
    assert errfn(2.0) == pytest.approx(0.9977, abs=1e-4)


def test_lax_burgers_templates(p_lax):
    x = np.linspace(-20, 20, 81)
    t = 3.0
    assert np.all(theta(x, t, p_lax) == 0.0)
    assert np.all(psi1(x, t, p_lax) == 0.0)
    expected = (1 + np.abs(x - t) + np.sqrt(t)) ** -1.5 + (1 + np.abs(x + t) + np.sqrt(t)) ** -1.5
    assert np.allclose(psi2(x, t, p_lax), expected)
    assert np.all(psi2(x, 0.0, p_lax) <= 2 * (1 + np.abs(x)) ** -1.5 + 1e-15)


def test_theta_on_the_outgoing_ray():
    p = scalar_params(-1.0, -2.0)
    t = np.array([0.0, 1.0, 7.5])
    assert np.allclose(theta(-t, t, p), (1 + t) ** -0.5)
    assert theta(0.0, 3.0, p) == pytest.approx(0.5 * np.exp(-3 / p.L))
    assert theta(1.0, 0.0, p) == 0.0


def test_psi1_at_the_origin():
    p = scalar_params(-1.0, 1.0)
    t = np.array([1.0, 4.0, 50.0])
    assert np.allclose(psi1(0.0, t, p), 2.0 / (1 + t))


def test_sources():
    p = scalar_params(-1.0, 1.0)
    assert phi2(0.0, 3.0, p) == pytest.approx(1 / 8)
    y = np.linspace(-10, 10, 41)
    for s in (0.1, 1.0, 20.0):
        total = template_total(y, s, p)
        assert np.all(source_psi(y, s, p) >= total / (1 + s))
        assert np.all(phi1(y, s, p) >= 0)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=-50, max_value=50), st.floats(min_value=1e-3, max_value=100))
def test_templates_are_nonnegative(x, t):
    p = scalar_params([-1.0, 0.5], [-0.5, 1.0], weight=0.5)
    for fn in (theta, psi1, psi2):
        assert fn(x, t, p) >= 0
    for fn in (source_psi, phi1, phi2):
        assert fn(x, t, p) >= 0


def test_theta_lp_scaling():
    p = scalar_params(-1.0, -2.0)
    for q in (1, 2, np.inf):
        ratios = []
        for t in np.geomspace(1, 1000, 7):
            half = 12 * np.sqrt(p.L * t + 1)
            x = np.linspace(-t - half, -t + half, 4001)
            values = theta(x, t, p)
            norm = np.max(values) if q == np.inf else trapezoid(values ** q, x) ** (1 / q)
            ratios.append(norm / (1 + t) ** (-0.5 * (1 - 1 / q)))
        assert max(ratios) / min(ratios) <= 2


def test_kernel_value_with_unit_weight():
    p = scalar_params(1.0, -1.0)
    assert excited_kernel(0.0, 1.0, p)[0, 0] == pytest.approx(erf(0.5))


def test_burgers_kernel_limits(p_lax):
    assert p_lax.weights_minus[0, 0, 0] == pytest.approx(0.5)
    assert excited_kernel(-1.0, 1e-8, p_lax)[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert excited_kernel(-1.0, 1e8, p_lax)[0, 0] == pytest.approx(0.5, abs=1e-6)
    assert excited_limit(np.array([-3.0, 3.0]), p_lax)[0, 0] == pytest.approx([0.5, 0.5])
    assert np.allclose(ExcitedKernel(p_lax).asymptotic_weight("minus"), 0.5)


def test_kernel_is_monotone_in_time_at_the_origin():
    p = scalar_params(1.0, -1.0)
    values = excited_kernel(np.zeros(50), np.geomspace(1e-3, 1e3, 50), p)[0, 0]
    assert np.all(np.diff(values) >= 0)
    assert np.all((values >= 0) & (values <= 1))


@pytest.mark.parametrize("y, t", [(-1.0, 2.0), (-4.0, 0.7), (2.5, 3.0), (0.5, 10.0)])
def test_kernel_derivatives_match_differences(p_uc, y, t):
    h = 1e-5
    terms = excited_kernel_derivatives(y, t, p_uc)
    e_t = (excited_kernel(y, t + h, p_uc) - excited_kernel(y, t - h, p_uc)) / (2 * h)
    e_y = (excited_kernel(y + h, t, p_uc) - excited_kernel(y - h, t, p_uc)) / (2 * h)
    assert np.allclose(terms["e_t"], e_t, atol=1e-6)
    assert np.allclose(terms["e_y"], e_y, atol=1e-6)
    d = excited_kernel_derivatives(y + h, t, p_uc)["e_t"] - excited_kernel_derivatives(y - h, t, p_uc)["e_t"]
    assert np.allclose(terms["e_yt"], d / (2 * h), atol=1e-5)


def test_time_derivative_envelope(p_lax):
    p = p_lax.replace(C=5.0)
    h = 1e-5
    e_t = (excited_kernel(-1.0, 2.0 + h, p) - excited_kernel(-1.0, 2.0 - h, p)) / (2 * h)
    envelopes = e_derivative_envelopes(-1.0, 2.0, p)
    assert abs(e_t[0, 0]) <= envelopes["e_t"]
    on_ray = e_derivative_envelopes(-1.0 * 4.0, 4.0, p)
    assert on_ray["e_t"] == pytest.approx(5.0 * 4.0 ** -0.5)


def test_envelopes_dominate_kernel_derivatives_on_a_grid(p_lax):
    y, t = np.meshgrid(np.linspace(-20, 20, 40), np.geomspace(0.1, 50, 40), indexing="ij")
    terms = excited_kernel_derivatives(y, t, p_lax)
    envelopes = e_derivative_envelopes(y, t, p_lax)
    for key in ("e_t", "e_y", "e_yt"):
        ratio = np.max(np.abs(terms[key][0, 0]) / envelopes[key])
        assert np.isfinite(ratio)


def test_gamma_gates_the_derivative_envelope(p_lax, p_uc):
    lax = e_derivative_envelopes(-2.0, 1.0, p_lax)
    assert lax["e_y"] == pytest.approx(lax["e_y_minus_limit"])
    uc = e_derivative_envelopes(-2.0, 1.0, p_uc)
    assert uc["e_y"] > uc["e_y_minus_limit"]


def test_green_envelope_reflection_symmetry(p_lax):
    x = np.linspace(-10, 10, 21)
    for y in (-3.0, -0.5):
        assert np.allclose(green_envelope(x, 2.0, y, p_lax), green_envelope(-x, 2.0, -y, p_lax))
    assert np.all(green_envelope(x, 2.0, -3.0, p_lax, alpha_x=1) >= 0)
    assert np.all(green_envelope(x, 0.0, -3.0, p_lax) == 0)


def test_decaying_shape_derivative():
    shape = LShape("decaying", 2.0)
    g, g_prime = shape(np.array([-1.0, 0.5]))
    assert np.allclose(g, 1 + 0.5 * np.exp(-2 * np.abs([-1.0, 0.5])))
    assert np.all(np.abs(g_prime) <= np.exp(-2 * np.abs([-1.0, 0.5])))


def test_template_field_columns(p_lax):
    frame = template_field(np.linspace(-5, 5, 11), [1.0, 2.0], p_lax)
    assert list(frame.columns) == ["x", "t", "theta", "psi1", "psi2", "psi_total"]
    assert len(frame) == 22


def test_params_validation(p_lax):
    with pytest.raises(DomainError):
        p_lax.replace(L=0.0)
    with pytest.raises(DomainError):
        e_derivative_envelopes(-1.0, 0.0, p_lax)

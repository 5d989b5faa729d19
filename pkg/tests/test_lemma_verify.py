import numpy as np
import pytest

from VS_StabCert.errors import DomainError, NotMonotone, QuadratureFailure
from VS_StabCert.lemma_verify import (
    LemmaGrid, LemmaId, QuadratureCheck, auxiliary_convolution_check, fitted_constant,
    hz_bound_check, hz_sweep, interaction1_residual, interaction1_terms, interaction2_residual,
    interaction2_terms, interaction_sweep, linear_convolution_check, nonlinear_convolution_check,
    refinement, verify_all,
)


@pytest.fixture(scope="module")
def small_grid():
    return LemmaGrid(t_values=(0.5, 2.0), x_count=3, s_nodes=8, y_base=201, y_local=21)


def test_interaction1_worked_example():
    lhs, rhs = interaction1_terms(1.0, 0.0, 1.0, 2.0, 1.0, 1.0, 0.0, 0.0)
    assert lhs == pytest.approx(1.0)
    assert interaction1_residual(1.0, 0.0, 1.0, 2.0, 1.0, 1.0, 0.0, 0.0) == pytest.approx(0.0, abs=1e-14)


def test_interaction2_reduces_to_interaction1():
    args = (0.7, -1.3, 0.4, 1.9, 2.0, 0.5)
    a = 1.5
    lhs2, rhs2 = interaction2_terms(*args, a, a, -0.8)
    lhs1, rhs1 = interaction1_terms(*args, a, -0.8)
    assert lhs2 == pytest.approx(lhs1)
    assert rhs2 == pytest.approx(rhs1)


def test_interaction_sweep_passes():
    checks = interaction_sweep(n_draws=2000, seed=3)
    assert [c.lemma_id for c in checks] == ["interaction1", "interaction2"]
    for check in checks:
        assert check.verdict
        assert check.details["max_relative_residual"] <= 1e-10


def test_interaction2_with_large_ratio_stays_accurate():
    residual = interaction2_residual(3.0, 0.2, 0.5, 4.0, 1.0, 2.0, 2.5, 0.01, 1.0)
    lhs, _ = interaction2_terms(3.0, 0.2, 0.5, 4.0, 1.0, 2.0, 2.5, 0.01, 1.0)
    assert residual / (1 + abs(lhs)) <= 1e-10


@pytest.mark.parametrize("s, t, M1, b", [(0.0, 1.0, 1.0, 1.0), (1.0, 1.0, 1.0, 1.0),
                                         (0.5, 1.0, 0.0, 1.0), (0.5, 1.0, 1.0, 0.0)])
def test_interaction_domain_errors(s, t, M1, b):
    with pytest.raises(DomainError):
        interaction2_residual(0.0, 0.0, s, t, M1, 1.0, 1.0, b, 1.0)


def test_hz_bound_example():
    check = hz_bound_check(lambda y: (1 + y) ** -1.5, a=1.0, z=10.0, omega=2.0, gamma_hz=0.2)
    assert check.lemma_id == LemmaId.GAUSSIAN_TAIL.value
    assert check.details["passed"]
    assert check.verdict


def test_hz_bound_of_zero_function():
    check = hz_bound_check(lambda y: 0.0, a=1.0, z=2.0, omega=2.0, gamma_hz=0.1)
    assert check.lhs[0] == 0.0
    assert check.fitted_C == 0.0
    assert check.verdict


def test_hz_bound_tabulated_input():
    grid = np.linspace(0, 50, 501)
    check = hz_bound_check((grid, np.exp(-grid)), a=0.5, z=4.0, omega=3.0, gamma_hz=0.3)
    assert check.details["passed"]


def test_hz_sweep_passes():
    check = hz_sweep()
    assert check.bound == "smoothing_sweep"
    assert len(check.grid) == 15
    assert check.verdict


def test_hz_rejects_increasing_function():
    with pytest.raises(NotMonotone):
        hz_bound_check(lambda y: y / (1 + y), a=1.0, z=2.0, omega=2.0, gamma_hz=0.1)


@pytest.mark.parametrize("a, z, omega, gamma_hz", [(0.0, 1.0, 2.0, 0.1), (1.0, 1.0, 1.0, 0.0),
                                                   (1.0, 1.0, 2.0, 0.25)])
def test_hz_domain_errors(a, z, omega, gamma_hz):
    with pytest.raises(DomainError):
        hz_bound_check(lambda y: 1.0, a, z, omega, gamma_hz)


def test_fitted_constant_edge_cases():
    assert fitted_constant([1.0, 2.0], [2.0, 1.0]) == 2.0
    assert fitted_constant([0.0], [0.0]) == 0.0
    assert fitted_constant([1.0], [0.0]) == np.inf
    with pytest.raises(QuadratureFailure):
        fitted_constant([-1.0], [1.0])
    assert refinement(0.0, 0.0) == 1.0
    assert refinement(2.0, 2.1) == pytest.approx(1.05)


def test_check_verdict_uses_refinement_tolerance():
    check = QuadratureCheck("initial_convolution", "e", [1.0], np.ones(1), np.ones(1), fitted_C=1.0,
                            refinement_ratio=1.2, tol_refine=0.1)
    assert not check.verdict
    assert check.to_dict()["verdict"] is False


def test_lemma_grid_validation():
    with pytest.raises(DomainError):
        LemmaGrid(t_values=(0.0, 1.0))
    with pytest.raises(DomainError):
        LemmaGrid(refine_factor=1)
    fine = LemmaGrid(y_base=11, y_local=5).scaled(2)
    assert (fine.y_base, fine.y_local) == (21, 9)


def test_initial_convolutions_on_a_small_grid(p_lax, small_grid):
    checks = linear_convolution_check(p_lax, small_grid)
    assert [c.bound for c in checks] == ["green", "e_t", "e", "e_minus_limit"]
    assert all(np.isfinite(c.fitted_C) for c in checks)


def test_nonlinear_limit_terms_vanish_for_lax(p_lax, small_grid):
    checks = {c.bound: c for c in nonlinear_convolution_check(p_lax, small_grid)}
    assert len(checks) == 5
    for name in ("e_y_limit_all_time", "e_y_limit_after_t"):
        assert np.all(checks[name].lhs == 0.0)
        assert checks[name].fitted_C == 0.0


def test_auxiliary_convolutions_on_a_small_grid(p_lax, small_grid):
    checks = auxiliary_convolution_check(p_lax, small_grid, label="lax")
    assert len(checks) == 6
    assert all(c.lemma_id == "auxiliary_convolution" for c in checks)
    assert all(np.isfinite(c.fitted_C) for c in checks)


def test_verify_all_only_identities(p_lax, p_uc):
    checks = verify_all(p_lax, p_uc, only=["interaction1", "interaction2"], n_draws=500,
                        progress=False)
    assert len(checks) == 2
    assert all(c.verdict for c in checks)


@pytest.mark.slow
def test_full_suite_passes(p_lax, p_uc):
    checks = verify_all(p_lax, p_uc, progress=False)
    failed = [(c.lemma_id, c.bound, c.details.get("params")) for c in checks if not c.verdict]
    assert not failed

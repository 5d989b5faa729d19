import numpy as np
import pytest

from VS_StabCert.model import get_model
from VS_StabCert.profile import rest_point_data, solve_profile
from VS_StabCert.templates import decaying_shape, template_params


def pytest_addoption(parser):
    parser.addoption("--slow", action="store_true", help="also run the slow tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long horizons, fine grids and full suites")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--slow"):
        return
    skip = pytest.mark.skip(reason="needs --slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def burgers():
    return get_model("burgers")


@pytest.fixture(scope="session")
def burgers_profile(burgers):
    return solve_profile(burgers)


@pytest.fixture(scope="session")
def coupled():
    return get_model("coupled_quadratic")


@pytest.fixture(scope="session")
def p_lax(burgers):
    return template_params(burgers)


@pytest.fixture(scope="session")
def p_uc(coupled):
    eta = rest_point_data(coupled).eta_estimate
    return template_params(coupled, eta=eta, l_shape=decaying_shape(eta))


@pytest.fixture
def rng():
    return np.random.default_rng(0)

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from acceptance_log import summary_lines
from memkit.data import UniParams, VecParams
from memkit.dists import calibrate
from memkit.sim import DgpSpec, Sinusoid, simulate

settings.register_profile(
    "default",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_uni_params(rng: np.random.Generator) -> UniParams:
    """A stationary point away from the boundary."""
    alpha = rng.uniform(0.02, 0.25)
    gamma = rng.uniform(0.0, 0.2)
    bstar = rng.uniform(0.5, 0.95)
    beta = bstar - alpha - gamma / 2
    if beta < 0:
        beta = rng.uniform(0.0, 0.2)
    return UniParams(beta, alpha, gamma)


def random_vec_params(rng: np.random.Generator, K: int) -> VecParams:
    while True:
        A = rng.uniform(0.0, 0.06, (K, K))
        np.fill_diagonal(A, rng.uniform(0.05, 0.2, K))
        g = np.diag(rng.uniform(0.0, 0.15, K))
        b = np.diag(rng.uniform(0.4, 0.75, K))
        try:
            return VecParams(b, A, g)
        except ValueError:
            continue


@pytest.fixture(scope="session")
def gamma015():
    return calibrate("gamma", 0.15)


@pytest.fixture(scope="session")
def uni_sim(gamma015):
    spec = DgpSpec(UniParams(0.705, 0.10, 0.15), 15.0, error=gamma015, seed=101)
    return simulate(spec, 3000)


@pytest.fixture(scope="session")
def uni_sim_tau(gamma015):
    spec = DgpSpec(UniParams(0.705, 0.10, 0.15), 15.0, Sinusoid(0.3), gamma015, seed=102)
    return simulate(spec, 3000)


@pytest.fixture(scope="session")
def vec_spec(gamma015):
    b = np.diag([0.70, 0.65])
    A = np.array([[0.10, 0.05], [0.05, 0.12]])
    g = np.diag([0.15, 0.10])
    R = np.array([[1.0, 0.5], [0.5, 1.0]])
    return DgpSpec(VecParams(b, A, g), (15.0, 20.0), error=gamma015, dependence=R, seed=103)


@pytest.fixture(scope="session")
def vec_sim(vec_spec):
    return simulate(vec_spec, 3000)


@pytest.fixture(scope="session")
def vec_sim_tau(vec_spec):
    return simulate(replace(vec_spec, tau_profile=Sinusoid(0.3), seed=104), 3000)


def pytest_terminal_summary(terminalreporter):
    lines = summary_lines()
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

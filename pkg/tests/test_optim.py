import numpy as np
import pytest

from memkit.optim import bfgs_minimize


def rosenbrock(x):
    f = (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2
    g = np.array([-2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2), 200 * (x[1] - x[0] ** 2)])
    return f, g


class TestBfgs:
    def test_quadratic(self):
        A = np.array([[3.0, 1.0], [1.0, 2.0]])
        b = np.array([1.0, -1.0])
        r = bfgs_minimize(lambda x: (0.5 * x @ A @ x - b @ x, A @ x - b), np.zeros(2))
        assert r.converged
        np.testing.assert_allclose(r.x, np.linalg.solve(A, b), atol=1e-8)

    def test_exact_inverse_hessian_one_step(self):
        A = np.diag([1.0, 10.0, 100.0])
        r = bfgs_minimize(lambda x: (0.5 * x @ A @ x, A @ x), np.ones(3), inv_hess=lambda x: np.linalg.inv(A))
        assert r.iterations == 1 and r.converged

    def test_rosenbrock(self):
        r = bfgs_minimize(rosenbrock, np.array([-1.2, 1.0]), max_iter=2000)
        assert r.converged
        np.testing.assert_allclose(r.x, [1.0, 1.0], atol=1e-6)

    def test_inadmissible_region_is_avoided(self):
        # minimum of (x - 2)^2 restricted to x < 1.5 by returning None beyond it
        fun = lambda x: None if x[0] >= 1.5 else ((x[0] - 2) ** 2, np.array([2 * (x[0] - 2)]))
        r = bfgs_minimize(fun, np.array([0.0]), max_iter=200)
        assert r.x[0] < 1.5
        assert not r.converged

    def test_inadmissible_start(self):
        with pytest.raises(ValueError):
            bfgs_minimize(lambda x: None, np.zeros(2))

    def test_iteration_limit(self):
        r = bfgs_minimize(rosenbrock, np.array([-1.2, 1.0]), max_iter=3)
        assert r.iterations == 3 and not r.converged and r.message == "iteration limit"

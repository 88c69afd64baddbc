import numpy as np
import pytest

from grouplift.gradcheck import CHECKS, EPS, TOLERANCE, numeric_gradient, relative_error, run_suite


def test_numeric_gradient_of_a_cubic():
    theta = np.array([[0.3, -1.2], [2.0, 0.5]])
    num = numeric_gradient(lambda t: float(np.sum(t**3) + t[0, 1] * t[1, 0]), theta)
    exact = 3 * theta**2 + np.array([[0.0, theta[1, 0]], [theta[0, 1], 0.0]])
    assert np.max(np.abs(num - exact)) < 1e-8


def test_numeric_gradient_leaves_input_untouched():
    theta = np.arange(4.0)
    before = theta.copy()
    numeric_gradient(lambda t: float(t @ t), theta)
    assert np.array_equal(theta, before)


def test_relative_error_edges():
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0
    assert relative_error([1.0, 0.0], [-1.0, 0.0]) == 1.0
    assert relative_error([1.0], [1.0 + 1e-9]) < 1e-9


def test_settings():
    assert EPS == 1e-5 and TOLERANCE == 1e-5


@pytest.mark.parametrize("component", sorted(CHECKS))
def test_every_component_passes_on_twenty_seeds(component):
    results = run_suite(20, [component])
    assert len(results) == 20
    worst = max(r.rel_error for r in results)
    assert all(r.passed for r in results), f"{component}: worst relative error {worst:.3e}"


def test_a_wrong_gradient_is_caught():
    rng = np.random.default_rng(0)
    x = rng.normal(size=5)
    wrong = 2.1 * x
    assert relative_error(wrong, numeric_gradient(lambda t: float(t @ t), x)) > TOLERANCE

"""Closed-form slope, its oscillator encoding, and coordinate descent."""

import numpy as np
import pytest

from oscnet import regression
from oscnet.errors import DegenerateFeatureError, NotConvergedError


def brute_force_slope(x, y, lo=-50.0, hi=50.0, points=2_000_001):
    """Independent oracle: dense grid search of the squared loss."""
    ks = np.linspace(lo, hi, points)
    losses = ((np.outer(ks, x) - y) ** 2).sum(axis=1)
    return ks[np.argmin(losses)]


class TestSolveSingle:
    def test_exact_fit(self):
        assert regression.solve_single([1.0, 2.0], [2.0, 4.0]) == pytest.approx(2.0)

    def test_single_point(self):
        assert regression.solve_single([1.0], [3.75]) == pytest.approx(3.75)

    def test_three_sevenths_against_grid_oracle(self):
        x = np.array([1.0, 2.0, 3.0])
        y = np.array([1.0, 1.0, 1.0])
        k = regression.solve_single(x, y)
        assert k == pytest.approx(3.0 / 7.0, rel=1e-12)
        assert k == pytest.approx(brute_force_slope(x, y), abs=1e-4)

    def test_negative_x_handled_by_full_quadrant_encoding(self):
        """Mixed-sign features exercise the atan2 branch of the encoding."""
        x = np.array([1.0, -2.0, 3.0, -0.5])
        y = np.array([3.0, 5.0, -1.0, 0.25])
        k = regression.solve_single(x, y)
        assert k == pytest.approx(float(x @ y / (x @ x)), rel=1e-12)

    def test_zero_feature_rejected(self):
        with pytest.raises(DegenerateFeatureError):
            regression.solve_single([0.0, 0.0], [1.0, 2.0])

    def test_encoding_sums_reproduce_both_moments(self, rng):
        x = rng.normal(size=20)
        y = rng.normal(size=20)
        enc = regression.encode_single_regression(x, y)
        s = float(np.sum(enc.couplings * np.sin(enc.phases)))
        c = float(np.sum(enc.couplings * np.cos(enc.phases)))
        assert s == pytest.approx(float(np.sum(x * y)), rel=1e-12, abs=1e-12)
        assert c == pytest.approx(float(np.sum(x * x)), rel=1e-12, abs=1e-12)

    def test_potts_decode_agrees_on_many_random_instances(self, rng):
        """The dual-route check inside solve_single holds broadly."""
        for _ in range(500):
            n = int(rng.integers(1, 40))
            x = rng.uniform(-10, 10, size=n)
            y = rng.uniform(-10, 10, size=n)
            if float(x @ x) < 1e-9:
                continue
            regression.solve_single(x, y)  # raises on any disagreement


class TestCoordinateDescent:
    def test_orthogonal_design_converges_in_one_sweep(self):
        """Orthogonal columns decouple the coordinates."""
        x = np.array([[1.0, 1.0], [1.0, -1.0], [-2.0, 0.0]])
        assert abs(x[:, 0] @ x[:, 1]) < 1e-15
        y = np.array([2.0, 0.0, -3.0])
        problem = regression.RegressionProblem(x, y, fit_intercept=False)
        theta = regression.coordinate_descent(
            problem, regression.CoordinateDescentConfig(max_sweeps=2)
        )
        expected, *_ = np.linalg.lstsq(x, y, rcond=None)
        np.testing.assert_allclose(theta, expected, rtol=1e-12)

    def test_exact_linear_data_recovered(self, rng):
        x = rng.normal(size=(40, 3))
        true_theta = np.array([0.5, -1.25, 2.0, 0.75])
        y = true_theta[0] + x @ true_theta[1:]
        problem = regression.RegressionProblem(x, y)
        theta = regression.coordinate_descent(problem)
        np.testing.assert_allclose(theta, true_theta, atol=1e-8)

    def test_matches_normal_equations_on_random_problem(self, rng):
        x = rng.normal(size=(50, 4))
        y = rng.normal(size=50)
        problem = regression.RegressionProblem(x, y)
        theta = regression.coordinate_descent(problem)
        expected, *_ = np.linalg.lstsq(problem.design(), y, rcond=None)
        np.testing.assert_allclose(theta, expected, atol=1e-6)

    def test_loss_non_increasing_across_sweep_budgets(self, rng):
        x = rng.normal(size=(30, 5))
        x[:, 3] = 0.9 * x[:, 0] + 0.1 * x[:, 3]  # correlated, slower descent
        y = rng.normal(size=30)
        problem = regression.RegressionProblem(x, y)
        losses = []
        for budget in range(1, 8):
            try:
                theta = regression.coordinate_descent(
                    problem,
                    regression.CoordinateDescentConfig(max_sweeps=budget),
                )
            except NotConvergedError as err:
                theta = err.theta
            losses.append(regression.mse_loss(problem, theta))
        for a, b in zip(losses, losses[1:]):
            assert b <= a * (1 + 1e-12) + 1e-12

    def test_random_order_reaches_same_solution(self, rng):
        x = rng.normal(size=(40, 4))
        y = rng.normal(size=40)
        problem = regression.RegressionProblem(x, y)
        cyclic = regression.coordinate_descent(problem)
        permuted = regression.coordinate_descent(
            problem,
            regression.CoordinateDescentConfig(order="random", seed=5),
        )
        np.testing.assert_allclose(cyclic, permuted, atol=1e-8)

    def test_budget_exhaustion_carries_last_iterate(self, rng):
        x = rng.normal(size=(30, 3))
        x[:, 1] = x[:, 0] * 0.999 + 1e-3 * x[:, 1]
        y = rng.normal(size=30)
        problem = regression.RegressionProblem(x, y)
        with pytest.raises(NotConvergedError) as excinfo:
            regression.coordinate_descent(
                problem,
                regression.CoordinateDescentConfig(max_sweeps=1, tol=1e-14),
            )
        assert excinfo.value.theta is not None
        assert excinfo.value.theta.shape == (4,)


class TestPredict:
    def test_zero_theta(self):
        assert regression.predict(np.zeros(3), np.array([1.0, 2.0])) == 0.0

    def test_intercept_only(self):
        theta = np.array([1.0, 0.0, 0.0])
        assert regression.predict(theta, np.array([9.0, -4.0])) == 1.0

    def test_reproduces_training_targets_on_exact_data(self, rng):
        x = rng.normal(size=(25, 2))
        y = 0.3 - 1.1 * x[:, 0] + 0.7 * x[:, 1]
        theta = regression.coordinate_descent(regression.RegressionProblem(x, y))
        np.testing.assert_allclose(regression.predict(theta, x), y, atol=1e-9)


class TestPolynomialDesign:
    def test_powers(self):
        x = np.array([1.0, 2.0, 3.0])
        design = regression.polynomial_design(x, 3)
        np.testing.assert_allclose(design[:, 0], x)
        np.testing.assert_allclose(design[:, 1], x**2)
        np.testing.assert_allclose(design[:, 2], x**3)

    def test_quadratic_fit_through_lift(self, rng):
        x = rng.uniform(-2, 2, size=60)
        y = 1.5 * x**2 - 0.5 * x
        problem = regression.RegressionProblem(
            regression.polynomial_design(x, 2), y, fit_intercept=False
        )
        theta = regression.coordinate_descent(problem)
        np.testing.assert_allclose(theta, [-0.5, 1.5], atol=1e-8)

"""Supervised linear regression through the oscillator lens.

The one-parameter fit f(x) = k*x has the closed form

    k = sum(x_i * y_i) / sum(x_i**2),

and the same quotient is what an output oscillator computes when sample i
is encoded as phase theta_i = atan2(y_i, x_i) with coupling
J_i = x_i * sqrt(x_i**2 + y_i**2): then J_i*cos(theta_i) = x_i**2 and
J_i*sin(theta_i) = x_i*y_i, so tan of the settled phase is exactly k.
(The full-quadrant arctangent is required; the principal branch would
corrupt samples with negative x_i.)

Multivariable fitting reduces to that solve one coordinate at a time:
fixing all but theta_j turns the mean-squared-error objective into a
single-variable problem against the partial residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFeatureError, NotConvergedError, OscNetError
from .phase import EncodedInput

__all__ = [
    "RegressionProblem",
    "CoordinateDescentConfig",
    "encode_single_regression",
    "solve_single",
    "coordinate_descent",
    "predict",
    "mse_loss",
    "polynomial_design",
]

POTTS_AGREEMENT_TOL = 1e-9


@dataclass(frozen=True)
class RegressionProblem:
    """Design matrix, targets, and whether a constant-1 column is prepended."""

    x: np.ndarray  # (n_samples, n_features)
    y: np.ndarray  # (n_samples,)
    fit_intercept: bool = True

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError("x must be a non-empty (samples, features) matrix")
        if y.shape != (x.shape[0],):
            raise ValueError("y length must match the number of samples")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("x and y must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def design(self) -> np.ndarray:
        """Feature matrix actually fitted, intercept column first if requested."""
        if self.fit_intercept:
            return np.hstack([np.ones((self.x.shape[0], 1)), self.x])
        return self.x


@dataclass(frozen=True)
class CoordinateDescentConfig:
    max_sweeps: int = 10_000
    tol: float = 1e-10
    order: str = "cyclic"  # or "random"
    seed: int | None = None

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if self.order not in ("cyclic", "random"):
            raise ValueError("order must be 'cyclic' or 'random'")


def encode_single_regression(x, y) -> EncodedInput:
    """Oscillator encoding of a one-parameter regression instance.

    Phases are full-quadrant angles of the (x_i, y_i) points; couplings
    carry the x_i magnitude so the phase sums reproduce sum(x*y) and
    sum(x**2).
    """
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    phases = np.arctan2(yv, xv)
    couplings = xv * np.hypot(xv, yv)
    return EncodedInput(phases=phases, couplings=couplings)


def solve_single(x, y) -> float:
    """Closed-form slope for f(x) = k*x, cross-checked through the encoding.

    Evaluates k = sum(x*y)/sum(x*x) and independently decodes the
    oscillator encoding of the same instance; the two must agree to
    POTTS_AGREEMENT_TOL or the call fails loudly.
    """
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise ValueError("x and y must be 1-D and equally long")
    xx = float(np.sum(xv * xv))
    if xx <= 0.0:
        raise DegenerateFeatureError("sum of squares is zero; slope undefined")
    k = float(np.sum(xv * yv)) / xx
    enc = encode_single_regression(xv, yv)
    s = float(np.sum(enc.couplings * np.sin(enc.phases)))
    c = float(np.sum(enc.couplings * np.cos(enc.phases)))
    k_osc = float(np.tan(np.arctan2(s, c)))
    if abs(k_osc - k) > POTTS_AGREEMENT_TOL * max(1.0, abs(k)):
        raise OscNetError(
            f"oscillator decode {k_osc!r} disagrees with closed form {k!r}"
        )
    return k


def coordinate_descent(
    problem: RegressionProblem,
    config: CoordinateDescentConfig = CoordinateDescentConfig(),
) -> np.ndarray:
    """Exact one-coordinate minimization until the iterate stops moving.

    Every update solves the single-variable problem against the partial
    residual h_i = y_i - sum_{k != j} theta_k x_ik, so the loss is
    non-increasing by construction.  Raises NotConvergedError (with the
    last iterate attached) when max_sweeps is exhausted.
    """
    X = problem.design()
    y = problem.y
    n, m = X.shape
    sq = np.sum(X * X, axis=0)
    theta = np.zeros(m)
    residual = y.copy()
    rng = (
        np.random.default_rng(config.seed)
        if config.order == "random"
        else None
    )
    for _ in range(config.max_sweeps):
        order = rng.permutation(m) if rng is not None else range(m)
        max_delta = 0.0
        for j in order:
            if sq[j] <= 0.0:
                raise DegenerateFeatureError(
                    f"feature column {j} has zero sum of squares"
                )
            h = residual + theta[j] * X[:, j]
            new = solve_single(X[:, j], h)
            delta = new - theta[j]
            if delta != 0.0:
                residual -= delta * X[:, j]
                theta[j] = new
            max_delta = max(max_delta, abs(delta))
        if max_delta < config.tol:
            return theta
    raise NotConvergedError(
        f"coordinate descent did not converge in {config.max_sweeps} sweeps",
        theta=theta,
    )


def predict(theta, x, fit_intercept: bool = True) -> np.ndarray | float:
    """Affine evaluation of a fitted coefficient vector on rows of features."""
    t = np.asarray(theta, dtype=np.float64)
    xv = np.asarray(x, dtype=np.float64)
    single = xv.ndim == 1
    rows = xv[None, :] if single else xv
    if fit_intercept:
        if rows.shape[1] != t.size - 1:
            raise ValueError("feature width must be len(theta) - 1 with intercept")
        out = t[0] + rows @ t[1:]
    else:
        if rows.shape[1] != t.size:
            raise ValueError("feature width must match len(theta)")
        out = rows @ t
    return float(out[0]) if single else out


def mse_loss(problem: RegressionProblem, theta) -> float:
    """Sum of squared residuals of the fitted model."""
    X = problem.design()
    r = X @ np.asarray(theta, dtype=np.float64) - problem.y
    return float(np.sum(r * r))


def polynomial_design(x, degree: int) -> np.ndarray:
    """Powers x, x^2, ..., x^degree of a single feature as design columns.

    The lift that turns a polynomial fit into a linear one; the intercept
    is left to RegressionProblem.
    """
    xv = np.asarray(x, dtype=np.float64)
    if xv.ndim != 1:
        raise ValueError("x must be a 1-D sample vector")
    if degree < 1:
        raise ValueError("degree must be at least 1")
    return np.column_stack([xv**d for d in range(1, degree + 1)])

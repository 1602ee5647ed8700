"""Finite-dimensional dual problem for l^r tensor-kernel regression.

Objective over u in R^n:

    F(u) = K[u] / (m n^m) + (gamma/n) sum L*(u_i/gamma) - (1/n) sum y_i u_i

with the hyperplane constraint sum u_i = 0 when an offset is fitted, and
the box |u_i| <= gamma plus an l1 term for the eps-insensitive loss.
Minimized by first-order methods with Armijo backtracking; solutions are
certified through the optimality-condition residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .contraction import GramTensor, contract_full, contract_gradient
from .errors import DimensionMismatch, InfeasibleConfig, InfeasiblePoint
from .losses import (
    EpsInsensitiveLoss,
    Loss,
    PowerRegularizer,
    SquareLoss,
    loss_conjugate_derivative,
    loss_subdifferential_distance,
    prox_dual_term,
)

BOX_FEASIBILITY_SLACK = 1e-12


@dataclass
class DualProblem:
    gram: GramTensor
    labels: np.ndarray
    loss: Loss
    reg: PowerRegularizer
    gamma: float
    offset: bool = False

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=float).reshape(-1)
        if self.labels.shape[0] != self.gram.n:
            raise DimensionMismatch("labels must match the training set size")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.reg.order != self.gram.spec.order:
            raise ValueError("regularizer exponent must equal the kernel order")
        if self.offset and isinstance(self.loss, EpsInsensitiveLoss):
            raise InfeasibleConfig(
                "offset fitting requires a differentiable conjugate loss; "
                "center the labels instead")

    @property
    def n(self) -> int:
        return self.gram.n


@dataclass
class SolverConfig:
    tol_obj: float = 1e-10
    tol_kkt: float = 1e-6
    max_iter: int = 10000
    initial_step: float = 1.0
    backtrack: float = 0.5
    armijo: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if min(self.tol_obj, self.tol_kkt, self.initial_step) <= 0:
            raise ValueError("tolerances and the initial step must be positive")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError("backtracking factor must lie in (0, 1)")


@dataclass
class DualSolution:
    u: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)


def _check_feasible(problem: DualProblem, u: np.ndarray) -> None:
    if isinstance(problem.loss, EpsInsensitiveLoss):
        bound = problem.gamma * (1.0 + BOX_FEASIBILITY_SLACK)
        if np.max(np.abs(u)) > bound:
            raise InfeasiblePoint(
                "dual vector violates the box |u_i| <= gamma")


def _loss_term(problem: DualProblem, u: np.ndarray) -> float:
    n = problem.n
    if isinstance(problem.loss, SquareLoss):
        return float(np.sum(u * u)) / (2.0 * problem.gamma * n)
    return problem.loss.eps / n * float(np.sum(np.abs(u)))


def dual_objective(problem: DualProblem, u) -> float:
    """F(u); raises InfeasiblePoint outside the loss's effective domain."""
    u = np.asarray(u, dtype=float)
    _check_feasible(problem, u)
    n, m = problem.n, problem.gram.spec.order
    form = contract_full(problem.gram, u) / (m * float(n) ** m)
    return form + _loss_term(problem, u) - float(problem.labels @ u) / n


def _smooth_value(problem: DualProblem, u: np.ndarray) -> float:
    # Part handled by gradient steps: excludes the eps-insensitive l1/box term.
    n, m = problem.n, problem.gram.spec.order
    val = contract_full(problem.gram, u) / (m * float(n) ** m)
    val -= float(problem.labels @ u) / n
    if isinstance(problem.loss, SquareLoss):
        val += float(np.sum(u * u)) / (2.0 * problem.gamma * n)
    return val


def dual_gradient_smooth(problem: DualProblem, u) -> np.ndarray:
    """Gradient of the smooth part of the dual objective."""
    u = np.asarray(u, dtype=float)
    if u.shape != (problem.n,):
        raise DimensionMismatch(f"dual vector must have length {problem.n}")
    n, m = problem.n, problem.gram.spec.order
    grad = contract_gradient(problem.gram, u) / (m * float(n) ** m)
    grad -= problem.labels / n
    if isinstance(problem.loss, SquareLoss):
        grad = grad + u / (problem.gamma * n)
    return grad


def _predictions(problem: DualProblem, u: np.ndarray) -> np.ndarray:
    # f(x_j) at the training points, from the same partial contraction that
    # drives the gradient: grad_form_j = C_j / n^m with C_j the unscaled
    # prediction contraction, so f(x_j) = C_j / n^(m-1).
    n, m = problem.n, problem.gram.spec.order
    c = contract_gradient(problem.gram, u) / m
    return c / float(n) ** (m - 1)


def recover_offset(problem: DualProblem, u: np.ndarray,
                   predictions: Optional[np.ndarray] = None) -> float:
    """Offset from the optimality conditions, averaged over samples to damp
    floating-point noise. Zero in no-offset mode."""
    if not problem.offset:
        return 0.0
    if predictions is None:
        predictions = _predictions(problem, u)
    dl = np.array([loss_conjugate_derivative(problem.loss, ui / problem.gamma)
                   for ui in u])
    return float(np.mean(problem.labels - predictions - dl))


def _fixed_point_residual(problem: DualProblem, u: np.ndarray,
                          grad: np.ndarray) -> float:
    # Unit-step prox/projected-gradient fixed-point gap.
    if isinstance(problem.loss, EpsInsensitiveLoss):
        step = prox_dual_term(problem.loss, u - grad, 1.0, problem.gamma,
                              problem.n)
        return float(np.max(np.abs(u - step)))
    if problem.offset:
        grad = grad - np.mean(grad)
    return float(np.max(np.abs(grad)))


def _condition_residuals(problem: DualProblem, u: np.ndarray,
                         predictions: np.ndarray, b: float) -> tuple[float, float]:
    balance = abs(float(np.sum(u))) if problem.offset else 0.0
    errors = problem.labels - predictions - b
    subdiff = max(
        loss_subdifferential_distance(problem.loss, e, ui, problem.gamma)
        for e, ui in zip(errors, u))
    return balance, subdiff


@dataclass
class KKTReport:
    """Per-condition optimality residuals for a dual vector."""

    offset_balance: float
    subdifferential: float
    fixed_point: float
    per_sample: np.ndarray
    max: float


def kkt_report(problem: DualProblem, u, b: float = 0.0) -> KKTReport:
    """Residuals of the optimality conditions at (u, b)."""
    u = np.asarray(u, dtype=float)
    _check_feasible(problem, u)
    predictions = _predictions(problem, u)
    errors = problem.labels - predictions - b
    per_sample = np.array([
        loss_subdifferential_distance(problem.loss, e, ui, problem.gamma)
        for e, ui in zip(errors, u)])
    balance = abs(float(np.sum(u))) if problem.offset else 0.0
    grad = dual_gradient_smooth(problem, u)
    fp = _fixed_point_residual(problem, u, grad)
    return KKTReport(balance, float(np.max(per_sample)), fp, per_sample,
                     max(balance, float(np.max(per_sample))))


def _residual(problem: DualProblem, u, grad) -> float:
    predictions = _predictions(problem, u)
    b = recover_offset(problem, u, predictions)
    balance, subdiff = _condition_residuals(problem, u, predictions, b)
    return max(balance, subdiff, _fixed_point_residual(problem, u, grad))


def solve(problem: DualProblem, config: Optional[SolverConfig] = None) -> DualSolution:
    """Minimize the dual objective from u = 0.

    Square loss uses (projected) gradient descent with Armijo backtracking;
    the eps-insensitive loss uses proximal gradient steps with a quadratic
    upper-bound line search. Returns the best iterate with converged=False
    when the iteration cap is hit.
    """
    config = config or SolverConfig()
    n = problem.n
    eps_mode = isinstance(problem.loss, EpsInsensitiveLoss)

    u = np.zeros(n)
    obj = dual_objective(problem, u)
    step = config.initial_step
    trace = []

    for it in range(config.max_iter):
        grad = dual_gradient_smooth(problem, u)
        residual = _residual(problem, u, grad)
        trace.append((obj, step, residual))
        if residual <= config.tol_kkt:
            return DualSolution(u, obj, residual, it, True, trace)

        direction = grad - np.mean(grad) if problem.offset else grad
        accepted = False
        while step > 1e-20:
            if eps_mode:
                cand = prox_dual_term(problem.loss, u - step * grad, step,
                                      problem.gamma, n)
                diff = cand - u
                quad = float(grad @ diff) + float(diff @ diff) / (2.0 * step)
                smooth_u = _smooth_value(problem, u)
                if _smooth_value(problem, cand) <= smooth_u + quad + 1e-14 * (
                        1.0 + abs(smooth_u)):
                    accepted = True
                    break
            else:
                cand = u - step * direction
                decrease = config.armijo * step * float(direction @ direction)
                # The 1e-14 relative slack keeps the line search alive once
                # the true decrease falls below objective rounding noise.
                if dual_objective(problem, cand) <= obj - decrease + 1e-14 * (
                        1.0 + abs(obj)):
                    accepted = True
                    break
            step *= config.backtrack
        if not accepted:
            # Step collapsed: numerically stationary.
            return DualSolution(u, obj, residual, it, residual <= config.tol_kkt,
                                trace)
        prev_obj = obj
        u = cand
        obj = dual_objective(problem, u)
        step = min(step * 2.0, config.initial_step)
        if abs(prev_obj - obj) <= config.tol_obj * (1.0 + abs(obj)):
            # Objective has stalled; keep polishing only while the residual
            # still moves, otherwise further iterations are no-ops.
            grad = dual_gradient_smooth(problem, u)
            residual = _residual(problem, u, grad)
            if residual <= config.tol_kkt:
                trace.append((obj, step, residual))
                return DualSolution(u, obj, residual, it + 1, True, trace)

    grad = dual_gradient_smooth(problem, u)
    residual = _residual(problem, u, grad)
    trace.append((obj, step, residual))
    return DualSolution(u, obj, residual, config.max_iter,
                        residual <= config.tol_kkt, trace)

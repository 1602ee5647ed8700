"""Loss functions with Fenchel conjugates, proximal maps, and the l^r-power
regularizer."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotDifferentiable


@dataclass(frozen=True)
class SquareLoss:
    """L(t) = t^2 / 2."""

    name = "square"


@dataclass(frozen=True)
class EpsInsensitiveLoss:
    """L(t) = max(0, |t| - eps): the distance to the interval [-eps, eps]."""

    eps: float
    name = "eps-insensitive"

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")


Loss = SquareLoss | EpsInsensitiveLoss


def loss_value(loss: Loss, t: float) -> float:
    if isinstance(loss, SquareLoss):
        return 0.5 * t * t
    return max(0.0, abs(t) - loss.eps)


def loss_conjugate(loss: Loss, v: float) -> float:
    """L*(v); +inf is a legitimate value for the eps-insensitive loss."""
    if isinstance(loss, SquareLoss):
        return 0.5 * v * v
    if abs(v) > 1.0:
        return math.inf
    return loss.eps * abs(v)


def loss_conjugate_derivative(loss: Loss, v: float) -> float:
    if isinstance(loss, SquareLoss):
        return v
    if v == 0.0 or abs(v) >= 1.0:
        raise NotDifferentiable(
            f"eps-insensitive conjugate has a kink at v = {v}")
    return loss.eps * math.copysign(1.0, v)


def prox_dual_term(loss: Loss, v, step: float, gamma: float, n: int) -> np.ndarray:
    """Componentwise prox of step * (gamma/n) sum L*(u_i/gamma).

    Square: shrink by 1/(1 + step/(gamma n)). Eps-insensitive: soft
    threshold by step*eps/n, then clamp to the dual box [-gamma, gamma].
    """
    if step <= 0:
        raise ValueError("step must be positive")
    v = np.asarray(v, dtype=float)
    if isinstance(loss, SquareLoss):
        return v / (1.0 + step / (gamma * n))
    thr = step * loss.eps / n
    shrunk = np.sign(v) * np.maximum(np.abs(v) - thr, 0.0)
    return np.clip(shrunk, -gamma, gamma)


def _interval_distance(x: float, lo: float, hi: float) -> float:
    return max(lo - x, x - hi, 0.0)


def loss_subdifferential_distance(loss: Loss, e: float, v: float,
                                  gamma: float) -> float:
    """Max-norm distance from the pair (e, v/gamma) to the graph of the
    subdifferential of L.

    The pointwise set distance is discontinuous at the eps-insensitive
    kinks |e| = eps, so a solution computed in floating point could never
    certify there; the graph distance is continuous, agrees with the
    pointwise value away from the kinks, and vanishes exactly on the
    optimality set.
    """
    s = v / gamma
    if isinstance(loss, SquareLoss):
        return abs(s - e)
    eps = loss.eps
    # One branch per piece of the graph: flat tube, two kink segments,
    # and the two saturated rays.
    return min(
        max(_interval_distance(e, -eps, eps), abs(s)),
        max(abs(e - eps), _interval_distance(s, 0.0, 1.0)),
        max(abs(e + eps), _interval_distance(s, -1.0, 0.0)),
        max(_interval_distance(e, eps, math.inf), abs(s - 1.0)),
        max(_interval_distance(e, -math.inf, -eps), abs(s + 1.0)),
    )


@dataclass(frozen=True)
class PowerRegularizer:
    """phi(t) = (1/r)|t|^r with r = m/(m-1); conjugate exponent r* = m."""

    order: int

    def __post_init__(self):
        if self.order < 2 or self.order % 2 != 0:
            raise ValueError("conjugate exponent m must be an even integer >= 2")

    @property
    def r(self) -> float:
        return self.order / (self.order - 1)

    @property
    def r_star(self) -> int:
        return self.order


def regularizer_value(reg: PowerRegularizer, t: float) -> float:
    return abs(t) ** reg.r / reg.r


def regularizer_conjugate(reg: PowerRegularizer, s: float) -> float:
    return abs(s) ** reg.r_star / reg.r_star

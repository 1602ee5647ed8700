"""Power-series tensor kernels of even order over real inputs.

A kernel of order ``m`` is built from a scalar coefficient series
``(gamma_k)`` with radius ``R`` and evaluated either in "composed" form,
``psi(sum_t prod_j x_{j,t})``, or in "product" form,
``prod_t psi(prod_j x_{j,t})``, where ``psi`` is the sum of the series.
Both forms arise from a multi-index weight family ``rho_nu`` over the
monomial dictionary ``x^nu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .errors import (
    CombinatorialOverflow,
    DimensionMismatch,
    DomainViolation,
    NonConvergent,
    ZeroDiagonal,
)

# Points closer than this to the convergence boundary are rejected.
BOUNDARY_MARGIN = 1e-9
# Relative tail tolerance and term cap for truncated series evaluation.
SERIES_TAIL_RTOL = 1e-14
SERIES_MAX_TERMS = 10**6
# Default cap on dictionary enumerations.
DICTIONARY_SIZE_CAP = 2_000_000
# Exact integer multinomials below this total degree, log-gamma above.
EXACT_MULTINOMIAL_DEGREE = 20

COMPOSED = "composed"
PRODUCT = "product"


@dataclass(frozen=True)
class SeriesSpec:
    """Scalar coefficient series gamma_k >= 0 with convergence radius."""

    name: str
    coeff: Callable[[int], float]
    radius: float
    psi: Optional[Callable[[float], float]] = None
    params: dict = field(default_factory=dict)

    def gamma(self, k: int) -> float:
        g = self.coeff(k)
        if g < 0:
            raise ValueError(f"series coefficient gamma_{k} = {g} is negative")
        return g


def exponential_series() -> SeriesSpec:
    """gamma_k = 1/k!, psi(z) = exp(z), infinite radius."""
    return SeriesSpec("exponential", lambda k: 1.0 / math.factorial(k),
                      math.inf, math.exp)


def polynomial_series(s: int) -> SeriesSpec:
    """gamma_k = C(s, k) for k <= s, psi(z) = (1 + z)^s, finite series."""
    if s < 0 or s != int(s):
        raise ValueError("polynomial degree s must be a non-negative integer")
    s = int(s)
    return SeriesSpec("polynomial",
                      lambda k: float(math.comb(s, k)) if k <= s else 0.0,
                      math.inf, lambda z: (1.0 + z) ** s, {"s": s})


def binomial_series(alpha: float) -> SeriesSpec:
    """gamma_k = prod_{i<=k} (alpha+i-1)/i, psi(z) = (1-z)^(-alpha), R = 1."""
    if alpha <= 0:
        raise ValueError("binomial exponent alpha must be positive")

    def coeff(k: int) -> float:
        g = 1.0
        for i in range(1, k + 1):
            g *= (alpha + i - 1) / i
        return g

    return SeriesSpec("binomial", coeff, 1.0,
                      lambda z: (1.0 - z) ** (-alpha), {"alpha": alpha})


def geometric_series() -> SeriesSpec:
    """gamma_k = 1, psi(z) = 1/(1-z), R = 1 (Szego-type kernel)."""
    return SeriesSpec("geometric", lambda k: 1.0, 1.0, lambda z: 1.0 / (1.0 - z))


def bergman_series() -> SeriesSpec:
    """gamma_k = (k+1)/pi, psi(z) = 1/(pi (1-z)^2), R = 1."""
    return SeriesSpec("bergman", lambda k: (k + 1) / math.pi, 1.0,
                      lambda z: 1.0 / (math.pi * (1.0 - z) ** 2))


_SERIES_FACTORIES = {
    "exponential": lambda params: exponential_series(),
    "polynomial": lambda params: polynomial_series(params["s"]),
    "binomial": lambda params: binomial_series(params["alpha"]),
    "geometric": lambda params: geometric_series(),
    "bergman": lambda params: bergman_series(),
}


def series_by_name(name: str, params: Optional[dict] = None) -> SeriesSpec:
    try:
        factory = _SERIES_FACTORIES[name]
    except KeyError:
        raise ValueError(f"unknown series family {name!r}") from None
    return factory(params or {})


def builtin_series_names() -> list[str]:
    return list(_SERIES_FACTORIES)


def eval_series(series: SeriesSpec, z: float) -> float:
    """Sum gamma_k z^k by direct accumulation with a certified tail bound.

    For finite-radius series the geometric tail estimate
    ``gamma_K |z|^K / (1 - |z|/R)`` must drop below ``SERIES_TAIL_RTOL``
    times the partial sum; infinite-radius series stop once terms are
    negligible for three consecutive indices.
    """
    total = 0.0
    zk = 1.0
    az = abs(z)
    if math.isfinite(series.radius):
        q = az / series.radius
        if q >= 1.0:
            raise NonConvergent(f"|z| = {az} outside radius {series.radius}")
    small_run = 0
    for k in range(SERIES_MAX_TERMS):
        g = series.gamma(k)
        total += g * zk
        ref = max(abs(total), 1e-300)
        if math.isfinite(series.radius):
            tail = g * (az ** k) / (1.0 - az / series.radius)
            if tail < SERIES_TAIL_RTOL * ref:
                return total
        else:
            if abs(g) * (az ** k) < SERIES_TAIL_RTOL * ref:
                small_run += 1
                if small_run >= 3:
                    return total
            else:
                small_run = 0
        zk *= z
    raise NonConvergent(
        f"series did not meet tail bound within {SERIES_MAX_TERMS} terms")


def psi_value(series: SeriesSpec, z: float) -> float:
    """Evaluate psi(z), preferring the closed form over the truncated series."""
    if series.psi is not None:
        return series.psi(z)
    return eval_series(series, z)


@dataclass(frozen=True)
class KernelSpec:
    """Order-m tensor kernel over R^d built from a scalar series."""

    series: SeriesSpec
    mode: str
    order: int
    dim: int

    def __post_init__(self):
        if self.mode not in (COMPOSED, PRODUCT):
            raise ValueError(f"mode must be {COMPOSED!r} or {PRODUCT!r}")
        if self.order < 2 or self.order % 2 != 0:
            raise ValueError("tensor order m must be an even integer >= 2")
        if self.dim < 1:
            raise ValueError("input dimension d must be >= 1")

    @property
    def r(self) -> float:
        return self.order / (self.order - 1)

    @property
    def r_star(self) -> int:
        return self.order


@dataclass(frozen=True)
class DomainCheck:
    """Result of a convergence-domain test for one input point."""

    passed: bool
    margin: float


def check_domain(spec: KernelSpec, point: Sequence[float]) -> DomainCheck:
    """Test whether a point lies inside the kernel's convergence region.

    Composed mode requires ``sum_t |x_t|^m < R``; product mode requires
    ``max_t |x_t| < R^(1/m)``. Never raises; returns a failure state with
    the (clamped) distance to the boundary.
    """
    x = np.asarray(point, dtype=float)
    if x.shape != (spec.dim,):
        raise DimensionMismatch(
            f"expected a vector of length {spec.dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        return DomainCheck(False, 0.0)
    radius = spec.series.radius
    if math.isinf(radius):
        return DomainCheck(True, math.inf)
    if spec.mode == COMPOSED:
        margin = radius - float(np.sum(np.abs(x) ** spec.order))
    else:
        margin = radius ** (1.0 / spec.order) - float(np.max(np.abs(x)))
    return DomainCheck(margin > BOUNDARY_MARGIN, max(margin, 0.0))


def _as_points(spec: KernelSpec, points, count: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1 and spec.dim == 1:
        pts = pts.reshape(-1, 1)
    if pts.shape != (count, spec.dim):
        raise DimensionMismatch(
            f"expected {count} points in R^{spec.dim}, got shape {pts.shape}")
    return pts


def _canonicalize(pts: np.ndarray) -> np.ndarray:
    # Lexicographic row sort makes permutation symmetry bit-exact.
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def eval_kernel(spec: KernelSpec, points, *, validate: bool = True) -> float:
    """Evaluate K(x'_1, ..., x'_m) for m points in R^d."""
    pts = _as_points(spec, points, spec.order)
    if validate:
        for i in range(spec.order):
            if not check_domain(spec, pts[i]).passed:
                raise DomainViolation(
                    f"argument {i} lies outside the convergence region")
    pts = _canonicalize(pts)
    col_products = np.prod(pts, axis=0)  # prod_j x_{j,t} per coordinate t
    if spec.mode == COMPOSED:
        return psi_value(spec.series, float(np.sum(col_products)))
    value = 1.0
    for t in range(spec.dim):
        value *= psi_value(spec.series, float(col_products[t]))
    return value


def eval_normalized(spec: KernelSpec, points) -> float:
    """Normalized kernel K(points) / prod_j K(x_j, ..., x_j)^(1/m)."""
    pts = _as_points(spec, points, spec.order)
    denom = 1.0
    for j in range(spec.order):
        diag = eval_kernel(spec, np.tile(pts[j], (spec.order, 1)))
        if diag <= 0.0:
            raise ZeroDiagonal(
                f"diagonal kernel value {diag} at argument {j} is not positive")
        denom *= diag ** (1.0 / spec.order)
    return eval_kernel(spec, pts) / denom


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All nonnegative integer tuples of the given length summing to total,
    first component descending (graded enumeration order)."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in compositions(total - head, parts - 1):
            yield (head,) + rest


def multinomial(total: int, nu: Sequence[int]) -> float:
    """Multinomial coefficient total! / prod(nu_t!); log-gamma past the
    exact-integer degree cap to avoid huge intermediates."""
    if sum(nu) != total:
        raise ValueError("multi-index entries must sum to the total degree")
    if total <= EXACT_MULTINOMIAL_DEGREE:
        c = 1
        rem = total
        for v in nu:
            c *= math.comb(rem, v)
            rem -= v
        return float(c)
    lg = math.lgamma(total + 1) - sum(math.lgamma(v + 1) for v in nu)
    return math.exp(lg)


def dictionary_weight(spec: KernelSpec, nu: Sequence[int]) -> float:
    """rho_nu for one multi-index: composed mode couples coordinates through
    the multinomial expansion, product mode factorizes per coordinate."""
    if spec.mode == COMPOSED:
        k = sum(nu)
        return spec.series.gamma(k) * multinomial(k, nu)
    w = 1.0
    for v in nu:
        w *= spec.series.gamma(v)
    return w


def multi_index_dictionary(spec: KernelSpec, cutoff: int,
                           size_cap: int = DICTIONARY_SIZE_CAP
                           ) -> list[tuple[tuple[int, ...], float]]:
    """Enumerate (nu, rho_nu) for |nu| <= cutoff in graded-lex order."""
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    count = sum(math.comb(k + spec.dim - 1, spec.dim - 1)
                for k in range(cutoff + 1))
    if count > size_cap:
        raise CombinatorialOverflow(
            f"dictionary would hold {count} entries (cap {size_cap})")
    out = []
    for k in range(cutoff + 1):
        for nu in compositions(k, spec.dim):
            out.append((nu, dictionary_weight(spec, nu)))
    return out

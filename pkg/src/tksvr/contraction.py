"""Symmetric contractions of the order-m kernel tensor.

The degree-m form ``K[u] = sum K(x_{i_1},...,x_{i_m}) u_{i_1}...u_{i_m}``
is summed over index multisets with multinomial weights instead of the
naive n^m loop; kernel values are cached under sorted index keys so all
permutations share one entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import CombinatorialOverflow, DimensionMismatch, DomainViolation
from .kernels import KernelSpec, check_domain, compositions, eval_kernel, multinomial

# Cap on the number of enumerated multisets; beyond this the dense tensor
# work is infeasible at desk scale anyway.
MULTISET_SIZE_CAP = 5_000_000


def enumerate_multisets(n: int, m: int,
                        size_cap: int = MULTISET_SIZE_CAP
                        ) -> Iterator[tuple[tuple[int, ...], float]]:
    """Yield (alpha, multinomial weight) over all alpha in N^n with |alpha| = m.

    Exactly C(n+m-1, m) entries; the weights sum to n^m.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    count = math.comb(n + m - 1, m)
    if count > size_cap:
        raise CombinatorialOverflow(
            f"{count} multisets exceed the cap {size_cap}")
    for alpha in compositions(m, n):
        yield alpha, multinomial(m, alpha)


def _multiset_indices(alpha: Sequence[int]) -> tuple[int, ...]:
    out = []
    for i, a in enumerate(alpha):
        out.extend([i] * a)
    return tuple(out)


@dataclass
class ContractionResult:
    """Value of a contraction plus rough work accounting."""

    value: float
    terms_evaluated: int
    flops_estimate: int


@dataclass
class GramTensor:
    """Cached symmetric kernel evaluations over a fixed training set."""

    spec: KernelSpec
    points: np.ndarray
    cache: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim == 1:
            self.points = self.points.reshape(-1, 1)
        if self.points.ndim != 2 or self.points.shape[1] != self.spec.dim:
            raise DimensionMismatch(
                f"training points must have shape (n, {self.spec.dim})")
        for i in range(self.points.shape[0]):
            if not check_domain(self.spec, self.points[i]).passed:
                raise DomainViolation(
                    f"training point {i} lies outside the convergence region")
        self._full = None
        self._grad = None

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def kernel_value(self, indices: Sequence[int]) -> float:
        """K at the training points selected by an index tuple of length m;
        the cache key is the sorted tuple."""
        key = tuple(sorted(indices))
        if len(key) != self.spec.order:
            raise DimensionMismatch(
                f"need {self.spec.order} indices, got {len(key)}")
        val = self.cache.get(key)
        if val is None:
            val = eval_kernel(self.spec, self.points[list(key)], validate=False)
            self.cache[key] = val
        return val

    # Dense helper tables, built lazily once per fit and reused across
    # solver iterations.
    def _full_tables(self):
        if self._full is None:
            m = self.spec.order
            alphas, weights, values = [], [], []
            for alpha, w in enumerate_multisets(self.n, m):
                alphas.append(alpha)
                weights.append(w)
                values.append(self.kernel_value(_multiset_indices(alpha)))
            self._full = (np.array(alphas, dtype=float),
                          np.array(weights) * np.array(values))
        return self._full

    def _grad_tables(self):
        if self._grad is None:
            m = self.spec.order
            betas, coef = [], []
            for beta, w in enumerate_multisets(self.n, m - 1):
                idx = _multiset_indices(beta)
                betas.append(beta)
                coef.append([w * self.kernel_value(idx + (j,))
                             for j in range(self.n)])
            self._grad = (np.array(betas, dtype=float), np.array(coef))
        return self._grad


def _check_u(gram: GramTensor, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (gram.n,):
        raise DimensionMismatch(
            f"dual vector must have length {gram.n}, got shape {u.shape}")
    return u


def _monomials(u: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    # 0^0 = 1 under np.power, which is the convention needed here.
    return np.prod(np.power(u[None, :], exponents), axis=1)


def contract_full(gram: GramTensor, u, *, info: bool = False):
    """K[u]: full degree-m contraction of the kernel tensor against u."""
    u = _check_u(gram, u)
    exponents, coef = gram._full_tables()
    terms = coef * _monomials(u, exponents)
    value = math.fsum(terms.tolist())
    if info:
        m = gram.spec.order
        return ContractionResult(value, len(terms), len(terms) * (m + gram.n))
    return value


def contract_full_naive(gram: GramTensor, u) -> float:
    """Reference n^m loop; retained as a test oracle only."""
    u = _check_u(gram, u)
    m = gram.spec.order
    total = []
    for idx in np.ndindex(*([gram.n] * m)):
        prod = 1.0
        for i in idx:
            prod *= u[i]
        total.append(gram.kernel_value(idx) * prod)
    return math.fsum(total)


def contract_gradient(gram: GramTensor, u) -> np.ndarray:
    """Gradient of K[u]: m times the degree-(m-1) partial contraction."""
    u = _check_u(gram, u)
    exponents, coef = gram._grad_tables()
    mono = _monomials(u, exponents)
    return gram.spec.order * (mono @ coef)


def contract_predict(gram: GramTensor, u, x) -> float:
    """Degree-(m-1) contraction against u with a query point in the last
    slot; unscaled (the model applies 1/n^(m-1))."""
    u = _check_u(gram, u)
    x = np.asarray(x, dtype=float).reshape(-1)
    if not check_domain(gram.spec, x).passed:
        raise DomainViolation("query point lies outside the convergence region")
    m = gram.spec.order
    terms = []
    for beta, w in enumerate_multisets(gram.n, m - 1):
        prod = w
        for i, b in enumerate(beta):
            if b:
                prod *= u[i] ** b
        if prod == 0.0:
            continue
        pts = np.vstack([gram.points[list(_multiset_indices(beta))], x])
        terms.append(prod * eval_kernel(gram.spec, pts, validate=False))
    return math.fsum(terms)

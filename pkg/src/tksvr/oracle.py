"""Ground-truth diagnostics computed from the explicit monomial dictionary.

Everything here works directly with feature coefficients (the primal
side), so it is independent of the cached-contraction engine and can
certify it: the degree-m form must equal the l^m feature norm, and the
kernel-trick prediction must equal the primal pairing <w, Phi(x)>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dual_solver import DualProblem, dual_objective
from .errors import GridTooCoarse, TruncationTooCoarse
from .kernels import (
    COMPOSED,
    KernelSpec,
    eval_kernel,
    multi_index_dictionary,
    psi_value,
)

TRUNCATION_RTOL = 1e-12
TRUNCATION_DEGREE_CAP = 30


@dataclass
class ExplicitFeatureMap:
    """Finite (or certified-truncated) dictionary x -> (rho_nu^(1/m) x^nu)."""

    spec: KernelSpec
    dictionary: list  # [(nu, rho_nu)]
    tail_bound: float  # worst relative dropped l^m mass at the build points

    @property
    def exponents(self) -> np.ndarray:
        return np.array([nu for nu, _ in self.dictionary], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([rho for _, rho in self.dictionary])

    def evaluate(self, X) -> np.ndarray:
        """Feature matrix with one row per input point."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, self.spec.dim)
        exps = self.exponents
        w = self.weights ** (1.0 / self.spec.order)
        feats = np.empty((X.shape[0], len(self.dictionary)))
        for i, x in enumerate(X):
            feats[i] = w * np.prod(np.power(x[None, :], exps), axis=1)
        return feats


def _retained_mass(spec: KernelSpec, dictionary, x: np.ndarray) -> float:
    z = np.abs(x) ** spec.order
    return math.fsum(rho * float(np.prod(z ** np.asarray(nu)))
                     for nu, rho in dictionary)


def _total_mass(spec: KernelSpec, x: np.ndarray) -> float:
    z = np.abs(x) ** spec.order
    if spec.mode == COMPOSED:
        return psi_value(spec.series, float(np.sum(z)))
    total = 1.0
    for t in range(spec.dim):
        total *= psi_value(spec.series, float(z[t]))
    return total


def build_feature_map(spec: KernelSpec, sample_points=None,
                      cutoff: Optional[int] = None) -> ExplicitFeatureMap:
    """Materialize the dictionary up to a degree cutoff.

    Finite series (polynomial kernels) get the exact dictionary. Infinite
    series grow the cutoff until the dropped l^m tail mass is below
    TRUNCATION_RTOL of the retained mass at every sample point.
    """
    s = spec.series.params.get("s")
    if spec.series.name == "polynomial" and cutoff is None:
        if spec.mode == COMPOSED:
            cutoff = s
        else:
            cutoff = s * spec.dim
    if cutoff is not None:
        dictionary = multi_index_dictionary(spec, cutoff)
        tail = _tail_bound(spec, dictionary, sample_points)
        if spec.series.name != "polynomial" and tail > TRUNCATION_RTOL:
            raise TruncationTooCoarse(
                f"tail mass {tail:.3e} exceeds {TRUNCATION_RTOL} at the "
                f"requested cutoff {cutoff}")
        return ExplicitFeatureMap(spec, dictionary, tail)
    if sample_points is None:
        raise ValueError("sample points are required to certify a truncation")
    for n in range(1, TRUNCATION_DEGREE_CAP + 1):
        dictionary = multi_index_dictionary(spec, n)
        tail = _tail_bound(spec, dictionary, sample_points)
        if tail <= TRUNCATION_RTOL:
            return ExplicitFeatureMap(spec, dictionary, tail)
    raise TruncationTooCoarse(
        f"tail mass still {tail:.3e} at degree cap {TRUNCATION_DEGREE_CAP}")


def _tail_bound(spec: KernelSpec, dictionary, sample_points) -> float:
    if sample_points is None:
        return 0.0
    pts = np.asarray(sample_points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, spec.dim)
    worst = 0.0
    for x in pts:
        retained = _retained_mass(spec, dictionary, x)
        total = _total_mass(spec, x)
        if retained <= 0.0:
            return math.inf
        worst = max(worst, max(total - retained, 0.0) / retained)
    return worst


def feature_norm(fmap: ExplicitFeatureMap, u, inputs) -> float:
    """||sum_i u_i Phi(x_i)||_m^m computed coefficientwise."""
    u = np.asarray(u, dtype=float)
    feats = fmap.evaluate(inputs)
    combo = u @ feats
    return math.fsum((combo ** fmap.spec.order).tolist())


def primal_weights(fmap: ExplicitFeatureMap, u, inputs) -> np.ndarray:
    """Primal coefficients w_nu = (1/n^(m-1)) (sum_i u_i phi_nu(x_i))^(m-1);
    the odd power m-1 carries the sign, matching the m-duality map."""
    u = np.asarray(u, dtype=float)
    feats = fmap.evaluate(inputs)
    combo = u @ feats
    n = feats.shape[0]
    return combo ** (fmap.spec.order - 1) / float(n) ** (fmap.spec.order - 1)


def primal_predict(fmap: ExplicitFeatureMap, w, x) -> float:
    """<w, Phi(x)> for explicit coefficients w."""
    feats = fmap.evaluate(np.atleast_2d(np.asarray(x, dtype=float)))[0]
    return math.fsum((np.asarray(w) * feats).tolist())


def duality_map_power(w, p: int) -> np.ndarray:
    """Componentwise p-duality map on sequences: sign(w)|w|^(p-1)."""
    w = np.asarray(w, dtype=float)
    return np.sign(w) * np.abs(w) ** (p - 1)


def holder_check(spec: KernelSpec, points) -> dict:
    """Generalized Cauchy-Schwarz: |K(points)| vs the diagonal bound."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, spec.dim)
    lhs = abs(eval_kernel(spec, pts))
    rhs = 1.0
    for j in range(spec.order):
        rhs *= eval_kernel(spec, np.tile(pts[j], (spec.order, 1))) ** (
            1.0 / spec.order)
    return {"lhs": lhs, "rhs": rhs, "pass": lhs <= rhs * (1.0 + 1e-12)}


def brute_force_dual(problem: DualProblem, grid_resolution: float = 1e-4,
                     initial_points: int = 41, refinements: int = 6) -> np.ndarray:
    """Grid minimizer of the dual objective for tiny instances (n <= 2).

    Searches the feasible box (eps-insensitive) or a radius taken from the
    order-2 closed-form solution times three (square loss), then zooms in
    until the spacing falls below grid_resolution. A final local
    refinement must not move the minimizer by more than the last spacing,
    otherwise the resolution is declared too coarse.
    """
    from .losses import EpsInsensitiveLoss
    n = problem.n
    if n > 2:
        raise ValueError("brute-force search is limited to n <= 2")
    if isinstance(problem.loss, EpsInsensitiveLoss):
        lo = -problem.gamma * np.ones(n)
        hi = problem.gamma * np.ones(n)
    else:
        g = np.array([[problem.gram.kernel_value((i,) * (problem.gram.spec.order - 1) + (j,))
                       for j in range(n)] for i in range(n)])
        # order-2 stationarity as a bracketing heuristic for the search box
        ref = np.linalg.solve(g / n + np.eye(n) / problem.gamma,
                              problem.labels)
        radius = 3.0 * max(1.0, float(np.max(np.abs(ref))))
        lo, hi = -radius * np.ones(n), radius * np.ones(n)

    def grid_min(lo, hi, k):
        axes = [np.linspace(lo[i], hi[i], k) for i in range(n)]
        best, best_val = None, math.inf
        for idx in np.ndindex(*([k] * n)):
            u = np.array([axes[i][idx[i]] for i in range(n)])
            val = dual_objective(problem, u)
            if val < best_val:
                best, best_val = u, val
        return best, best_val

    best, _ = grid_min(lo, hi, initial_points)
    spacing = float(np.max((hi - lo) / (initial_points - 1)))
    while spacing > grid_resolution:
        lo = np.maximum(best - spacing, lo)
        hi = np.minimum(best + spacing, hi)
        best, _ = grid_min(lo, hi, initial_points)
        spacing = float(np.max((hi - lo) / (initial_points - 1)))
        refinements -= 1
        if refinements < 0:
            break
    # Sanity: one more local pass should stay within a grid cell.
    check, _ = grid_min(np.maximum(best - spacing, lo),
                        np.minimum(best + spacing, hi), initial_points)
    if float(np.max(np.abs(check - best))) > 2.0 * spacing:
        raise GridTooCoarse("local refinement moved the minimizer by more "
                            "than the grid spacing")
    return check

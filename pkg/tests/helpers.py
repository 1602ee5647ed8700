"""Shared helpers for the test suite: in-domain sampling and small oracles."""

import numpy as np

from tksvr.kernels import COMPOSED, KernelSpec, series_by_name

ALL_FAMILIES = ["exponential", "polynomial", "binomial", "geometric", "bergman"]


def make_spec(family, mode="composed", order=2, dim=1, **params):
    if family == "polynomial":
        params.setdefault("s", 2)
    elif family == "binomial":
        params.setdefault("alpha", 1.5)
    return KernelSpec(series_by_name(family, params), mode, order, dim)


def in_domain_points(spec, rng, count, fill=0.8):
    """Sample points comfortably inside the kernel's convergence region."""
    pts = rng.uniform(-1.0, 1.0, (count, spec.dim))
    radius = spec.series.radius
    if not np.isfinite(radius):
        return pts
    if spec.mode == COMPOSED:
        mass = np.sum(np.abs(pts) ** spec.order, axis=1)
        shrink = (fill * radius / np.maximum(mass, 1e-300)) ** (1.0 / spec.order)
        return pts * np.minimum(shrink, 1.0)[:, None]
    return pts * (fill * radius) ** (1.0 / spec.order)


def gram_matrix(spec, X):
    """Dense order-2 Gram matrix oracle (m = 2 only)."""
    from tksvr.kernels import eval_kernel
    n = X.shape[0]
    return np.array([[eval_kernel(spec, np.vstack([X[i], X[j]]))
                      for j in range(n)] for i in range(n)])

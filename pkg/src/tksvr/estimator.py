"""Scikit-learn style front end for the tensor-kernel regressor."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dual_solver import SolverConfig
from .kernels import KernelSpec, series_by_name
from .model import Dataset, fit as _fit, loss_from_name, predict_many


class TensorKernelSVR(BaseEstimator, RegressorMixin):
    """Support vector regression in an l^r Banach feature space.

    The regression function lives in a reproducing kernel Banach space
    built from a power-series dictionary with l^r coefficients,
    r = order/(order-1); ``order=2`` recovers classical kernel machines.

    Parameters
    ----------
    kernel : str
        Series family: "exponential", "polynomial", "binomial",
        "geometric", or "bergman".
    mode : str
        "composed" or "product" multi-index weighting.
    order : int
        Even tensor order m >= 2; controls the sparsity-inducing exponent.
    degree : int
        Degree s of the polynomial kernel (ignored otherwise).
    alpha : float
        Exponent of the binomial kernel (ignored otherwise).
    loss : str
        "square" or "eps".
    eps : float
        Tube half-width of the eps-insensitive loss.
    gamma : float
        Trade-off weight on the empirical risk term.
    fit_offset : bool
        Fit an intercept (square loss only).
    tol_kkt, max_iter :
        Solver stopping controls.
    """

    def __init__(self, kernel="polynomial", mode="composed", order=2,
                 degree=2, alpha=1.0, loss="square", eps=0.1, gamma=1.0,
                 fit_offset=False, tol_kkt=1e-6, max_iter=10000):
        self.kernel = kernel
        self.mode = mode
        self.order = order
        self.degree = degree
        self.alpha = alpha
        self.loss = loss
        self.eps = eps
        self.gamma = gamma
        self.fit_offset = fit_offset
        self.tol_kkt = tol_kkt
        self.max_iter = max_iter

    def _kernel_spec(self, dim: int) -> KernelSpec:
        params = {}
        if self.kernel == "polynomial":
            params["s"] = self.degree
        elif self.kernel == "binomial":
            params["alpha"] = self.alpha
        series = series_by_name(self.kernel, params)
        return KernelSpec(series, self.mode, self.order, dim)

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        spec = self._kernel_spec(X.shape[1])
        config = SolverConfig(tol_kkt=self.tol_kkt, max_iter=self.max_iter)
        self.model_ = _fit(Dataset(X, y), spec, loss_from_name(self.loss, self.eps),
                           gamma=self.gamma, offset=self.fit_offset,
                           solver_config=config)
        self.dual_coef_ = self.model_.u
        self.intercept_ = self.model_.b
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return predict_many(self.model_, X)

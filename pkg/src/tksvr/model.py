"""User-facing model: fit, predict, residuals, and JSON serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, TextIO, Union

import numpy as np

from .contraction import GramTensor, contract_predict
from .dual_solver import (
    DualProblem,
    DualSolution,
    SolverConfig,
    recover_offset,
    solve,
)
from .errors import CorruptPayload, DimensionMismatch, DomainViolation, SchemaVersionMismatch
from .kernels import KernelSpec, check_domain, series_by_name
from .losses import EpsInsensitiveLoss, Loss, PowerRegularizer, SquareLoss

MODEL_SCHEMA_VERSION = 1


@dataclass
class Dataset:
    """Training sample (x_i, y_i), i.e. the empirical distribution
    (1/n) sum of point masses."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float)
        if self.inputs.ndim == 1:
            self.inputs = self.inputs.reshape(-1, 1)
        self.labels = np.asarray(self.labels, dtype=float).reshape(-1)
        if self.inputs.shape[0] == 0:
            raise ValueError("dataset must contain at least one sample")
        if self.inputs.shape[0] != self.labels.shape[0]:
            raise DimensionMismatch("inputs and labels disagree on n")
        if not np.all(np.isfinite(self.labels)):
            raise ValueError("labels must be finite")

    @property
    def n(self) -> int:
        return self.inputs.shape[0]


@dataclass
class Model:
    """Fitted tensor-kernel regressor: kernel + training inputs + dual
    vector + offset."""

    kernel: KernelSpec
    inputs: np.ndarray
    u: np.ndarray
    b: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float)
        self.u = np.asarray(self.u, dtype=float).reshape(-1)
        if self.inputs.shape[0] != self.u.shape[0]:
            raise CorruptPayload("dual vector length must equal the number "
                                 "of training inputs")
        self._gram = GramTensor(self.kernel, self.inputs)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def scale(self) -> float:
        # Collapsed primal-recovery constant for the power regularizer.
        return 1.0 / float(self.n) ** (self.kernel.order - 1)

    @property
    def gram(self) -> GramTensor:
        return self._gram

    @property
    def trivial(self) -> bool:
        return bool(np.all(self.u == 0.0))


def fit(data: Dataset, kernel: KernelSpec, loss: Loss,
        reg: Optional[PowerRegularizer] = None, gamma: float = 1.0,
        offset: bool = False,
        solver_config: Optional[SolverConfig] = None) -> Model:
    """Fit a model by solving the finite-dimensional dual problem."""
    reg = reg or PowerRegularizer(kernel.order)
    gram = GramTensor(kernel, data.inputs)
    problem = DualProblem(gram, data.labels, loss, reg, gamma, offset)
    solution = solve(problem, solver_config)
    b = recover_offset(problem, solution.u)
    diagnostics = {
        "objective": solution.objective,
        "kkt_residual": solution.kkt_residual,
        "iterations": solution.iterations,
        "converged": solution.converged,
    }
    model = Model(kernel, data.inputs, solution.u, b, diagnostics)
    model._gram = gram  # reuse the solver's kernel cache
    model.solution = solution  # full trace, not serialized
    return model


def predict(model: Model, x) -> float:
    """Evaluate the regression function at one point via the tensor-kernel
    representer formula."""
    return model.scale * contract_predict(model.gram, model.u, x) + model.b


def predict_many(model: Model, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return np.array([predict(model, x) for x in X])


def residuals(model: Model, data: Dataset) -> np.ndarray:
    """e_i = y_i - f(x_i) over a dataset."""
    return data.labels - predict_many(model, data.inputs)


def _kernel_to_json(spec: KernelSpec) -> dict:
    return {
        "family": spec.series.name,
        "mode": spec.mode,
        "m": spec.order,
        "d": spec.dim,
        "params": dict(spec.series.params),
    }


def kernel_from_json(obj: dict) -> KernelSpec:
    try:
        series = series_by_name(obj["family"], obj.get("params", {}))
        return KernelSpec(series, obj["mode"], obj["m"], obj["d"])
    except (KeyError, TypeError) as exc:
        raise CorruptPayload(f"malformed kernel description: {exc}") from exc
    except ValueError as exc:
        raise SchemaVersionMismatch(str(exc)) from exc


def save(model: Model, sink: Union[str, TextIO]) -> None:
    """Write the model as versioned JSON; floats keep shortest round-trip
    form so load(save(m)) reproduces predictions bit-exactly."""
    payload = {
        "version": MODEL_SCHEMA_VERSION,
        "kernel": _kernel_to_json(model.kernel),
        "inputs": model.inputs.tolist(),
        "u": model.u.tolist(),
        "b": model.b,
        "diagnostics": model.diagnostics,
    }
    if isinstance(sink, str):
        with open(sink, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        json.dump(payload, sink, indent=2)


def load(source: Union[str, TextIO]) -> Model:
    """Read a model written by save, validating schema and invariants."""
    try:
        if isinstance(source, str):
            with open(source) as fh:
                payload = json.load(fh)
        else:
            payload = json.load(source)
    except json.JSONDecodeError as exc:
        raise CorruptPayload(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise CorruptPayload("model payload must be a JSON object")
    if payload.get("version") != MODEL_SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"unsupported model version {payload.get('version')!r}")
    for key in ("kernel", "inputs", "u", "b"):
        if key not in payload:
            raise CorruptPayload(f"model payload is missing {key!r}")
    kernel = kernel_from_json(payload["kernel"])
    inputs = np.asarray(payload["inputs"], dtype=float)
    u = np.asarray(payload["u"], dtype=float)
    if inputs.ndim != 2 or inputs.shape[1] != kernel.dim:
        raise CorruptPayload("training inputs do not match the kernel dimension")
    if u.shape != (inputs.shape[0],):
        raise CorruptPayload("dual vector length must equal the number of "
                             "training inputs")
    try:
        return Model(kernel, inputs, u, float(payload["b"]),
                     payload.get("diagnostics", {}))
    except DomainViolation as exc:
        raise CorruptPayload(str(exc)) from exc


def loss_from_name(name: str, eps: float = 0.1) -> Loss:
    if name == "square":
        return SquareLoss()
    if name in ("eps", "eps-insensitive"):
        return EpsInsensitiveLoss(eps)
    raise ValueError(f"unknown loss {name!r}")

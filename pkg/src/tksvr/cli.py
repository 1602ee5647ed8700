"""Command-line front end: fit / predict / audit on CSV data.

Configuration comes from a flat ``key = value`` file, overridable by
flags. Data files are CSVs with a header of feature columns ``x1..xd``
plus a label column ``y`` for fitting.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import model as model_mod
from .contraction import GramTensor
from .dual_solver import DualProblem, SolverConfig, kkt_report
from .errors import TksvrError
from .kernels import KernelSpec, check_domain, series_by_name
from .losses import EpsInsensitiveLoss, PowerRegularizer
from .oracle import build_feature_map, feature_norm, primal_predict, primal_weights

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_MAX_ITER = 2
EXIT_AUDIT_FAIL = 3

REPRESENTER_THRESHOLD = 1e-10


def _threads_cap() -> int:
    """Contraction parallelism cap from TKSVR_THREADS (>= 1)."""
    try:
        return max(1, int(os.environ.get("TKSVR_THREADS", "1")))
    except ValueError:
        return 1


def read_config(path: str) -> dict:
    cfg = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            cfg[key] = value
    return cfg


def _read_csv(path: str, need_labels: bool):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: no rows") from None
        header = [h.strip() for h in header]
        feature_cols = []
        d = 0
        while f"x{d + 1}" in header:
            feature_cols.append(header.index(f"x{d + 1}"))
            d += 1
        if d == 0:
            raise ValueError(f"{path}: header must contain columns x1..xd")
        label_col = header.index("y") if "y" in header else None
        if need_labels and label_col is None:
            raise ValueError(f"{path}: header must contain a label column y")
        X, y = [], []
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                X.append([float(row[c]) for c in feature_cols])
                if label_col is not None:
                    y.append(float(row[label_col]))
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}: malformed row {len(X) + 1}: {exc}")
    if not X:
        raise ValueError(f"{path}: no rows")
    X = np.array(X)
    labels = np.array(y) if label_col is not None else None
    return X, labels


def _kernel_from_settings(s: dict, dim: int) -> KernelSpec:
    params = {}
    family = s["kernel"]
    if family == "polynomial":
        params["s"] = int(s.get("s", s.get("degree", 2)))
    elif family == "binomial":
        params["alpha"] = float(s.get("alpha", 1.0))
    series = series_by_name(family, params)
    return KernelSpec(series, s.get("mode", "composed"),
                      int(s.get("order", 2)), dim)


def _settings(args) -> dict:
    s = read_config(args.config) if args.config else {}
    for key in ("data", "model", "out", "gamma", "order", "kernel", "mode",
                "loss", "eps", "seed", "trace"):
        value = getattr(args, key, None)
        if value is not None:
            s[key] = value
    if getattr(args, "no_offset", False):
        s["offset"] = "false"
    return s


def _solver_config(s: dict) -> SolverConfig:
    return SolverConfig(
        tol_obj=float(s.get("tol_obj", 1e-10)),
        tol_kkt=float(s.get("tol_kkt", 1e-6)),
        max_iter=int(s.get("max_iter", 10000)),
        initial_step=float(s.get("initial_step", 1.0)),
        seed=int(s.get("seed", 0)),
    )


def _check_rows_in_domain(spec: KernelSpec, X: np.ndarray) -> None:
    bad = [i for i in range(X.shape[0])
           if not check_domain(spec, X[i]).passed]
    if bad:
        rows = ", ".join(str(i + 1) for i in bad)
        raise ValueError(f"rows outside the kernel convergence domain: {rows}")


def _bool(value: str) -> bool:
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def cmd_fit(args) -> int:
    s = _settings(args)
    try:
        X, y = _read_csv(s["data"], need_labels=True)
        spec = _kernel_from_settings(s, X.shape[1])
        _check_rows_in_domain(spec, X)
        loss = model_mod.loss_from_name(s.get("loss", "square"),
                                        float(s.get("eps", 0.1)))
        offset = _bool(s.get("offset", "false"))
        config = _solver_config(s)
        fitted = model_mod.fit(model_mod.Dataset(X, y), spec, loss,
                               gamma=float(s.get("gamma", 1.0)),
                               offset=offset, solver_config=config)
    except (TksvrError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    model_mod.save(fitted, s["model"])
    diag = fitted.diagnostics
    print(f"objective    {diag['objective']:.12g}")
    print(f"kkt_residual {diag['kkt_residual']:.6g}")
    print(f"iterations   {diag['iterations']}")
    if s.get("trace"):
        _write_trace(s["trace"], fitted)
    return EXIT_OK if diag["converged"] else EXIT_MAX_ITER


def _write_trace(path: str, fitted) -> None:
    trace = getattr(fitted, "solution", None)
    trace = trace.trace if trace is not None else []
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "objective", "step", "residual"])
        for i, (obj, step, res) in enumerate(trace):
            writer.writerow([i, repr(obj), repr(step), repr(res)])


def cmd_predict(args) -> int:
    s = _settings(args)
    try:
        fitted = model_mod.load(s["model"])
        X, _ = _read_csv(s["data"], need_labels=False)
        if X.shape[1] != fitted.kernel.dim:
            raise ValueError(
                f"data has {X.shape[1]} features, model expects "
                f"{fitted.kernel.dim}")
        _check_rows_in_domain(fitted.kernel, X)
        yhat = model_mod.predict_many(fitted, X)
    except (TksvrError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    out = s.get("out")
    rows = [["row", "yhat"]] + [[i + 1, repr(float(v))]
                                for i, v in enumerate(yhat)]
    if out:
        with open(out, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
    else:
        csv.writer(sys.stdout).writerows(rows)
    return EXIT_OK


def cmd_audit(args) -> int:
    s = _settings(args)
    try:
        fitted = model_mod.load(s["model"])
        X, y = _read_csv(s["data"], need_labels=True)
        if X.shape != fitted.inputs.shape or not np.array_equal(X, fitted.inputs):
            raise ValueError("training data does not match the model inputs")
        loss = model_mod.loss_from_name(s.get("loss", "square"),
                                        float(s.get("eps", 0.1)))
        gamma = float(s.get("gamma", 1.0))
        offset = _bool(s.get("offset", "false"))
        spec = fitted.kernel
        problem = DualProblem(fitted.gram, y, loss,
                              PowerRegularizer(spec.order), gamma, offset)
    except (TksvrError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    tol = float(s.get("tol_kkt", 1e-6))
    report = kkt_report(problem, fitted.u, fitted.b)
    print(f"offset_balance residual   {report.offset_balance:.6g}")
    print(f"subdifferential residual  {report.subdifferential:.6g}")
    print(f"fixed_point residual      {report.fixed_point:.6g}")
    ok = report.max <= tol

    if isinstance(loss, EpsInsensitiveLoss):
        errors = y - model_mod.predict_many(fitted, X)
        print("complementary slackness (i, e_i, u_i, in_tube):")
        for i, (e, ui) in enumerate(zip(errors, fitted.u)):
            print(f"  {i + 1}  {e: .6g}  {ui: .6g}  "
                  f"{'yes' if abs(e) < loss.eps else 'no'}")

    if spec.series.name == "polynomial":
        fmap = build_feature_map(spec, X)
        w = primal_weights(fmap, fitted.u, X)
        worst = max(abs(primal_predict(fmap, w, x) + fitted.b
                        - model_mod.predict(fitted, x)) for x in X)
        print(f"representer fidelity      {worst:.6g}")
        ok = ok and worst <= REPRESENTER_THRESHOLD

    print(f"max kkt residual          {report.max:.6g}  (threshold {tol:g})")
    return EXIT_OK if ok else EXIT_AUDIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tksvr",
        description="Tensor-kernel support vector regression in l^r spaces")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in (("fit", cmd_fit), ("predict", cmd_predict),
                          ("audit", cmd_audit)):
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument("--data", help="CSV data path")
        p.add_argument("--model", help="model JSON path")
        p.add_argument("--out", help="output path")
        p.add_argument("--gamma", type=float)
        p.add_argument("--order", type=int)
        p.add_argument("--kernel")
        p.add_argument("--mode", choices=["composed", "product"])
        p.add_argument("--loss", choices=["square", "eps"])
        p.add_argument("--eps", type=float)
        p.add_argument("--no-offset", action="store_true")
        p.add_argument("--seed", type=int)
        p.add_argument("--trace", help="fit: write iteration trace CSV here")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _threads_cap()  # validated; contraction currently runs sequentially
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())

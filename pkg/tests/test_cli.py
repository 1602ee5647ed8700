"""Command-line interface: fit, predict, audit, config parsing, exit codes."""

import csv
import json

import numpy as np
import pytest

from tksvr.cli import (
    EXIT_AUDIT_FAIL,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    main,
    read_config,
)


@pytest.fixture
def workdir(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, (5, 2))
    y = X[:, 0] ** 2 - X[:, 1] + 0.05 * rng.normal(size=5)
    train = tmp_path / "train.csv"
    with open(train, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x1", "x2", "y"])
        for xi, yi in zip(X, y):
            writer.writerow([*xi, yi])
    config = tmp_path / "cfg.txt"
    config.write_text(
        "# synthetic smoke configuration\n"
        "kernel = polynomial\n"
        "s = 2\n"
        "order = 4\n"
        "loss = square\n"
        "gamma = 10\n")
    return tmp_path, train, config


def run(*argv):
    return main(list(argv))


# ---------------------------------------------------------------------------
# fit


def test_fit_writes_model_and_exits_zero(workdir, capsys):
    tmp, train, config = workdir
    model = tmp / "model.json"
    code = run("fit", "--config", str(config), "--data", str(train),
               "--model", str(model))
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert model.exists()
    assert "kkt_residual" in out
    payload = json.loads(model.read_text())
    assert payload["version"] == 1
    assert payload["kernel"]["m"] == 4
    assert payload["diagnostics"]["converged"] is True
    assert float(out.split("kkt_residual")[1].split()[0]) <= 1e-6


def test_fit_empty_csv_is_input_error(workdir, capsys):
    tmp, _, config = workdir
    empty = tmp / "empty.csv"
    empty.write_text("x1,x2,y\n")
    code = run("fit", "--config", str(config), "--data", str(empty),
               "--model", str(tmp / "m.json"))
    assert code == EXIT_INPUT_ERROR
    assert "no rows" in capsys.readouterr().err


def test_fit_out_of_domain_row_names_the_row(workdir, capsys):
    tmp, _, _ = workdir
    data = tmp / "bad.csv"
    data.write_text("x1,y\n0.1,1.0\n2.5,0.0\n")
    code = run("fit", "--kernel", "geometric", "--order", "2",
               "--data", str(data), "--model", str(tmp / "m.json"))
    err = capsys.readouterr().err
    assert code == EXIT_INPUT_ERROR
    assert "2" in err and "domain" in err


def test_fit_malformed_row(workdir, capsys):
    tmp, _, config = workdir
    data = tmp / "bad.csv"
    data.write_text("x1,x2,y\n0.1,0.2,oops\n")
    code = run("fit", "--config", str(config), "--data", str(data),
               "--model", str(tmp / "m.json"))
    assert code == EXIT_INPUT_ERROR


def test_fit_writes_trace(workdir):
    tmp, train, config = workdir
    trace = tmp / "trace.csv"
    code = run("fit", "--config", str(config), "--data", str(train),
               "--model", str(tmp / "m.json"), "--trace", str(trace))
    assert code == EXIT_OK
    rows = trace.read_text().splitlines()
    assert rows[0] == "iteration,objective,step,residual"
    assert len(rows) >= 2


# ---------------------------------------------------------------------------
# predict


def test_predict_round_trip_matches_in_process(workdir):
    tmp, train, config = workdir
    model = tmp / "model.json"
    out = tmp / "pred.csv"
    assert run("fit", "--config", str(config), "--data", str(train),
               "--model", str(model)) == EXIT_OK
    assert run("predict", "--model", str(model), "--data", str(train),
               "--out", str(out)) == EXIT_OK

    from tksvr.model import load, predict_many
    fitted = load(str(model))
    X = np.loadtxt(train, delimiter=",", skiprows=1)[:, :2]
    expected = predict_many(fitted, X)
    got = np.loadtxt(out, delimiter=",", skiprows=1)[:, 1]
    assert np.array_equal(got, expected)  # bit-exact through repr round-trip


def test_predict_zero_model_outputs_offset(workdir, tmp_path):
    tmp, train, _ = workdir
    from tksvr.model import Model, save
    from helpers import make_spec
    spec = make_spec("polynomial", order=2, dim=2)
    model = Model(spec, np.zeros((1, 2)), np.zeros(1), 0.25)
    path = tmp / "zero.json"
    save(model, str(path))
    out = tmp / "pred.csv"
    assert run("predict", "--model", str(path), "--data", str(train),
               "--out", str(out)) == EXIT_OK
    vals = np.loadtxt(out, delimiter=",", skiprows=1)[:, 1]
    assert np.all(vals == 0.25)


def test_predict_dimension_mismatch(workdir, capsys):
    tmp, train, config = workdir
    model = tmp / "model.json"
    run("fit", "--config", str(config), "--data", str(train),
        "--model", str(model))
    bad = tmp / "onecol.csv"
    bad.write_text("x1,y\n0.1,0.0\n")
    assert run("predict", "--model", str(model), "--data", str(bad),
               "--out", str(tmp / "p.csv")) == EXIT_INPUT_ERROR


# ---------------------------------------------------------------------------
# audit


def test_audit_converged_model_passes(workdir, capsys):
    tmp, train, config = workdir
    model = tmp / "model.json"
    run("fit", "--config", str(config), "--data", str(train),
        "--model", str(model))
    code = run("audit", "--config", str(config), "--data", str(train),
               "--model", str(model))
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "representer fidelity" in out
    assert "max kkt residual" in out


def test_audit_corrupted_dual_vector_fails(workdir, capsys):
    tmp, train, config = workdir
    model = tmp / "model.json"
    run("fit", "--config", str(config), "--data", str(train),
        "--model", str(model))
    payload = json.loads(model.read_text())
    payload["u"] = [v + 0.5 for v in payload["u"]]
    model.write_text(json.dumps(payload))
    code = run("audit", "--config", str(config), "--data", str(train),
               "--model", str(model))
    assert code == EXIT_AUDIT_FAIL


def test_audit_eps_prints_slackness_table(workdir, capsys):
    tmp, train, _ = workdir
    model = tmp / "model.json"
    args = ["--data", str(train), "--model", str(model), "--kernel",
            "polynomial", "--order", "2", "--loss", "eps", "--eps", "0.2",
            "--gamma", "0.5"]
    assert run("fit", *args) == EXIT_OK
    capsys.readouterr()
    assert run("audit", *args) == EXIT_OK
    assert "complementary slackness" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# config and determinism


def test_read_config_parses_and_rejects(tmp_path):
    good = tmp_path / "good.cfg"
    good.write_text("a = 1\n# comment\nb=two # trailing\n\n")
    assert read_config(str(good)) == {"a": "1", "b": "two"}
    bad = tmp_path / "bad.cfg"
    bad.write_text("just a line\n")
    with pytest.raises(ValueError):
        read_config(str(bad))


def test_flags_override_config(workdir, capsys):
    tmp, train, config = workdir
    model = tmp / "model.json"
    code = run("fit", "--config", str(config), "--data", str(train),
               "--model", str(model), "--order", "2")
    assert code == EXIT_OK
    assert json.loads(model.read_text())["kernel"]["m"] == 2


def test_byte_identical_reruns(workdir):
    tmp, train, config = workdir
    m1, m2 = tmp / "m1.json", tmp / "m2.json"
    p1, p2 = tmp / "p1.csv", tmp / "p2.csv"
    for model, pred in ((m1, p1), (m2, p2)):
        assert run("fit", "--config", str(config), "--data", str(train),
                   "--model", str(model)) == EXIT_OK
        assert run("predict", "--model", str(model), "--data", str(train),
                   "--out", str(pred)) == EXIT_OK
    assert m1.read_bytes() == m2.read_bytes()
    assert p1.read_bytes() == p2.read_bytes()

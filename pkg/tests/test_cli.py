import csv
import json

import numpy as np
import pytest

from rotwaves.cli import load_config, main
from rotwaves.errors import ConfigError


def run(tmp_path, *args):
    return main(["--out", str(tmp_path), *args])


def read_json(path):
    return json.loads(path.read_text())


def test_stream_irrotational(tmp_path):
    assert run(tmp_path, "--set", "problem.lambda=0.6", "stream") == 0
    d = read_json(tmp_path / "stream.json")
    assert d["Q"] == pytest.approx(0.5 * 0.6**2)
    with open(tmp_path / "stream.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["y", "Psi", "dPsi", "ddPsi"]


def test_stream_constant_vorticity(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[problem]\nvorticity = polynomial\ncoefficients = 1\nh = 1\nlambda = 1\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "stream"]) == 0
    assert read_json(tmp_path / "stream.json")["m"] == pytest.approx(1.5, abs=1e-12)


def test_stream_lambda_zero(tmp_path, capsys):
    assert run(tmp_path, "--set", "problem.lambda=0", "stream") == 3
    assert "zero surface velocity" in capsys.readouterr().err


def test_dispersion(tmp_path, oracles):
    assert run(tmp_path, "dispersion") == 0
    d = read_json(tmp_path / "dispersion.json")
    assert d["tau_star"] == pytest.approx(oracles["irrotational_tau_star"]["0.8"], abs=1e-10)
    assert d["monotone"]
    with open(tmp_path / "dispersion.csv") as fh:
        sig = [float(r["sigma"]) for r in csv.DictReader(fh)]
    assert np.all(np.diff(sig) > 0)


def test_dispersion_no_bifurcation(tmp_path):
    assert run(tmp_path, "--set", "problem.lambda=1.2", "dispersion") == 4


def test_smallwave_and_check(tmp_path):
    assert run(tmp_path, "smallwave") == 0
    out = tmp_path / "chk"
    assert main(["--out", str(out), "check", str(tmp_path / "smallwave.json")]) == 0
    rep = read_json(out / "nodal.json")
    assert all(rep[k] is True for k in rep["margins"])


def test_check_uniform_stream(tmp_path):
    assert run(tmp_path, "--set", "wave.t=0", "smallwave") == 0
    assert run(tmp_path, "check", str(tmp_path / "smallwave.json")) == 5


def test_check_corrupt_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(tmp_path, "check", str(bad)) == 2
    bad.write_text(json.dumps({"format": "wavefield-v1", "nx": 3}))
    assert run(tmp_path, "check", str(bad)) == 2


def _signal(path, values, x):
    path.write_text("x,u\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(x, values)))


def test_hilbert(tmp_path):
    x = np.arange(32) * 2.0 / 32
    _signal(tmp_path / "cos.csv", np.cos(np.pi * x), x)
    assert run(tmp_path, "hilbert", str(tmp_path / "cos.csv"), "--h", "1") == 0
    with open(tmp_path / "hilbert.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[1]["multiplier_im"]) == pytest.approx(-1 / np.tanh(np.pi), rel=1e-14)
    assert float(rows[1]["im_out"]) == pytest.approx(-0.5 / np.tanh(np.pi), rel=1e-12)


def test_hilbert_bad_inputs(tmp_path):
    x = np.arange(16) * 2.0 / 16
    _signal(tmp_path / "mean.csv", 1 + np.cos(np.pi * x), x)
    assert run(tmp_path, "hilbert", str(tmp_path / "mean.csv")) == 2
    (tmp_path / "empty.csv").write_text("")
    assert run(tmp_path, "hilbert", str(tmp_path / "empty.csv")) == 2


def test_config_rejects_unknown(tmp_path):
    with pytest.raises(ConfigError):
        load_config(overrides=["problem.colour=blue"])
    with pytest.raises(ConfigError):
        load_config(overrides=["extra.key=1"])
    with pytest.raises(ConfigError):
        load_config(overrides=["problem.h=-1"])
    with pytest.raises(ConfigError):
        load_config(overrides=["continuation.ds=0"])
    assert run(tmp_path, "--set", "problem.regime=diagonal", "stream") == 2
    assert run(tmp_path, "--config", str(tmp_path / "missing.ini"), "stream") == 2


def test_bad_subcommand():
    assert main(["nonsense"]) == 2


def test_continue_trivial_seed(tmp_path, capsys):
    args = ["--set", "wave.t=0", "--set", "continuation.max_steps=2"]
    assert run(tmp_path, *args, "continue") == 0
    assert "uniform streams" in capsys.readouterr().err
    summary = read_json(tmp_path / "branch.json")
    assert summary["trivial"] and summary["termination"] == "max_steps"


def test_continue_round_trip(tmp_path):
    args = ["--set", "continuation.max_steps=3"]
    assert run(tmp_path, *args, "continue") == 0
    with open(tmp_path / "branch.csv") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows[1:]:
        out = tmp_path / f"chk{r['index']}"
        f = tmp_path / "fields" / f"point_{int(r['index']):04d}.json"
        assert main(["--out", str(out), "check", str(f)]) == 0
        rep = read_json(out / "nodal.json")
        for k in rep["margins"]:
            assert {True: "true", False: "false", None: "indeterminate"}[rep[k]] == r[k]

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from bosonet import WhiteNoise, generate_topology
from bosonet.cli import main, time_grid
from bosonet.errors import ValidationError
from bosonet.topology import network_to_dict


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def network_doc(n=2, omega=1.0, lam=0.1, gamma=0.05, kind="linear"):
    spec = generate_topology(kind, n, omega, lam, damping=WhiteNoise(gamma) if gamma else None)
    return network_to_dict(spec)


def single_doc(gamma=0.1, omega=1.0):
    return {"n": 1, "oscillators": [{"index": 1, "omega": omega,
                                     "reservoir": {"type": "distinct", "model": "r"}}],
            "reservoir_mode": "distinct", "damping_models": {"r": {"kind": "white_noise", "gamma": gamma}}}


def cat_doc(n, b=1.0):
    rest = [0.0] * (n - 1)
    return {"kind": "coherent_superposition",
            "branches": [{"amplitude": 1, "labels": [b] + rest}, {"amplitude": 1, "labels": [-b] + rest}]}


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


@pytest.fixture
def files(tmp_path):
    def make(net, state):
        return write_json(tmp_path / "net.json", net), write_json(tmp_path / "state.json", state)
    return make


def test_time_grid():
    assert np.allclose(time_grid(0, 1, 0.25, None), [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(time_grid(0, 0, 0.1, None), [0])
    assert np.allclose(time_grid(None, None, None, "0.5, 2,3"), [0.5, 2, 3])
    for bad in [(1, 0, 0.1, None), (0, 1, 0, None), (None, None, None, "2,1"), (None, None, None, "")]:
        with pytest.raises(ValidationError):
            time_grid(*bad)


def test_damped_cat_grid(files, tmp_path):
    net, state = files(single_doc(0.1), cat_doc(1, 1.5))
    out = tmp_path / "run.csv"
    assert main(["simulate", "--network", net, "--state", state, "--t0", "0", "--t1", "10", "--dt", "0.1",
                 "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert data.shape[0] == 101
    assert header[0] == "t" and "w_abs_1_2" in header and "P_R" in header
    w = data[:, header.index("w_abs_1_2")]
    assert np.all(np.diff(w) < 0)
    assert w[-1] == pytest.approx(np.exp(-2 * 1.5**2 * (1 - np.exp(-1.0))), rel=1e-12)
    manifest = json.loads((tmp_path / "run.csv.manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert set(manifest["inputs"]) >= {"network", "state"}
    assert manifest["gamma"] == [[0.1]]


def test_lossless_transfer_reaches_one(files, tmp_path):
    lam = 0.1
    coherent = {"kind": "coherent_superposition", "branches": [{"labels": [1.0, 0.0]}]}
    net, state = files(network_doc(omega=1.1, lam=lam, gamma=0.0), coherent)
    out = tmp_path / "pt.csv"
    t_star = np.pi / (2 * lam)
    assert main(["simulate", "--network", net, "--state", state, "--times", f"0,{t_star!r}",
                 "--observables", "transfer", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["t", "P_T_2"]
    assert data[1, 1] >= 1 - 1e-9


def test_empty_grid_is_a_validation_error(files):
    net, state = files(single_doc(), cat_doc(1))
    assert main(["simulate", "--network", net, "--state", state, "--t0", "1", "--t1", "0", "--dt", "0.1"]) == 2


def test_sweep_over_coupling(files, tmp_path):
    net, state = files(network_doc(n=3, kind="symmetric", gamma=0.02), cat_doc(3))
    out = tmp_path / "sweep.csv"
    values = "0.01,0.1,0.3333333333333333"
    assert main(["sweep", "--network", net, "--state", state, "--times", "0,1,2", "--param", f"lambda={values}",
                 "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header[0] == "lambda"
    assert len(np.unique(data[:, 0])) == 3 and data.shape[0] == 9
    manifest = json.loads((tmp_path / "sweep.csv.manifest.json").read_text())
    assert len(manifest["slices"]) == 3


def test_single_point_sweep_matches_simulate(files, tmp_path):
    net, state = files(network_doc(gamma=0.03), cat_doc(2))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    common = ["--network", net, "--state", state, "--t1", "3", "--dt", "0.5"]
    assert main(["simulate", *common, "--out", str(a)]) == 0
    assert main(["sweep", *common, "--param", "lambda=0.1", "--out", str(b)]) == 0
    ha, da = read_csv(a)
    hb, db = read_csv(b)
    assert hb[1:] == ha
    assert np.array_equal(db[:, 1:], da)


def test_overlap_sweep_gives_monotone_off_diagonal_gamma(files, tmp_path):
    doc = network_doc(gamma=0.05)
    doc["reservoir_mode"] = "common"
    for o in doc["oscillators"]:
        o["reservoir"]["type"] = "common"
    net, state = files(doc, cat_doc(2))
    out = tmp_path / "ov.csv"
    assert main(["sweep", "--network", net, "--state", state, "--times", "0,1", "--param", "overlap=0,0.5,1",
                 "--out", str(out)]) == 0
    slices = json.loads((tmp_path / "ov.csv.manifest.json").read_text())["slices"]
    off = [s["gamma"][0][1] for s in slices]
    assert off[0] == pytest.approx(0.0, abs=1e-15)
    assert off[0] < off[1] < off[2]


def test_sweep_rejects_unknown_parameter(files):
    net, state = files(network_doc(), cat_doc(2))
    assert main(["sweep", "--network", net, "--state", state, "--times", "0", "--param", "mass=1"]) == 2
    assert main(["sweep", "--network", net, "--state", state, "--times", "0", "--param", "lambda=1,2,3",
                 "--max-points", "2"]) == 2


def test_compare_oracle_single_oscillator(files, tmp_path):
    net, state = files(single_doc(0.2), cat_doc(1, 1.0))
    out = tmp_path / "cmp.json"
    assert main(["compare-oracle", "--network", net, "--state", state, "--times", "1,3", "--cutoff", "20",
                 "--oracle-dt", "0.02", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["pass"] and report["max_deviation"] <= 1e-9


def test_compare_oracle_cat_and_wrong_sign(files, tmp_path):
    net, state = files(network_doc(gamma=0.05), cat_doc(2))
    out = tmp_path / "cmp.json"
    args = ["compare-oracle", "--network", net, "--state", state, "--times", "1,5", "--cutoff", "15",
            "--oracle-dt", "0.1", "--out", str(out)]
    assert main(args) == 0
    assert json.loads(out.read_text())["pass"]
    assert main(args + ["--sign-convention", "characteristic"]) == 4
    assert not json.loads(out.read_text())["pass"]


def test_compare_oracle_dimension_bound(files):
    net, state = files(network_doc(n=3, kind="symmetric"), cat_doc(3))
    assert main(["compare-oracle", "--network", net, "--state", state, "--times", "1", "--cutoff", "20"]) == 2


def test_output_is_deterministic(files, tmp_path):
    net, state = files(network_doc(n=3, kind="circular", gamma=0.02), cat_doc(3))
    outs = []
    for i, workers in enumerate(("1", "1", "2")):
        out = tmp_path / f"d{i}.csv"
        assert main(["sweep", "--network", net, "--state", state, "--t1", "4", "--dt", "1",
                     "--param", "lambda=0.05,0.1", "--workers", workers, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_parse_errors_exit_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 1,, }')
    state = write_json(tmp_path / "s.json", cat_doc(1))
    assert main(["simulate", "--network", str(bad), "--state", state, "--times", "0"]) == 1
    assert main(["simulate", "--network", str(tmp_path / "missing.json"), "--state", state, "--times", "0"]) == 1


def test_state_network_mismatch_exits_two(files):
    net, state = files(network_doc(), cat_doc(3))
    assert main(["simulate", "--network", net, "--state", state, "--times", "0"]) == 2


def test_topology_generate_and_validate(tmp_path, capsys):
    net = tmp_path / "ring.json"
    assert main(["topology", "generate", "--kind", "circular", "--n", "4", "--lambda", "0.2", "--gamma", "0.05",
                 "--out", str(net)]) == 0
    doc = json.loads(net.read_text())
    assert doc["n"] == 4 and len(doc["couplings"]) == 4
    capsys.readouterr()
    assert main(["validate", "--network", str(net)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["gamma_psd"] and np.allclose(np.diag(summary["gamma"]), 4 * 0.05)
    assert main(["topology", "generate", "--kind", "circular", "--n", "2"]) == 2


def test_console_script_runs(tmp_path):
    result = subprocess.run([sys.executable, "-m", "bosonet.cli", "--version"], capture_output=True, text=True)
    assert result.returncode == 0 and "bosonet" in result.stdout

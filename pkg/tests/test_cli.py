import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from umlaut.channel import identity_channel
from umlaut.cli import main
from umlaut.io import encode_matrix, serialize_document
from umlaut.random import random_density


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    text = out.getvalue()
    return code, (json.loads(text) if text.strip() else None), err.getvalue(), text


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write


@pytest.mark.parametrize(
    "argv, quantity",
    [
        (["state-umlaut", "state.json", "--verify"], "umlaut_information"),
        (["state-umlaut-alpha", "state.json", "--alpha", "0.5", "--verify"], "petz_umlaut_information"),
        (["state-bs-umlaut", "state.json", "--verify"], "bs_umlaut_information"),
        (["lautum", "state.json"], "lautum_information"),
        (["cq-umlaut", "cq.json", "--verify"], "cq_channel_umlaut_information"),
        (["ell", "cq.json", "--k", "4", "--bound", "--verify"], "lower_umlaut_ell"),
        (["chernoff", "cq.json", "--verify"], "chernoff_lower_bound"),
        (["dh", "state.json", "--eps", "0.3", "--verify"], "hypothesis_testing_divergence"),
        (["ns-meta", "gad.json", "--M", "2", "--verify"], "ns_meta_converse"),
        (["gaussian-umlaut-marginal", "gaussian.json", "--modes", "1", "--verify"], "gaussian_umlaut_marginal"),
    ],
)
def test_commands_succeed_and_verify(argv, quantity):
    code, rec, err, _ = run(*argv)
    assert code == 0, err
    assert rec["quantity"] == quantity
    verify = rec["diagnostics"].get("verify")
    if "--verify" in argv:
        assert verify is not None and verify["agree"], verify


def test_channel_umlaut_on_gad():
    code, rec, _, _ = run("channel-umlaut", "gad.json", "--verify")
    assert code == 0
    assert abs(rec["value"] - 1.725) < 0.01
    assert abs(rec["diagnostics"]["argmax_p"] - 0.386) < 0.005


def test_two_copy_ratio():
    code, rec, _, _ = run("two-copy", "gad.json", "--rho", "rho_star.json", "--ratio")
    assert code == 0
    assert abs(rec["value"] - 3.474) < 0.01
    assert rec["diagnostics"]["ratio"] >= 2.0


def test_dh_self_divergence():
    code, rec, _, _ = run("dh", "state.json", "--eps", "0.3")
    assert code == 0
    assert abs(rec["value"] + math.log(0.7)) < 1e-10


def test_bits_factor():
    _, nats, _, _ = run("state-umlaut", "state.json")
    _, bits, _, _ = run("state-umlaut", "state.json", "--base", "bits")
    assert bits["unit"] == "bits"
    assert abs(bits["value"] - nats["value"] / math.log(2)) < 1e-15


def test_deterministic_output():
    first = run("channel-umlaut", "gad.json", "--method", "generic", "--seed", "3")[3]
    second = run("channel-umlaut", "gad.json", "--method", "generic", "--seed", "3")[3]
    assert first == second


def test_pretty_is_multiline():
    _, _, _, text = run("state-umlaut", "state.json", "--pretty")
    assert text.count("\n") > 3


def test_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    code, rec, _, _ = run(
        "sweep", "--param", "p", "--range", "0.30:0.45:0.01", "--channel", "gad.json",
        "--quantity", "restricted-umlaut", "--out", str(out), "--jobs", "2",
    )
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["p", "restricted-umlaut"]
    ps = [float(r[0]) for r in rows[1:]]
    vals = np.array([float(r[1]) for r in rows[1:]])
    assert ps == sorted(ps) and len(ps) == 16
    assert np.all(np.diff(vals, 2) <= 1e-6)
    assert abs(rec["diagnostics"]["argmax"] - 0.39) < 1e-9


def test_sweep_ns_error_is_unitless(tmp_path):
    out = tmp_path / "ns.csv"
    code, rec, _, _ = run(
        "sweep", "--param", "M", "--range", "2:3:1", "--channel", "gad.json",
        "--quantity", "ns-error", "--out", str(out), "--base", "bits",
    )
    assert code == 0
    assert rec["unit"] is None


class TestExitCodes:
    def test_bad_document(self, write):
        path = write("bad.json", '{"schema_version": "1", "kind": "state"}')
        code, _, err, _ = run("state-umlaut", path)
        assert code == 2
        assert "payload" in err

    def test_argument_error(self):
        assert run("state-umlaut")[0] == 2
        assert run("dh", "state.json", "--eps", "1.5")[0] == 2

    def test_invariant_violation(self, write):
        m = random_density(4, 0)
        m[0, 1] += 1e-3
        text = json.dumps({"schema_version": "1", "kind": "state", "payload": {"dims": [2, 2], "matrix": encode_matrix(m)}})
        code, _, err, _ = run("state-umlaut", write("nonherm.json", text))
        assert code == 3
        assert "payload.matrix" in err

    def test_size_guard(self, write):
        path = write("id5.json", serialize_document("channel", identity_channel(5)))
        assert run("ns-meta", path, "--M", "2")[0] == 5

    def test_wrong_kind(self):
        assert run("channel-umlaut", "state.json")[0] == 2

    def test_infinite_value_rendered(self, write):
        psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        text = json.dumps({"schema_version": "1", "kind": "state", "payload": {"dims": [2, 2], "matrix": encode_matrix(np.outer(psi, psi))}})
        code, rec, _, _ = run("state-umlaut", write("bell.json", text))
        assert code == 0
        assert rec["value"] == "inf"


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "umlaut.cli", "state-umlaut", "state.json"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["unit"] == "nats"
